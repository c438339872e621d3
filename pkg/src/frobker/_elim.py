"""JIT-compiled elimination kernels over GF(p).

The workhorse is a left-looking column echelon: columns are reduced
against previously stored pivot columns, keyed by leading row index.
Columns that only touch disjoint row sets never interact, so block
structure (e.g. weight gradings of cochain spaces) is exploited without
ever being told about it.  Everything is deterministic: columns are
processed left to right and the pivot of a column is its smallest
remaining row index.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from numba.typed import List as NList

# status codes returned by the core loop
OK = 0
OVER_BUDGET = 1


@njit(cache=True)
def _axpy_merge(ia, va, ib, vb, c, p):
    """Sorted-merge computation of a - c*b over GF(p); b is assumed monic-led."""
    na = ia.size
    nb = ib.size
    out_i = np.empty(na + nb, np.int64)
    out_v = np.empty(na + nb, np.int64)
    i = 0
    j = 0
    k = 0
    while i < na and j < nb:
        ra = ia[i]
        rb = ib[j]
        if ra < rb:
            out_i[k] = ra
            out_v[k] = va[i]
            i += 1
            k += 1
        elif ra > rb:
            w = (-c * vb[j]) % p
            if w != 0:
                out_i[k] = rb
                out_v[k] = w
                k += 1
            j += 1
        else:
            w = (va[i] - c * vb[j]) % p
            if w != 0:
                out_i[k] = ra
                out_v[k] = w
                k += 1
            i += 1
            j += 1
    while i < na:
        out_i[k] = ia[i]
        out_v[k] = va[i]
        i += 1
        k += 1
    while j < nb:
        w = (-c * vb[j]) % p
        if w != 0:
            out_i[k] = ib[j]
            out_v[k] = w
            k += 1
        j += 1
    return out_i[:k].copy(), out_v[:k].copy()


@njit(cache=True)
def _scale_inplace(v, f, p):
    for t in range(v.size):
        v[t] = (v[t] * f) % p


@njit(cache=True)
def _echelon_csc(indptr, rowidx, vals, nrows, p, inv, track_kernel, track_combo, max_entries):
    """Column echelon of a CSC matrix.

    Returns (status, piv_rows, piv_cols, stor..., combo..., kernel...) where
    stor_* are the reduced monic pivot columns, combo_* expresses each pivot
    column as a combination of original columns (only if track_combo), and
    ker_* are combinations of original columns that vanish (only if
    track_kernel).  All ragged data comes back CSC-flattened.
    """
    ncols = indptr.size - 1
    keep_combos = track_kernel or track_combo
    pivot_owner = np.full(nrows, -1, np.int64)
    stor_i = NList()
    stor_v = NList()
    comb_i = NList()
    comb_v = NList()
    piv_rows = np.empty(ncols, np.int64)
    piv_cols = np.empty(ncols, np.int64)
    npiv = 0
    ker_i = NList()
    ker_v = NList()
    ker_cols = np.empty(ncols, np.int64)
    nker = 0
    stored = 0
    status = OK

    one = np.empty(1, np.int64)
    one[0] = 1

    for j in range(ncols):
        ci = rowidx[indptr[j]:indptr[j + 1]].copy()
        cv = vals[indptr[j]:indptr[j + 1]].copy()
        if keep_combos:
            ki = np.empty(1, np.int64)
            ki[0] = j
            kv = one.copy()
        else:
            ki = np.empty(0, np.int64)
            kv = np.empty(0, np.int64)
        while ci.size > 0:
            lead = ci[0]
            owner = pivot_owner[lead]
            if owner == -1:
                f = inv[cv[0]]
                if f != 1:
                    _scale_inplace(cv, f, p)
                    if ki.size > 0:
                        _scale_inplace(kv, f, p)
                pivot_owner[lead] = npiv
                stor_i.append(ci)
                stor_v.append(cv)
                if keep_combos:
                    comb_i.append(ki)
                    comb_v.append(kv)
                piv_rows[npiv] = lead
                piv_cols[npiv] = j
                npiv += 1
                stored += ci.size + ki.size
                break
            c = cv[0]
            ci, cv = _axpy_merge(ci, cv, stor_i[owner], stor_v[owner], c, p)
            if keep_combos:
                ki, kv = _axpy_merge(ki, kv, comb_i[owner], comb_v[owner], c, p)
            if stored + ci.size > max_entries:
                status = OVER_BUDGET
                break
        if status != OK:
            break
        if ci.size == 0 and track_kernel:
            ker_i.append(ki)
            ker_v.append(kv)
            ker_cols[nker] = j
            nker += 1
            stored += ki.size

    # flatten pivot columns
    tot = 0
    for t in range(npiv):
        tot += stor_i[t].size
    s_ptr = np.zeros(npiv + 1, np.int64)
    s_idx = np.empty(tot, np.int64)
    s_val = np.empty(tot, np.int64)
    pos = 0
    for t in range(npiv):
        a = stor_i[t]
        b = stor_v[t]
        for q in range(a.size):
            s_idx[pos] = a[q]
            s_val[pos] = b[q]
            pos += 1
        s_ptr[t + 1] = pos

    # flatten pivot combos
    if track_combo:
        tot = 0
        for t in range(npiv):
            tot += comb_i[t].size
        c_ptr = np.zeros(npiv + 1, np.int64)
        c_idx = np.empty(tot, np.int64)
        c_val = np.empty(tot, np.int64)
        pos = 0
        for t in range(npiv):
            a = comb_i[t]
            b = comb_v[t]
            for q in range(a.size):
                c_idx[pos] = a[q]
                c_val[pos] = b[q]
                pos += 1
            c_ptr[t + 1] = pos
    else:
        c_ptr = np.zeros(1, np.int64)
        c_idx = np.empty(0, np.int64)
        c_val = np.empty(0, np.int64)

    # flatten kernel combos
    tot = 0
    for t in range(nker):
        tot += ker_i[t].size
    k_ptr = np.zeros(nker + 1, np.int64)
    k_idx = np.empty(tot, np.int64)
    k_val = np.empty(tot, np.int64)
    pos = 0
    for t in range(nker):
        a = ker_i[t]
        b = ker_v[t]
        for q in range(a.size):
            k_idx[pos] = a[q]
            k_val[pos] = b[q]
            pos += 1
        k_ptr[t + 1] = pos

    return (
        status,
        piv_rows[:npiv].copy(),
        piv_cols[:npiv].copy(),
        pivot_owner,
        s_ptr,
        s_idx,
        s_val,
        c_ptr,
        c_idx,
        c_val,
        ker_cols[:nker].copy(),
        k_ptr,
        k_idx,
        k_val,
    )


@njit(cache=True)
def _reduce_against(ci, cv, pivot_owner, s_ptr, s_idx, s_val, p, want_combo, npiv):
    """Reduce one column against a frozen echelon; returns residual and the
    coefficient taken on each pivot (dense over pivot slots if want_combo)."""
    coeffs = np.zeros(npiv if want_combo else 0, np.int64)
    while ci.size > 0:
        owner = pivot_owner[ci[0]]
        if owner == -1:
            break
        c = cv[0]
        if want_combo:
            coeffs[owner] = c
        ci, cv = _axpy_merge(
            ci, cv, s_idx[s_ptr[owner]:s_ptr[owner + 1]], s_val[s_ptr[owner]:s_ptr[owner + 1]], c, p
        )
    return ci, cv, coeffs


@njit(cache=True)
def _dense_echelon(a, p, inv):
    """Row-reduce a dense int64 matrix in place; returns pivot (row, col) lists.

    Leftmost pivot column first, smallest row index breaking ties.
    """
    nrows, ncols = a.shape
    piv_rows = np.empty(min(nrows, ncols), np.int64)
    piv_cols = np.empty(min(nrows, ncols), np.int64)
    npiv = 0
    r = 0
    for c in range(ncols):
        sel = -1
        for i in range(r, nrows):
            if a[i, c] != 0:
                sel = i
                break
        if sel == -1:
            continue
        if sel != r:
            for t in range(ncols):
                tmp = a[r, t]
                a[r, t] = a[sel, t]
                a[sel, t] = tmp
        f = inv[a[r, c]]
        if f != 1:
            for t in range(c, ncols):
                a[r, t] = (a[r, t] * f) % p
        for i in range(nrows):
            if i != r and a[i, c] != 0:
                m = a[i, c]
                for t in range(c, ncols):
                    a[i, t] = (a[i, t] - m * a[r, t]) % p
        piv_rows[npiv] = r
        piv_cols[npiv] = c
        npiv += 1
        r += 1
        if r == nrows:
            break
    return piv_rows[:npiv].copy(), piv_cols[:npiv].copy()
