"""Exact arithmetic over GF(p) and sparse linear algebra.

Matrices are immutable, canonically sorted COO triples with values in
[1, p).  Rank, kernel, image, solving and quotients all run through one
deterministic elimination engine (`Echelon`): a left-looking column
echelon with smallest-row-index pivots, JIT-compiled for large inputs and
backed by a dense routine below the 512x512 fallback threshold.  No
floating point anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _elim
from .config import InvariantError, budgets, check_nnz

_DENSE_LIMIT = 512


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def check_prime(p: int) -> int:
    if not is_prime(p) or not 2 <= p <= 97:
        raise ValueError(f"modulus must be a prime in [2, 97], got {p}")
    return p


@lru_cache(maxsize=None)
def inverse_table(p: int) -> np.ndarray:
    """inv[v] = v^-1 mod p for v in [1, p); inv[0] = 0 as a sentinel."""
    check_prime(p)
    inv = np.zeros(p, dtype=np.int64)
    for v in range(1, p):
        inv[v] = pow(v, p - 2, p)
    return inv


@dataclass(frozen=True)
class FieldElem:
    """A residue in GF(p)."""

    value: int
    p: int

    def __post_init__(self):
        check_prime(self.p)
        if not 0 <= self.value < self.p:
            object.__setattr__(self, "value", self.value % self.p)

    def _coerce(self, other) -> "FieldElem":
        if isinstance(other, FieldElem):
            if other.p != self.p:
                raise ValueError("mixed moduli")
            return other
        return FieldElem(int(other) % self.p, self.p)

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElem((self.value + o.value) % self.p, self.p)

    def __sub__(self, other):
        o = self._coerce(other)
        return FieldElem((self.value - o.value) % self.p, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        return FieldElem((self.value * o.value) % self.p, self.p)

    def __neg__(self):
        return FieldElem((-self.value) % self.p, self.p)

    def inverse(self) -> "FieldElem":
        if self.value == 0:
            raise ZeroDivisionError("0 has no inverse in GF(p)")
        return FieldElem(pow(self.value, self.p - 2, self.p), self.p)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __bool__(self):
        return self.value != 0


def _as_int64(a) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(a, dtype=np.int64))


class Vec:
    """Sparse vector over GF(p): sorted indices, values in [1, p)."""

    __slots__ = ("dim", "p", "idx", "val")

    def __init__(self, dim: int, p: int, idx=None, val=None, _canonical=False):
        self.dim = int(dim)
        self.p = p
        if idx is None:
            self.idx = np.empty(0, np.int64)
            self.val = np.empty(0, np.int64)
            return
        idx = _as_int64(idx)
        val = _as_int64(val)
        if _canonical:
            self.idx, self.val = idx, val
            return
        val = val % p
        order = np.argsort(idx, kind="stable")
        idx, val = idx[order], val[order]
        if idx.size:
            uniq, start = np.unique(idx, return_index=True)
            sums = np.add.reduceat(val, start) % p if idx.size else val
            keep = sums != 0
            idx, val = uniq[keep], sums[keep]
        if idx.size and (idx[0] < 0 or idx[-1] >= dim):
            raise ValueError("vector index out of range")
        self.idx, self.val = idx, val

    @classmethod
    def unit(cls, dim: int, p: int, i: int, c: int = 1) -> "Vec":
        return cls(dim, p, np.array([i]), np.array([c]))

    @classmethod
    def zero(cls, dim: int, p: int) -> "Vec":
        return cls(dim, p)

    @classmethod
    def from_dense(cls, arr, p: int) -> "Vec":
        arr = _as_int64(arr) % p
        idx = np.nonzero(arr)[0]
        return cls(arr.size, p, idx, arr[idx], _canonical=True)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim, np.int64)
        out[self.idx] = self.val
        return out

    @property
    def nnz(self) -> int:
        return self.idx.size

    def is_zero(self) -> bool:
        return self.idx.size == 0

    def scaled(self, c: int) -> "Vec":
        c = c % self.p
        if c == 0:
            return Vec.zero(self.dim, self.p)
        return Vec(self.dim, self.p, self.idx, (self.val * c) % self.p, _canonical=True)

    def __add__(self, other: "Vec") -> "Vec":
        if self.dim != other.dim or self.p != other.p:
            raise ValueError("vector shape/field mismatch")
        return Vec(
            self.dim,
            self.p,
            np.concatenate([self.idx, other.idx]),
            np.concatenate([self.val, other.val]),
        )

    def __sub__(self, other: "Vec") -> "Vec":
        return self + other.scaled(self.p - 1)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Vec)
            and self.dim == other.dim
            and self.p == other.p
            and np.array_equal(self.idx, other.idx)
            and np.array_equal(self.val, other.val)
        )

    def __hash__(self):
        return hash((self.dim, self.p, self.idx.tobytes(), self.val.tobytes()))

    def __repr__(self):
        pairs = ", ".join(f"{i}:{v}" for i, v in zip(self.idx[:8], self.val[:8]))
        more = "..." if self.nnz > 8 else ""
        return f"Vec(dim={self.dim}, p={self.p}, {{{pairs}{more}}})"


def vec_sum(vectors: Sequence[Vec], coeffs: Optional[Sequence[int]] = None) -> Vec:
    """Linear combination of sparse vectors (single accumulation pass)."""
    if not vectors:
        raise ValueError("empty sum needs an explicit zero")
    dim, p = vectors[0].dim, vectors[0].p
    if coeffs is None:
        idx = np.concatenate([v.idx for v in vectors])
        val = np.concatenate([v.val for v in vectors])
    else:
        idx = np.concatenate([v.idx for v in vectors])
        val = np.concatenate([(v.val * (c % p)) % p for v, c in zip(vectors, coeffs)])
    return Vec(dim, p, idx, val)


class SparseMatrix:
    """Immutable sparse matrix over GF(p) in canonical sorted COO form."""

    __slots__ = ("rows", "cols", "p", "row", "col", "val")

    def __init__(self, rows: int, cols: int, p: int, row=None, col=None, val=None, _canonical=False):
        check_prime(p)
        self.rows = int(rows)
        self.cols = int(cols)
        self.p = p
        if row is None:
            row = np.empty(0, np.int64)
            col = np.empty(0, np.int64)
            val = np.empty(0, np.int64)
            _canonical = True
        row, col, val = _as_int64(row), _as_int64(col), _as_int64(val)
        if not _canonical:
            val = val % p
            if row.size:
                if row.min() < 0 or row.max() >= rows or col.min() < 0 or col.max() >= cols:
                    raise ValueError("matrix index out of range")
                key = row * self.cols + col
                order = np.argsort(key, kind="stable")
                key, val = key[order], val[order]
                uniq, start = np.unique(key, return_index=True)
                sums = np.add.reduceat(val, start) % p
                keep = sums != 0
                uniq, val = uniq[keep], sums[keep]
                row, col = uniq // self.cols, uniq % self.cols
        check_nnz(row.size, "matrix")
        self.row, self.col, self.val = row, col, val

    # -- constructors -------------------------------------------------

    @classmethod
    def from_triples(cls, rows: int, cols: int, p: int, triples: Iterable[tuple]) -> "SparseMatrix":
        triples = list(triples)
        if not triples:
            return cls(rows, cols, p)
        r, c, v = zip(*triples)
        return cls(rows, cols, p, r, c, v)

    @classmethod
    def from_dense(cls, arr, p: int) -> "SparseMatrix":
        arr = _as_int64(arr) % p
        r, c = np.nonzero(arr)
        return cls(arr.shape[0], arr.shape[1], p, r, c, arr[r, c])

    @classmethod
    def identity(cls, n: int, p: int) -> "SparseMatrix":
        rng = np.arange(n, dtype=np.int64)
        return cls(n, n, p, rng, rng, np.ones(n, np.int64), _canonical=True)

    @classmethod
    def zero(cls, rows: int, cols: int, p: int) -> "SparseMatrix":
        return cls(rows, cols, p)

    @classmethod
    def from_rows(cls, vectors: Sequence[Vec], cols: Optional[int] = None, p: Optional[int] = None) -> "SparseMatrix":
        if vectors:
            cols = vectors[0].dim if cols is None else cols
            p = vectors[0].p if p is None else p
        if cols is None or p is None:
            raise ValueError("empty row list needs explicit cols and p")
        row = np.concatenate([np.full(v.nnz, i, np.int64) for i, v in enumerate(vectors)]) if vectors else None
        col = np.concatenate([v.idx for v in vectors]) if vectors else None
        val = np.concatenate([v.val for v in vectors]) if vectors else None
        return cls(len(vectors), cols, p, row, col, val)

    @classmethod
    def from_columns(cls, vectors: Sequence[Vec], rows: Optional[int] = None, p: Optional[int] = None) -> "SparseMatrix":
        return cls.from_rows(vectors, cols=rows, p=p).transpose()

    # -- basic data ---------------------------------------------------

    @property
    def nnz(self) -> int:
        return self.row.size

    @property
    def shape(self) -> tuple:
        return (self.rows, self.cols)

    def to_dense(self) -> np.ndarray:
        check_nnz(self.rows * self.cols, "dense expansion")
        out = np.zeros((self.rows, self.cols), np.int64)
        out[self.row, self.col] = self.val
        return out

    def entry(self, i: int, j: int) -> FieldElem:
        mask = (self.row == i) & (self.col == j)
        hit = np.nonzero(mask)[0]
        return FieldElem(int(self.val[hit[0]]) if hit.size else 0, self.p)

    def row_vec(self, i: int) -> Vec:
        mask = self.row == i
        return Vec(self.cols, self.p, self.col[mask], self.val[mask])

    def col_vec(self, j: int) -> Vec:
        mask = self.col == j
        return Vec(self.rows, self.p, self.row[mask], self.val[mask])

    def row_vecs(self) -> list:
        return [self.row_vec(i) for i in range(self.rows)]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparseMatrix)
            and self.shape == other.shape
            and self.p == other.p
            and np.array_equal(self.row, other.row)
            and np.array_equal(self.col, other.col)
            and np.array_equal(self.val, other.val)
        )

    def __hash__(self):
        return hash((self.shape, self.p, self.row.tobytes(), self.col.tobytes(), self.val.tobytes()))

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols} over GF({self.p}), nnz={self.nnz})"

    # -- algebra ------------------------------------------------------

    def _check_field(self, other: "SparseMatrix"):
        if self.p != other.p:
            raise ValueError("field mismatch")

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        self._check_field(other)
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return SparseMatrix(
            self.rows,
            self.cols,
            self.p,
            np.concatenate([self.row, other.row]),
            np.concatenate([self.col, other.col]),
            np.concatenate([self.val, other.val]),
        )

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        return self + other.scaled(self.p - 1)

    def scaled(self, c: int) -> "SparseMatrix":
        c = c % self.p
        if c == 0:
            return SparseMatrix.zero(self.rows, self.cols, self.p)
        return SparseMatrix(
            self.rows, self.cols, self.p, self.row, self.col, (self.val * c) % self.p, _canonical=True
        )

    def __neg__(self):
        return self.scaled(self.p - 1)

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.cols, self.rows, self.p, self.col, self.row, self.val)

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        self._check_field(other)
        if self.cols != other.rows:
            raise ValueError(f"matmul shape mismatch {self.shape} @ {other.shape}")
        if self.nnz == 0 or other.nnz == 0:
            return SparseMatrix.zero(self.rows, other.cols, self.p)
        # sort self by col, walk matches against other's row-sorted COO
        a_order = np.argsort(self.col, kind="stable")
        a_col = self.col[a_order]
        b_row = other.row  # canonical order is row-major already
        lo = np.searchsorted(b_row, a_col, side="left")
        hi = np.searchsorted(b_row, a_col, side="right")
        counts = hi - lo
        total = int(counts.sum())
        check_nnz(total, "matmul expansion")
        rep_a = np.repeat(np.arange(a_col.size), counts)
        offs = np.concatenate([np.zeros(1, np.int64), np.cumsum(counts)[:-1]])
        b_pos = lo[rep_a] + (np.arange(total) - offs[rep_a])
        out_r = self.row[a_order][rep_a]
        out_c = other.col[b_pos]
        out_v = (self.val[a_order][rep_a] * other.val[b_pos]) % self.p
        return SparseMatrix(self.rows, other.cols, self.p, out_r, out_c, out_v)

    def apply(self, v: Vec) -> Vec:
        """Matrix-vector product m @ v."""
        if v.dim != self.cols or v.p != self.p:
            raise ValueError("apply shape/field mismatch")
        if v.nnz == 0 or self.nnz == 0:
            return Vec.zero(self.rows, self.p)
        order = np.argsort(self.col, kind="stable")
        col_sorted = self.col[order]
        lo = np.searchsorted(col_sorted, v.idx, side="left")
        hi = np.searchsorted(col_sorted, v.idx, side="right")
        counts = hi - lo
        total = int(counts.sum())
        rep = np.repeat(np.arange(v.idx.size), counts)
        offs = np.concatenate([np.zeros(1, np.int64), np.cumsum(counts)[:-1]])
        pos = lo[rep] + (np.arange(total) - offs[rep])
        out_i = self.row[order][pos]
        out_v = (self.val[order][pos] * v.val[rep]) % self.p
        return Vec(self.rows, self.p, out_i, out_v)

    def hstack(self, other: "SparseMatrix") -> "SparseMatrix":
        self._check_field(other)
        if self.rows != other.rows:
            raise ValueError("hstack row mismatch")
        return SparseMatrix(
            self.rows,
            self.cols + other.cols,
            self.p,
            np.concatenate([self.row, other.row]),
            np.concatenate([self.col, other.col + self.cols]),
            np.concatenate([self.val, other.val]),
        )

    def vstack(self, other: "SparseMatrix") -> "SparseMatrix":
        self._check_field(other)
        if self.cols != other.cols:
            raise ValueError("vstack col mismatch")
        return SparseMatrix(
            self.rows + other.rows,
            self.cols,
            self.p,
            np.concatenate([self.row, other.row + self.rows]),
            np.concatenate([self.col, other.col]),
            np.concatenate([self.val, other.val]),
        )

    def is_zero(self) -> bool:
        return self.nnz == 0

    # -- serialization (external interface) ---------------------------

    def to_json_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "p": self.p,
            "entries": [[int(r), int(c), int(v)] for r, c, v in zip(self.row, self.col, self.val)],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SparseMatrix":
        return cls.from_triples(d["rows"], d["cols"], d["p"], [tuple(e) for e in d["entries"]])


@dataclass(frozen=True)
class Subspace:
    """A subspace of GF(p)^ambient_dim given by independent basis rows."""

    ambient_dim: int
    basis: SparseMatrix

    def __post_init__(self):
        if self.basis.cols != self.ambient_dim:
            raise ValueError("basis width must equal ambient dimension")

    @property
    def dim(self) -> int:
        return self.basis.rows

    @property
    def p(self) -> int:
        return self.basis.p

    def vectors(self) -> list:
        return self.basis.row_vecs()

    @classmethod
    def full(cls, n: int, p: int) -> "Subspace":
        return cls(n, SparseMatrix.identity(n, p))

    @classmethod
    def zero(cls, n: int, p: int) -> "Subspace":
        return cls(n, SparseMatrix.zero(0, n, p))

    @classmethod
    def from_vectors(cls, vectors: Sequence[Vec], ambient_dim: int, p: int, check: bool = True) -> "Subspace":
        m = SparseMatrix.from_rows(vectors, cols=ambient_dim, p=p)
        if check and vectors:
            if rank(m) != m.rows:
                raise InvariantError("subspace basis rows are linearly dependent")
        return cls(ambient_dim, m)


class Echelon:
    """Frozen column echelon of a matrix over GF(p).

    Supports membership tests and reductions of further vectors against
    the column space.  Construction is deterministic (columns left to
    right, smallest-row-index pivots), so downstream representatives are
    reproducible.
    """

    __slots__ = (
        "p", "nrows", "ncols", "piv_rows", "piv_cols", "_owner",
        "_s_ptr", "_s_idx", "_s_val", "_c_ptr", "_c_idx", "_c_val",
        "ker_cols", "_k_ptr", "_k_idx", "_k_val", "track_combo",
    )

    def __init__(self, m: SparseMatrix, track_kernel: bool = False, track_combo: bool = False,
                 max_entries: Optional[int] = None):
        self.p = m.p
        self.nrows = m.rows
        self.ncols = m.cols
        self.track_combo = track_combo
        if max_entries is None:
            max_entries = budgets().max_nnz * 4
        # CSC of m (canonical COO is row-major; re-sort by column)
        order = np.lexsort((m.row, m.col))
        col_sorted = m.col[order]
        indptr = np.searchsorted(col_sorted, np.arange(m.cols + 1, dtype=np.int64))
        rowidx = np.ascontiguousarray(m.row[order])
        vals = np.ascontiguousarray(m.val[order])
        inv = inverse_table(self.p)
        (
            status, piv_rows, piv_cols, owner,
            s_ptr, s_idx, s_val, c_ptr, c_idx, c_val,
            ker_cols, k_ptr, k_idx, k_val,
        ) = _elim._echelon_csc(
            indptr, rowidx, vals, m.rows, self.p, inv,
            track_kernel, track_combo, max_entries,
        )
        if status == _elim.OVER_BUDGET:
            from .config import BudgetError

            raise BudgetError("echelon fill-in exceeded the entry budget")
        self.piv_rows = piv_rows
        self.piv_cols = piv_cols
        self._owner = owner
        self._s_ptr, self._s_idx, self._s_val = s_ptr, s_idx, s_val
        self._c_ptr, self._c_idx, self._c_val = c_ptr, c_idx, c_val
        self.ker_cols = ker_cols
        self._k_ptr, self._k_idx, self._k_val = k_ptr, k_idx, k_val

    @property
    def rank(self) -> int:
        return int(self.piv_rows.size)

    def kernel_vectors(self) -> list:
        """Combinations of original columns that vanish (kernel basis)."""
        out = []
        for t in range(self._k_ptr.size - 1):
            sl = slice(self._k_ptr[t], self._k_ptr[t + 1])
            out.append(Vec(self.ncols, self.p, self._k_idx[sl], self._k_val[sl], _canonical=True))
        return out

    def pivot_columns(self) -> np.ndarray:
        """Original column indices that carry pivots, ascending."""
        return np.sort(self.piv_cols)

    def reduce(self, v: Vec, want_combo: bool = False):
        """Residual of v modulo the column space; optionally the pivot coefficients."""
        if v.dim != self.nrows or v.p != self.p:
            raise ValueError("reduce shape/field mismatch")
        ci, cv, coeffs = _elim._reduce_against(
            v.idx.copy(), v.val.copy(), self._owner,
            self._s_ptr, self._s_idx, self._s_val, self.p, want_combo, self.rank,
        )
        res = Vec(self.nrows, self.p, ci, cv, _canonical=True)
        if want_combo:
            return res, coeffs
        return res

    def contains(self, v: Vec) -> bool:
        return self.reduce(v).is_zero()

    def solve(self, b: Vec) -> Optional[Vec]:
        """x with (original matrix) @ x = b, if the echelon tracked combos."""
        if not self.track_combo:
            raise ValueError("echelon was built without combination tracking")
        res, coeffs = self.reduce(b, want_combo=True)
        if not res.is_zero():
            return None
        sel = np.nonzero(coeffs)[0]
        if sel.size == 0:
            return Vec.zero(self.ncols, self.p)
        parts_i = []
        parts_v = []
        for t in sel:
            sl = slice(self._c_ptr[t], self._c_ptr[t + 1])
            parts_i.append(self._c_idx[sl])
            parts_v.append((self._c_val[sl] * coeffs[t]) % self.p)
        return Vec(self.ncols, self.p, np.concatenate(parts_i), np.concatenate(parts_v))


def rank(m: SparseMatrix) -> int:
    """Rank over GF(p)."""
    if m.nnz == 0:
        return 0
    if m.rows < _DENSE_LIMIT and m.cols < _DENSE_LIMIT:
        a = m.to_dense()
        pr, _ = _elim._dense_echelon(a, m.p, inverse_table(m.p))
        return int(pr.size)
    return Echelon(m).rank


def rank_kernel_image(m: SparseMatrix):
    """(rank, kernel, image): m @ k = 0 for kernel rows, image = independent columns."""
    ech = Echelon(m, track_kernel=True)
    kernel = Subspace(m.cols, SparseMatrix.from_rows(ech.kernel_vectors(), cols=m.cols, p=m.p))
    piv = ech.pivot_columns()
    image_rows = [m.col_vec(int(j)) for j in piv]
    image = Subspace(m.rows, SparseMatrix.from_rows(image_rows, cols=m.rows, p=m.p))
    return ech.rank, kernel, image


def solve(m: SparseMatrix, b: Vec) -> Optional[Vec]:
    """Some x with m @ x = b, or None when inconsistent."""
    if b.dim != m.rows:
        raise ValueError(f"rhs has dim {b.dim}, expected {m.rows}")
    return Echelon(m, track_combo=True).solve(b)


def quotient_basis(sub: Subspace, ambient: Subspace) -> Subspace:
    """Representatives completing sub to ambient (a basis of ambient/sub).

    Raises InvariantError carrying a witness vector when sub is not
    contained in ambient.
    """
    if sub.ambient_dim != ambient.ambient_dim or sub.p != ambient.p:
        raise ValueError("subspace/ambient shape or field mismatch")
    amb_ech = Echelon(ambient.basis.transpose())
    sub_vecs = sub.vectors()
    for v in sub_vecs:
        if not amb_ech.contains(v):
            raise InvariantError(f"containment violation, witness vector {v!r}")
    reps = []
    # seed an echelon with sub's basis, then insert ambient vectors;
    # the ones that extend the echelon represent the quotient
    combo = _EchelonBuilder(sub.ambient_dim, sub.p)
    for v in sub_vecs:
        combo.insert(v)
    if combo.rank != sub.dim:
        raise InvariantError("subspace basis rows are linearly dependent")
    for v in ambient.vectors():
        if combo.insert(v):
            reps.append(v)
    return Subspace(sub.ambient_dim, SparseMatrix.from_rows(reps, cols=sub.ambient_dim, p=sub.p))


class _EchelonBuilder:
    """Incremental echelon used where vectors arrive one at a time."""

    def __init__(self, dim: int, p: int):
        self.dim = dim
        self.p = p
        self._inv = inverse_table(p)
        self._owner: dict = {}
        self._cols: list = []

    @property
    def rank(self) -> int:
        return len(self._cols)

    def reduce(self, v: Vec) -> Vec:
        ci, cv = v.idx, v.val
        while ci.size:
            owner = self._owner.get(int(ci[0]))
            if owner is None:
                break
            si, sv = self._cols[owner]
            ci, cv = _elim._axpy_merge(ci, cv, si, sv, int(cv[0]), self.p)
        return Vec(self.dim, self.p, ci, cv, _canonical=True)

    def insert(self, v: Vec) -> bool:
        """Reduce v and add the residual as a new pivot; False if dependent."""
        r = self.reduce(v)
        if r.is_zero():
            return False
        f = int(self._inv[r.val[0]])
        val = (r.val * f) % self.p if f != 1 else r.val
        self._owner[int(r.idx[0])] = len(self._cols)
        self._cols.append((r.idx, val))
        return True
