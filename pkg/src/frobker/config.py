"""Budget configuration and engine-wide error types.

Budgets keep every computation at desk scale: a single sparse object may
hold at most ``max_nnz`` stored entries, Hopf algebras are capped at
``max_hopf_dim`` basis elements and enumerated cochain spaces at
``max_space_dim`` slots.  All three can be raised explicitly (CLI
``--budget``, environment variables, or :func:`budget_override`); they
exist to turn runaway jobs into clean errors instead of swap storms.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from dataclasses import dataclass, replace


class BudgetError(Exception):
    """A computation would exceed the configured desk-scale budget."""


class InvariantError(Exception):
    """An internal structural identity failed (always a bug)."""


@dataclass(frozen=True)
class Budgets:
    max_nnz: int = 10_000_000
    max_hopf_dim: int = 4096
    max_space_dim: int = 10_000_000


def _from_env() -> Budgets:
    b = Budgets()
    for field, env in (
        ("max_nnz", "FROBKER_MAX_NNZ"),
        ("max_hopf_dim", "FROBKER_MAX_HOPF_DIM"),
        ("max_space_dim", "FROBKER_MAX_SPACE_DIM"),
    ):
        raw = os.environ.get(env)
        if raw is not None:
            b = replace(b, **{field: int(raw)})
    return b


_current = _from_env()


def budgets() -> Budgets:
    """The currently active budget set."""
    return _current


def set_budgets(b: Budgets) -> None:
    global _current
    _current = b


@contextmanager
def budget_override(**kwargs):
    """Temporarily replace budget fields, e.g. ``budget_override(max_nnz=10**8)``."""
    global _current
    old = _current
    _current = replace(old, **kwargs)
    try:
        yield _current
    finally:
        _current = old


def check_nnz(n: int, what: str = "sparse object") -> None:
    if n > _current.max_nnz:
        raise BudgetError(
            f"{what} needs {n} stored entries, over the budget of "
            f"{_current.max_nnz}; raise it with --budget or FROBKER_MAX_NNZ"
        )


def check_space(dim: int, what: str = "enumerated space") -> None:
    if dim > _current.max_space_dim:
        raise BudgetError(
            f"{what} has dimension {dim}, over the budget of "
            f"{_current.max_space_dim}; raise FROBKER_MAX_SPACE_DIM to allow it"
        )


def check_hopf_dim(dim: int) -> None:
    if dim > _current.max_hopf_dim:
        raise BudgetError(
            f"Hopf algebra of dimension {dim} is over the budget of "
            f"{_current.max_hopf_dim}; raise FROBKER_MAX_HOPF_DIM to allow it"
        )
