"""Exact cohomology of Frobenius kernels over prime fields.

Everything is computed with exact arithmetic in GF(p).  The package is
organized around finite-dimensional Hopf algebras given by structure
constants (coordinate rings of infinitesimal group schemes), their
comodules, and explicit cochain-level constructions: Hochschild complexes
with cup products, bicomplexes with pinned sign conventions, divided and
symmetric power functors, reduced bar constructions, and the spectral
sequence of a kernel tower.
"""

__version__ = "0.1.0"

from .config import BudgetError, Budgets, InvariantError, budget_override, budgets
from .linalg import (
    Echelon,
    FieldElem,
    SparseMatrix,
    Subspace,
    Vec,
    quotient_basis,
    rank,
    rank_kernel_image,
    solve,
)

__all__ = [
    "BudgetError",
    "Budgets",
    "InvariantError",
    "budget_override",
    "budgets",
    "Echelon",
    "FieldElem",
    "SparseMatrix",
    "Subspace",
    "Vec",
    "quotient_basis",
    "rank",
    "rank_kernel_image",
    "solve",
    "__version__",
]
