"""Eigenvalues with positive real part of sparse pencils ``J z = lambda L z``.

``L`` is diagonal and singular.  The package provides a complex sparse LU,
Cayley and Moebius operators that each cost one factorized solve, two
shift-invert searches with shift updates (the second with Moebius
inhibition of eigenvalues already found), a Rayleigh-Ritz subspace
iteration for comparison, and a dense QR oracle for small problems.
"""

from .dense_eig import eigen, match_eigenvalues, ritz_decompose
from .eigensolvers import (
    ConvergenceRecord,
    IterationConfig,
    algorithm_one,
    algorithm_two,
    dedupe,
    subspace_iteration,
)
from .errors import (
    DegenerateShift,
    MobiusEigError,
    RankDeficientBasis,
    SingularJ4,
    SingularShift,
)
from .mobius import (
    INF,
    CayleyOperator,
    FactorizationCache,
    MobiusOperator,
    MobiusParams,
    cayley_map,
    inverse_cayley_image,
    mobius_inverse_map,
    mobius_map,
    optimal_sigma,
    recover_lambda,
)
from .pencil import Pencil, read_l_diag, write_l_diag
from .report import SpectrumReport, check_report
from .sparse_core import SparseMatrix, factorize, read_matrix_market, write_matrix_market
from .synth import PlantSpec, planted_pencil

__version__ = "0.1.0"

__all__ = [
    "INF",
    "CayleyOperator",
    "ConvergenceRecord",
    "DegenerateShift",
    "FactorizationCache",
    "IterationConfig",
    "MobiusEigError",
    "MobiusOperator",
    "MobiusParams",
    "Pencil",
    "PlantSpec",
    "RankDeficientBasis",
    "SingularJ4",
    "SingularShift",
    "SparseMatrix",
    "SpectrumReport",
    "algorithm_one",
    "algorithm_two",
    "cayley_map",
    "check_report",
    "dedupe",
    "eigen",
    "factorize",
    "inverse_cayley_image",
    "match_eigenvalues",
    "mobius_inverse_map",
    "mobius_map",
    "optimal_sigma",
    "planted_pencil",
    "read_l_diag",
    "read_matrix_market",
    "recover_lambda",
    "ritz_decompose",
    "subspace_iteration",
    "write_l_diag",
    "write_matrix_market",
]
