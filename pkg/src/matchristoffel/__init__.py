"""
Matrix bi-orthogonal polynomials on the real line, their Christoffel
transformations by matrix polynomials, and the multicomponent Toda flows.
"""

from .biorth import (
    BiorthogonalSystem, abc_kernel, build_biorthogonal, build_biorthogonal_in_basis, cd_formula_residual,
    cd_kernel, quasidet_polynomial,
)
from .blockmat import BlockMatrix, GaussBorelFactorization, gauss_borel_factorize, last_quasideterminant
from .christoffel import (
    ConnectionData, TransformResult, UnimodularResult, christoffel_transform, connection_matrices,
    degree_one_transform, perturbed_cd_relation_check, singular_unimodular_transform, unimodular_resolvent,
    unimodular_weight,
)
from .errors import MatChristoffelError
from .matpoly import (
    Eigenvalue, MatrixPolynomial, SpectralData, companion_matrix, evaluate, evaluate_at_matrix, jordan_chains,
    spectrum,
)
from .measures import MatrixMeasure, moment_matrix, moments, perturbed_moment_matrix
from .toda import TodaTimes, evolve_measure, lax_matrices, toda_residual

__version__ = "0.1.0"

__all__ = [
    "BiorthogonalSystem", "BlockMatrix", "ConnectionData", "Eigenvalue", "GaussBorelFactorization",
    "MatChristoffelError", "MatrixMeasure", "MatrixPolynomial", "SpectralData", "TodaTimes", "TransformResult",
    "UnimodularResult", "abc_kernel", "build_biorthogonal", "build_biorthogonal_in_basis", "cd_formula_residual",
    "cd_kernel", "christoffel_transform", "companion_matrix", "connection_matrices", "degree_one_transform",
    "evaluate", "evaluate_at_matrix", "evolve_measure", "gauss_borel_factorize", "jordan_chains",
    "last_quasideterminant", "lax_matrices", "moment_matrix", "moments", "perturbed_cd_relation_check",
    "perturbed_moment_matrix", "quasidet_polynomial", "singular_unimodular_transform", "spectrum",
    "toda_residual", "unimodular_resolvent", "unimodular_weight",
]
