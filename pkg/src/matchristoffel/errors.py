"""Exception types raised by the numerical routines."""


class MatChristoffelError(Exception):
    """Base class; carries the module/operation that failed for structured CLI reports."""

    module = "matchristoffel"
    operation = ""

    def to_dict(self):
        return {
            "module": self.module,
            "operation": self.operation,
            "error": type(self).__name__,
            "message": str(self),
        }


class SingularTruncation(MatChristoffelError):
    module, operation = "blockmat", "gauss_borel_factorize"

    def __init__(self, k, ratio=None):
        self.k = k
        self.ratio = ratio
        msg = f"leading truncation M_[{k}] is numerically singular"
        if ratio is not None:
            msg += f" (pivot sigma_min/sigma_max = {ratio:.3e})"
        super().__init__(msg)


class SingularLeadingBlock(MatChristoffelError):
    module, operation = "blockmat", "last_quasideterminant"


class InsufficientRows(MatChristoffelError):
    module, operation = "blockmat", "apply_poly_shift"


class NotMonic(MatChristoffelError):
    module, operation = "matpoly", "companion_matrix"


class MultiplicityMismatch(MatChristoffelError):
    module, operation = "matpoly", "jordan_chains"


class UnderResolvedQuadrature(MatChristoffelError):
    module, operation = "measures", "moments"


class SingularPi(MatChristoffelError):
    module, operation = "christoffel", "christoffel_transform"

    def __init__(self, k, msg=None):
        self.k = k
        super().__init__(msg or f"Pi_{{{k},N}} is numerically singular")


class DivisionResidual(MatChristoffelError):
    module, operation = "christoffel", "right_divide"


class SingularPA(MatChristoffelError):
    module, operation = "christoffel", "degree_one_transform"


class DegreeWindow(MatChristoffelError):
    module, operation = "christoffel", "connection_matrices"


class DivergentDeformation(MatChristoffelError):
    module, operation = "toda", "evolve_measure"


class ConfigError(MatChristoffelError):
    module, operation = "cli", "run"
