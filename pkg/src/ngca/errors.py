"""Exception types raised across the package."""


class NgcaError(Exception):
    pass


class EmptyInput(NgcaError, ValueError):
    pass


class DimensionMismatch(NgcaError, ValueError):
    pass


# subspace_distance callers historically caught this name
DimMismatch = DimensionMismatch


class UnequalRank(NgcaError, ValueError):
    pass


class RankDeficient(NgcaError, ValueError):
    pass


class DegenerateStep(NgcaError, ArithmeticError):
    pass


class SingularCovariance(NgcaError, ValueError):
    pass


class MomentGapTooSmall(NgcaError, ValueError):
    pass


class AllSamplesTruncated(NgcaError, ValueError):
    pass


class VarianceOutOfRange(NgcaError, ValueError):
    pass


class QuadratureNonconvergent(NgcaError, ArithmeticError):
    pass


class NotIsotropic(NgcaError, ValueError):
    pass


class ConfigInvalid(NgcaError, ValueError):
    def __init__(self, message, key_path=()):
        self.key_path = tuple(key_path)
        where = "/".join(str(k) for k in self.key_path) or "<root>"
        super().__init__(f"{where}: {message}")


class ParseError(NgcaError, ValueError):
    def __init__(self, message, row, col):
        self.row = row
        self.col = col
        super().__init__(f"row {row}, col {col}: {message}")
