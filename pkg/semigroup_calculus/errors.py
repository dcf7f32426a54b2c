"""Exception and warning types raised by the semigroup calculus library."""


class SemigroupError(ValueError):
    """Root of every domain error; the CLI maps it to exit code 1."""


class ConfigError(SemigroupError):
    pass


class GridError(SemigroupError):
    pass


class WeightDivergenceError(SemigroupError):
    pass


class DivergentTailError(SemigroupError):
    pass


class BackendError(SemigroupError):
    pass


class AbscissaError(SemigroupError):
    pass


class SingularContinuationError(SemigroupError):
    pass


class DefectiveMatrixError(SemigroupError):
    pass


class ExpressionSyntaxError(SemigroupError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownIdentifierError(ExpressionSyntaxError):
    pass


class HalfPlaneError(SemigroupError):
    pass


class AliasingError(SemigroupError):
    pass


class OuterFunctionError(SemigroupError):
    pass


class RadicalQuotientError(SemigroupError):
    """The denominator of a fraction is singular because the image algebra is radical."""


class TruncationWarning(UserWarning):
    pass


class NonDiagonalizableWarning(UserWarning):
    pass
