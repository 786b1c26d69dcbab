class NewtonForgeError(Exception):
    """Base class for every error raised by newton_forge."""


class GeometryError(NewtonForgeError):
    pass


class DimensionMismatchError(GeometryError):
    pass


class EmptyInputError(GeometryError):
    pass


class ZeroDirectionError(GeometryError):
    pass


class FaceDataUnavailableError(GeometryError):
    """Face lattices are only computed for polytopes of dimension at most 3."""


class NotConvexError(NewtonForgeError):
    pass


class NotHomogeneousError(NewtonForgeError):
    """Raised when a network's sampled values change after its biases are removed."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class NetworkValidationError(NewtonForgeError):
    """
    A network or circuit broke its weight discipline.

    Attributes:
        violations (list): (gate id, rule) pairs.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        summary = "; ".join(f"gate {gate}: {rule}" for gate, rule in self.violations)
        super().__init__(summary or "invalid network")


class ConversionError(NewtonForgeError):
    pass


class NotIsotonicError(NewtonForgeError):
    """Carries the isotonicity witness that blocked a synthesis."""

    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"function is not isotonic: {witness.reason}")


class CertificateError(NewtonForgeError):
    """A mechanical certificate (face test, chain search, ...) failed."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class GameError(NewtonForgeError):
    pass


class SizeGuardError(NewtonForgeError):
    pass


class InputFormatError(NewtonForgeError):
    pass
