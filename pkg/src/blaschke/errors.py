"""Exception hierarchy shared by every module of the package."""


class GeometryError(Exception):
    """Base class for all errors raised by :mod:`blaschke`."""


class DomainError(GeometryError):
    """A point lies outside the domain of a chart or map."""


class ConfigurationError(GeometryError):
    """An immersion family, block or run configuration is invalid."""


class JetOrderError(GeometryError):
    """A jet is too short for the requested derivative."""


class NumericError(GeometryError):
    """A floating point computation cannot be carried out reliably."""


class ImmersionDegeneracyError(GeometryError):
    """The chart Jacobian is rank deficient."""


class UmbilicPointError(GeometryError):
    """The immersion is umbilic at a point, so the Moebius factor vanishes."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = None if point is None else [float(v) for v in point]


class SymmetryError(GeometryError):
    """A matrix expected to be symmetric is not."""


class ConeViolationError(GeometryError):
    """A transform moves light-cone vectors out of the future cone."""


class ParameterError(GeometryError):
    """LS parameters violate a defining constraint."""


class InfeasibleParametersError(ParameterError):
    """No real B0 triple exists for the given parameters."""


class InternalConsistencyError(ParameterError):
    """Solved quantities fail an identity they must satisfy by construction."""


class IndeterminateMuError(ParameterError):
    """The mu bracket vanishes, so the block weights are undetermined."""


class IncompatibleBlocksError(ParameterError):
    """Block scalar curvatures do not add up to the required total."""


class InfeasibleBlocksError(ParameterError):
    """Block scalar curvatures force a weight outside [0, 1]."""
