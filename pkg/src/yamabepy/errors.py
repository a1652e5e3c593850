"""
Exceptions raised by yamabepy.

Everything derives from YamabeError so callers (and the command line front end) can separate
configuration problems from numerical failures.
"""


class YamabeError(Exception):
    "Base class for all yamabepy errors"


class DomainError(YamabeError):
    "Evaluation requested outside the region where a chart or profile is valid"


class BoundaryMarginError(DomainError):
    "Point is closer to the chart boundary than the finite-difference stencil allows"


class SingularWindowError(DomainError):
    "Requested r-window touches a zero of the warping function"


class DegenerateMetricError(YamabeError):
    "Metric matrix failed to factorize as symmetric positive definite"


class DimensionError(YamabeError, ValueError):
    "Operation is not defined in the requested dimension"


class SingularSampleError(YamabeError, ZeroDivisionError):
    "Warping sample with phi == 0 passed to a closed-form expression"


class SingularStateError(YamabeError, ZeroDivisionError):
    "Profile state with phi == 0; the origin must be handled by the series expansion"


class InsufficientFiberDataError(YamabeError):
    "Fiber only carries its scalar curvature, tensor data was requested"


class NoSmoothClosingError(YamabeError, ValueError):
    "Fiber cannot close up smoothly at a critical point (requires a round sphere)"


class IntegrationError(YamabeError):
    "The profile integrator failed"


class StiffnessError(IntegrationError):
    "Adaptive step size underflowed"


class ConfigError(YamabeError, ValueError):
    "Invalid limits or run configuration"


class ProfileInputError(YamabeError, ValueError):
    "Profile is empty or malformed"


class UnknownCheckError(YamabeError, ValueError):
    "Verification check name not in the catalog"
