"""Exception types shared across the package."""


class NnquadError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(NnquadError, ValueError):
    """Operands have incompatible shapes; the message names both."""


class ParseError(NnquadError, ValueError):
    """A weight file or config document is not well-formed; the message carries the location."""


class NetworkValidationError(NnquadError, ValueError):
    """A network is structurally invalid; the message names the offending layer."""


class InvalidPartitionError(NnquadError, ValueError):
    """A partition violates its invariants (ordering, endpoint agreement, size)."""


class UnsupportedActivationError(NnquadError, ValueError):
    """The operation only supports a subset of activations (typically ReLU-only paths)."""


class UnsupportedOrderError(NnquadError, ValueError):
    """The requested antiderivative order exceeds what the activation supports."""


class StructureError(NnquadError, ValueError):
    """The network architecture does not fit the requested operation."""


class DomainError(NnquadError, ValueError):
    """Evaluation outside a sampled function's domain."""


class PieceLimitError(NnquadError, RuntimeError):
    """The piece-splitting oracle exceeded its region budget."""


class ToleranceNotMetError(NnquadError, RuntimeError):
    """Adaptive quadrature hit its subdivision floor before meeting the tolerance.

    The best available estimate and its error bound ride along on the exception.
    """

    def __init__(self, message, estimate, achieved):
        super().__init__(message)
        self.estimate = estimate
        self.achieved = achieved


class StiffnessError(NnquadError, RuntimeError):
    """The adaptive ODE stepper underflowed its step size."""


class TrainingDivergedError(NnquadError, RuntimeError):
    """Training loss became non-finite; ``epoch`` records when."""

    def __init__(self, message, epoch):
        super().__init__(message)
        self.epoch = epoch
