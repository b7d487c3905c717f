"""Exception hierarchy shared across the toolkit."""


class KNdSError(Exception):
    """Base class for every error raised by this package."""


class DomainError(KNdSError, ValueError):
    """An argument lies outside the domain of a formula."""


class RegimeError(KNdSError):
    """The parameters do not describe an event + cosmological horizon pair."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NotAHorizon(KNdSError, ValueError):
    pass


class ZeroModeError(KNdSError, ValueError):
    pass


class QuadratureFailure(KNdSError):
    pass


class DiscretizationError(KNdSError):
    pass


class ConvergenceError(KNdSError):
    pass


class TailModelError(KNdSError):
    pass


class ReconstructionError(KNdSError):
    """Failure in one stage of the inverse pipeline.

    ``stage`` names the step that failed so callers (and the CLI) can report it.
    """

    stage = "reconstruct"

    def __init__(self, message, stage=None):
        super().__init__(message)
        if stage is not None:
            self.stage = stage


class DegenerateTraces(ReconstructionError):
    stage = "lambda"


class NonPositiveLambda(ReconstructionError):
    stage = "lambda"


class OutOfRange(ReconstructionError):
    stage = "invert_h"


class InconsistentTraces(ReconstructionError):
    stage = "spin_sq"


class NegativeRadiusSquared(ReconstructionError):
    stage = "radii"


class SingularSystem(ReconstructionError):
    stage = "mass_charge"
