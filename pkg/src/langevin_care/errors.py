"""Exception hierarchy shared across the package."""


class LangevinCareError(Exception):
    """Base class for all package errors."""


class InvalidInput(LangevinCareError, ValueError):
    pass


class GenerationError(LangevinCareError):
    """Noise sample paths could not be generated."""


class UnsupportedModel(LangevinCareError):
    pass


class QuadratureError(LangevinCareError):
    """A numerical integral did not reach the requested tolerance."""


class NoSolution(LangevinCareError):
    """No stabilising positive semidefinite Riccati solution was found."""


class DiagnosticUnavailable(LangevinCareError):
    pass


class NotStable(LangevinCareError):
    pass


class WindowSelectionFailed(LangevinCareError):
    pass


class TailNotIntegrable(LangevinCareError):
    pass
