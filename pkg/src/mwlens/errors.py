"""Exception and warning types shared across the package."""


class MwlensError(Exception):
    """Base class for all package errors."""


class ConfigError(MwlensError):
    """A scenario configuration is invalid or inconsistent."""


class UnderResolvedError(MwlensError):
    """The grid cannot faithfully represent a requested feature or phase."""


class SupportError(MwlensError):
    """An envelope would not fit inside the safe region of the window."""


class GridMismatchError(MwlensError):
    """Two envelopes that must share a grid do not."""


class BackwardPropagationError(MwlensError):
    """Negative propagation time requested without allow_backward."""


class ContextMismatchError(MwlensError):
    """An object was built for a different physical context."""


class SlowWaveError(MwlensError):
    """The requested mode phase velocity is not below c."""


class ImageAtInfinityError(MwlensError):
    """Object placed at the focal distance; no finite image exists."""


class LensRequiredError(MwlensError):
    """An imaging design was requested with no focusing power."""


class FocalLengthMismatchError(MwlensError):
    """Lens and imaging design disagree on the focal length."""


class UnattainableWidthError(MwlensError):
    """No input width disperses to the requested width at the lens plane."""


class AliasingWarning(UserWarning):
    """Envelope mass has leaked outside the central half of the window."""
