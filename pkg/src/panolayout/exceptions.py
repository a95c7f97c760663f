"""
exceptions.py

Error hierarchy for panolayout. Every failure raised by the library derives from
`PanoLayoutError`. Each subclass carries the process exit code the CLI returns for it
in `exit_code`.
"""


class PanoLayoutError(Exception):
    """Base class for all panolayout failures."""

    exit_code: int = 1


class ConfigurationError(PanoLayoutError):
    """Invalid or inconsistent configuration (unknown provider, bad view ring, ...)."""

    exit_code = 2


class SceneValidationError(PanoLayoutError):
    """A scene, template or wall polygon violates its invariants."""

    exit_code = 3


class DatasetIOError(PanoLayoutError):
    """Reading or writing a run-directory artifact failed."""

    exit_code = 4

    def __init__(self, path, reason: str):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"{self.path}: {reason}")

    def __reduce__(self):
        # worker processes send exceptions back pickled
        return type(self), (self.path, self.reason)


class OutOfFrustumError(PanoLayoutError):
    """A direction lies behind the image plane of a perspective view."""


class NoFloorIntersectionError(PanoLayoutError):
    """A camera ray at or above the horizon never meets the floor."""


class EmptyCloudError(PanoLayoutError):
    """A perspective view produced no floor-boundary points."""


class UnderConstrainedError(PanoLayoutError):
    """Too few correspondences to fix the relative scale of two views."""


class DegenerateLayoutError(PanoLayoutError):
    """Fitted wall lines cannot be closed into a Manhattan polygon."""


class DescriptorSizeError(PanoLayoutError):
    """Image too small for the 4x4 HOG grid."""


class LibrarySizeError(PanoLayoutError):
    """Rendered library smaller than the requested neighbour count."""


class InstanceTooLargeError(PanoLayoutError):
    """Labeling space too large for exhaustive enumeration."""


class DegenerateMaskError(PanoLayoutError):
    """The joint mask leaves no pixel to compare."""


class UnknownModelError(PanoLayoutError, LookupError):
    """Model id absent from the model library."""
