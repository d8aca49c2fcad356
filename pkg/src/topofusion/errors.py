"""Exception types shared across the pipeline."""


class TopofusionError(Exception):
    """Base class for all library errors."""


class EmptyPointCloud(TopofusionError):
    """No pixel cleared the foreground threshold."""


class InvalidSize(TopofusionError):
    """Requested image size is below the supported minimum."""


class TooLarge(TopofusionError):
    """Input exceeds the guard limit of the brute-force oracle."""


class ShapeMismatch(TopofusionError):
    """Tensor or image shapes are incompatible for the requested operation."""


class SizeMismatch(TopofusionError):
    """Persistence images differ in size where equal sizes are required."""


class NonFiniteValue(TopofusionError):
    """A NaN or infinity appeared where only finite values are allowed."""


class DataError(TopofusionError):
    """A file on disk is malformed or inconsistent with its declared format."""
