"""Exception hierarchy shared across the package."""


class WavefuseError(Exception):
    """Base class for every error raised by wavefuse."""


class DataError(WavefuseError):
    """Bad input data: files, dimensions, dataset layout."""


class ImageFormatError(DataError):
    """A PGM file could not be parsed."""

    def __init__(self, message, offset=None, field=None):
        self.offset = offset
        self.field = field
        super().__init__(message)


class UnsupportedFormatError(ImageFormatError):
    pass


class TruncatedImageError(ImageFormatError):
    pass


class DimensionMismatchError(DataError):
    pass


class LevelCapacityError(DataError):
    """Image too small for the requested number of decomposition levels."""

    def __init__(self, level, dims):
        self.level = level
        self.dims = dims
        super().__init__(
            f"cannot decompose at level {level}: input dims {dims[0]}x{dims[1]} too small"
        )


class UnknownWaveletError(WavefuseError):
    pass


class PyramidStructureError(DataError):
    """Pyramid fields disagree (mismatched pair or broken dims chain)."""


class DatasetError(DataError):
    pass


class RankError(WavefuseError):
    def __init__(self, rank, message=None):
        self.rank = rank
        super().__init__(message or f"sample set has rank {rank}")


class ConvergenceError(WavefuseError):
    pass


class DivergenceError(WavefuseError):
    """Non-finite parameters appeared during training."""

    def __init__(self, epoch):
        self.epoch = epoch
        super().__init__(f"training diverged: non-finite parameters after epoch {epoch}")


class SchemaError(DataError):
    pass


class VersionError(SchemaError):
    def __init__(self, found, expected):
        self.found = found
        self.expected = expected
        super().__init__(f"document version {found!r} does not match supported version {expected!r}")
