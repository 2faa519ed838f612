"""Exception hierarchy shared by every component."""


class VRCacheError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(VRCacheError, ValueError):
    """Invalid hyperparameters, layouts or experience shapes."""


class ArgumentError(VRCacheError, ValueError):
    pass


class StalenessError(VRCacheError, LookupError):
    """An absolute index refers to an experience that has been evicted."""


class IndexRangeError(VRCacheError, IndexError):
    """An absolute index refers to an experience that does not exist yet."""


class CapacityError(VRCacheError):
    """The replay memory cannot supply enough distinct entries for a cache."""


class FrozenMemoryError(VRCacheError, RuntimeError):
    """A write was attempted while the replay memory was frozen."""


class NumericError(VRCacheError, ArithmeticError):
    pass
