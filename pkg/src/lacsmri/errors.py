"""Exception hierarchy shared by every module."""


class LacsError(Exception):
    """Base class for all errors raised by :mod:`lacsmri`."""


class ConfigError(LacsError, ValueError):
    """An experiment configuration is invalid.

    ``field`` names the first offending configuration key.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class EtaOutOfRange(ConfigError):
    pass


class TooFewLinesPerRound(ConfigError):
    pass


class UnknownCase(ConfigError):
    pass


class NonSquareImage(LacsError, ValueError):
    pass


class DimensionMismatch(LacsError, ValueError):
    pass


class NonPowerOfTwoSize(LacsError, ValueError):
    pass


class AllZeroReference(LacsError, ValueError):
    pass


class GridTooLarge(LacsError, ValueError):
    pass


class SingularDesign(LacsError, ArithmeticError):
    pass


class NotEnoughLines(LacsError, ValueError):
    pass


class EmptyMask(LacsError, ValueError):
    pass


class Diverged(LacsError, ArithmeticError):
    pass


class ZeroReferenceEnergy(LacsError, ArithmeticError):
    pass


class ZeroTruth(LacsError, ValueError):
    pass


class TumorOutOfBounds(LacsError, ValueError):
    pass


class UnsupportedFormat(LacsError, ValueError):
    pass
