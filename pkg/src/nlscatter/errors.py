"""Exception and warning types raised by nlscatter."""


class NLScatterError(Exception):
    """Base class for all package errors."""


class DomainError(NLScatterError, ValueError):
    """A symbol was evaluated outside its domain."""


class MonotonicityError(NLScatterError, ValueError):
    """Requested cone mode does not match the certified envelope monotonicity."""


class AnnulusError(NLScatterError, ValueError):
    """Invalid annulus / packet parameters."""


class AnnulusOutsideGridError(AnnulusError):
    """The annulus reaches beyond the largest resolvable frequency."""


class ConeExceedsBoxError(NLScatterError, ValueError):
    """A cone radius ``speed * t`` does not fit inside the periodic box."""


class GridMismatchError(NLScatterError, ValueError):
    pass


class GridTooLargeError(NLScatterError, MemoryError):
    pass


class ExponentRangeError(NLScatterError, ValueError):
    """Potential decay exponent outside the range allowed by its family."""


class FamilyError(NLScatterError, ValueError):
    """Operation needs a potential of a different family."""


class StepSizeError(NLScatterError, ValueError):
    """Splitting step violates the phase-per-step bound."""


class SymbolSingularityError(NLScatterError, ValueError):
    """Packet carries Fourier mass where the symbol is undefined."""


class ShellTooThinError(NLScatterError, ValueError):
    pass


class InsufficientSamplesError(NLScatterError, ValueError):
    pass


class CalibrationError(NLScatterError, RuntimeError):
    pass


class PacketFormatError(NLScatterError, ValueError):
    """Malformed packet file."""


class ConfigError(NLScatterError, ValueError):
    """Experiment configuration failed validation.

    ``field`` is the dotted path of the offending entry.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DegenerateThresholdWarning(UserWarning):
    """Cone threshold is zero (flat envelope somewhere in the band)."""


class TruncationWarning(UserWarning):
    """Packet tails at half the box length exceed the truncation tolerance."""


class BoxBoundaryWarning(UserWarning):
    """Evolved state carries noticeable mass near the box boundary."""
