"""Exception hierarchy. The CLI prints the class name as the error kind."""


class AslDigitsError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(AslDigitsError, ValueError):
    pass


class ConstructionError(AslDigitsError, ValueError):
    pass


class NumericError(AslDigitsError, ArithmeticError):
    pass


class FormatError(AslDigitsError, ValueError):
    pass


class UnsupportedDtypeError(FormatError):
    pass


class UnsupportedLayoutError(FormatError):
    pass


class TruncationError(FormatError):
    pass


class PairingError(AslDigitsError, ValueError):
    pass


class LabelError(AslDigitsError, ValueError):
    pass


class NormalizationError(AslDigitsError, ValueError):
    pass


class InputError(AslDigitsError, ValueError):
    pass


class SplitError(AslDigitsError, ValueError):
    pass


class ParameterError(AslDigitsError, ValueError):
    pass


class ArchitectureError(AslDigitsError, ValueError):
    pass


class CheckpointError(AslDigitsError):
    pass


class MissingFileError(CheckpointError, FileNotFoundError):
    pass


class CheckpointMismatchError(CheckpointError, ValueError):
    pass


class ConfigError(AslDigitsError, ValueError):
    pass
