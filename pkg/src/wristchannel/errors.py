"""Exception types raised across the toolkit."""


class WristChannelError(Exception):
    """Base class for all toolkit errors."""


# --- gesture synthesis ---------------------------------------------------

class UnknownSymbol(WristChannelError):
    """Symbol is not in the configured alphabet."""


class InvalidDuration(WristChannelError):
    """Requested trace duration is not positive."""


class EmptyAlphabet(WristChannelError):
    """A training set was requested for an empty symbol set."""


# --- protocol decoding ---------------------------------------------------

class EmptyCalibration(WristChannelError):
    """Threshold calibration needs at least one non-empty pause trace."""


class AmbiguousRun(WristChannelError):
    """A still run fell strictly between the closing and opening windows."""


class UnterminatedSymbol(WristChannelError):
    """Trace ended while capturing a symbol (no closing pause seen)."""


# --- feature extraction --------------------------------------------------

class SeriesTooShort(WristChannelError):
    """Series is below the minimum length for feature extraction."""


class EmptyDataset(WristChannelError):
    """Operation requires a non-empty dataset."""


# --- learning ------------------------------------------------------------

class DegenerateLabels(WristChannelError):
    """Training requires at least two distinct classes."""


class ShapeMismatch(WristChannelError):
    """Input dimension does not match the model."""


class TooFewPoints(WristChannelError):
    """Fewer points than requested clusters."""


class NoCoverage(WristChannelError):
    """Some cluster contains none of the candidate symbols."""


# --- delivery channels ---------------------------------------------------

class UnknownOption(WristChannelError):
    """Answer option is not one of A/B/C/D."""


class MalformedCluster(WristChannelError):
    """Decoded vibration cluster size is outside 1..4."""


class AmplitudeOutOfRange(WristChannelError):
    """Vibration amplitude outside the supported (0, 250] range."""


# --- outcome model -------------------------------------------------------

class InvalidOptions(WristChannelError):
    """Number of answer options per question must be an integer >= 2."""


class InvalidParams(WristChannelError):
    """Model parameter outside its valid range."""


class DegenerateBaseline(WristChannelError):
    """Clean-option success probability is zero; the boost ratio is undefined."""
