"""Exception hierarchy for the pipeline.

Three branches map onto CLI exit codes: ConfigError -> 1, DataError -> 2,
NumericError -> 3.
"""


class PdeegError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(PdeegError):
    """Invalid configuration or usage."""


class DataError(PdeegError):
    """Malformed, missing, or unusable input data."""


class NumericError(PdeegError):
    """A numeric procedure failed (non-convergence, degenerate spectrum)."""


# --- bdf ---------------------------------------------------------------

class BadMagic(DataError):
    """File does not start with the BDF identification bytes."""


class TruncatedHeader(DataError):
    """Byte stream ends before the declared header."""


class NonNumericField(DataError):
    """An ASCII numeric header field failed to parse."""


class TruncatedBody(DataError):
    """Sample payload length disagrees with the header geometry."""


class GainDegenerate(DataError):
    """digital_max equals digital_min; scaling undefined."""


class OutOfRangeSample(DataError):
    """A sample falls outside the requested quantization range."""


class InvalidRecording(DataError):
    """Recording cannot be represented in the container format."""


# --- synth -------------------------------------------------------------

class NyquistViolation(ConfigError):
    """A requested component frequency is at or above half the rate."""


# --- preprocess --------------------------------------------------------

class UnknownChannel(DataError):
    """A requested channel label is not present in the recording."""


class EmptySelection(ConfigError):
    """Channel selection resolved to no channels."""


class UpsampleUnsupported(ConfigError):
    """Target rate above the source rate."""


class InvalidBand(ConfigError):
    """Band edges are not 0 < low < high < rate/2."""


class SignalTooShort(DataError):
    """Signal shorter than the operation requires."""


class AllEpochsDropped(DataError):
    """Every epoch exceeded the peak-to-peak limit."""


# --- spectral ----------------------------------------------------------

class EmptySignal(DataError):
    """Zero-length input signal."""


class SignalShorterThanSegment(DataError):
    """Signal shorter than the analysis segment."""


class ZeroSpectrum(NumericError):
    """Spectrum has no power; normalization undefined."""


# --- wavelet -----------------------------------------------------------

class SeriesTooShort(DataError):
    """Series too short for the requested decomposition or statistic."""


class LengthMismatch(DataError):
    """Coefficient lengths inconsistent with the target length."""


# --- features ----------------------------------------------------------

class EmptyEpoch(DataError):
    """Zero-length epoch."""


class EpochTooShort(DataError):
    """Epoch too short for the statistic."""


class EmptyCohort(DataError):
    """No subjects supplied."""


class InconsistentBands(DataError):
    """Subjects disagree on bands or per-band epoch counts."""


# --- models ------------------------------------------------------------

class SingleClass(DataError):
    """Training labels contain a single class."""


class NoConvergence(NumericError):
    """Optimizer hit its iteration cap before reaching tolerance."""

    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class EmptyTrainingSet(DataError):
    """No training rows."""


class WidthMismatch(DataError):
    """Prediction input width differs from the training width."""


class EmptySpace(ConfigError):
    """Hyperparameter search space is empty."""


# --- eval --------------------------------------------------------------

class KTooLarge(DataError):
    """More folds requested than rows (or groups) available."""


class EmptyConfusion(DataError):
    """Confusion matrix with zero total count."""


class SingleClassTruth(DataError):
    """Curve requested but y_true contains a single class."""


class UnsupportedModel(ConfigError):
    """Operation defined only for tree-ensemble models."""


# --- cli ---------------------------------------------------------------

class MissingArtifact(DataError):
    """A required artifact file is absent."""
