"""Exception and warning types shared across the toolkit."""


class HandsteerError(Exception):
    """Base class for all toolkit errors."""


# --- signal ingestion / windowing ---

class NonFiniteInput(HandsteerError):
    """A frame or vector contained NaN or infinity."""


class ZeroNormal(HandsteerError):
    """Palm normal too close to the zero vector to normalize."""


class WrongWindowLength(HandsteerError):
    """A window was built from the wrong number of frames."""


class TooShort(HandsteerError):
    """Signal too short to resample."""


class TargetTooSmall(HandsteerError):
    """Zero-pad target length smaller than the input."""


# --- synthetic generator / scenarios ---

class UnknownPosture(HandsteerError):
    """Scenario referenced a posture label outside the defined set."""


class IllegalTransition(HandsteerError):
    """Scenario chained two postures without passing through GoStraight."""


class BadScenario(HandsteerError):
    """Scenario is structurally invalid (empty, zero duration, ...)."""


# --- dictionary construction ---

class RaggedColumns(HandsteerError):
    """Training columns have inconsistent lengths."""


class EmptyClass(HandsteerError):
    """A declared class has no training columns."""


class ZeroColumn(HandsteerError):
    """A training column has (near-)zero norm and cannot be normalized."""


class SingularGram(HandsteerError):
    """Gram matrix not invertible (lambda zero and rank-deficient columns)."""


class DimensionMismatch(HandsteerError):
    """Vector/matrix dimensions do not agree."""


# --- clustering ---

class TooSmall(HandsteerError):
    """Not enough columns for the requested operation."""


class ClusterTooSmall(HandsteerError):
    """A cluster has fewer columns than the requested sample size."""


# --- training / model assembly ---

class MissingRecording(HandsteerError):
    """A required training recording is absent."""


class ModelFormatError(HandsteerError):
    """Persisted model failed validation (dims or checksum row)."""


# --- streaming service ---

class BadMessage(HandsteerError):
    """Inbound wire message failed schema validation."""


class ModelMissing(HandsteerError):
    """Service asked to open a session without a loaded model."""


# --- warnings (flagged, non-fatal conditions) ---

class NonConvergenceWarning(UserWarning):
    """Iterative solver hit its iteration cap with residuals above tolerance."""


class IsolatedNodeWarning(UserWarning):
    """Affinity graph contained a (near-)zero-degree node."""


class UnnormalizedInputWarning(UserWarning):
    """Matrix columns were expected to be unit-norm but were not."""
