"""Exception taxonomy shared across the toolkit."""


class SrsadError(Exception):
    """Base class for all toolkit errors."""


class InvalidInput(SrsadError):
    """Input data violates an operation's preconditions."""


class InvalidConfig(SrsadError):
    """A configuration object violates its invariants."""


class InvalidShape(SrsadError):
    """Array arguments have inconsistent shapes."""


class DegenerateInterferer(SrsadError):
    """Interferer carries no power, so no SNR gain exists."""


class Unmeasurable(SrsadError):
    """Loudness gating removed every block; no loudness value exists."""


class IncompatibleWeights(SrsadError):
    """Weight store does not match the model or feature configuration."""


class InputTooShort(SrsadError):
    """Audio is too short for the model's temporal stride."""


class CorruptWeights(SrsadError):
    """Weight file is truncated, malformed, or self-inconsistent."""


class TrainingDiverged(SrsadError):
    """Loss became non-finite during training."""


class ManifestInconsistent(SrsadError):
    """Corpus manifest violates pairing, duration, or split constraints."""


class DegenerateClassDistribution(SrsadError):
    """Metric input lacks at least one positive or one negative frame."""
