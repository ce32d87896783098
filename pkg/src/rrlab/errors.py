"""Exception hierarchy shared across the package.

Every domain failure raises an RRLabError subclass so the CLI can map them
to exit code 1 while genuine bugs (anything else) propagate as tracebacks.
"""


class RRLabError(Exception):
    """Base class for all expected domain errors."""


class GenerationExhaustedError(RRLabError):
    """Rejection sampling failed too many times in a row while generating programs."""


class NoViableMutationError(RRLabError):
    """No mutation operator/site produced an observable bug for this program."""


class CannotExposeBugError(RRLabError):
    """No probe input distinguishes the buggy program from the fixed one."""


class SchemaViolationError(RRLabError):
    """A corpus file line does not match the record schema."""

    def __init__(self, path: str, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = path
        self.line_no = line_no
        self.reason = reason


class VocabSizeError(RRLabError):
    """Requested vocabulary size cannot hold the specials plus the alphabet."""


class BuggyTooLongError(RRLabError):
    """Encoded buggy text alone exceeds the model input budget."""


class UnknownIdError(RRLabError):
    """A token id is outside the vocabulary."""


class InvalidConfigError(RRLabError):
    """A model or training configuration violates its invariants."""


class ShapeMismatchError(RRLabError):
    """Array shapes do not match the model configuration."""


class StaleCacheError(RRLabError):
    """backward() was called with activations cached for different parameters."""


class NonFiniteGradientError(RRLabError):
    """A gradient contains NaN/Inf; the update was refused."""


class RewardConfigError(RRLabError):
    """A reward scaling configuration violates its ordering/domain constraints."""


class CheckpointError(RRLabError):
    """Base for checkpoint load/save failures."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint format version or vocabulary hash does not match."""


class CorruptCheckpointError(CheckpointError):
    """Checkpoint file is truncated or malformed."""

    def __init__(self, path: str, offset: int, reason: str):
        super().__init__(f"{path} @ byte {offset}: {reason}")
        self.path = path
        self.offset = offset
        self.reason = reason


class VocabMismatchError(CheckpointVersionError):
    """A checkpoint was trained with a different vocabulary."""


class ConfigFileError(RRLabError):
    """The global config file is malformed or holds unknown keys."""


class ConfigMismatchError(RRLabError):
    """Two checkpoints disagree on model config or vocabulary in an ablation."""
