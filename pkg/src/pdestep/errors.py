"""Exception taxonomy shared across the package.

Every error raised by the library derives from :class:`PdeStepError` and
carries a short ``category`` string used by the CLI for exit reporting.
"""


class PdeStepError(Exception):
    category = "error"


class ConfigurationError(PdeStepError):
    """Invalid configuration value or combination."""

    category = "config"


class ShapeError(PdeStepError):
    """Array shapes do not match the operation's contract."""

    category = "shape"


class InputError(PdeStepError):
    """Non-finite or otherwise unusable runtime input."""

    category = "input"


class UsageError(PdeStepError):
    """API misuse, e.g. a gradient tape replayed against the wrong model."""

    category = "usage"


class DegenerateDataError(PdeStepError):
    """Division guard: a reference quantity is identically zero."""

    category = "degenerate-data"


class StorageError(PdeStepError):
    category = "storage"


class CrcMismatchError(StorageError):
    category = "storage-crc"


class TruncatedFileError(StorageError):
    category = "storage-truncated"


class UnknownVersionError(StorageError):
    category = "storage-version"


class UnknownArchitectureError(StorageError):
    category = "storage-arch"


class SolverDivergenceError(PdeStepError):
    """Data-generating solver blew up; carries the offending internal step."""

    category = "solver-divergence"

    def __init__(self, message: str, step: int | None = None, time: float | None = None):
        super().__init__(message)
        self.step = step
        self.time = time


class TrainingDivergenceError(PdeStepError):
    """Non-finite loss or gradients during optimisation."""

    category = "training-divergence"

    def __init__(self, message: str, epoch: int | None = None, batch: int | None = None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


class RolloutDivergenceError(PdeStepError):
    """Autoregressive rollout produced a non-finite or exploding field."""

    category = "rollout-divergence"

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step
