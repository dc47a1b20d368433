"""
Error taxonomy for the super-resolution engine.

Library code raises these; only the CLI layer maps them to exit codes.
"""


class SuperResolutionError(Exception):
    """Root of every error raised by this package."""


class DimensionError(SuperResolutionError, ValueError):
    """Tensor or image shapes do not fit together."""


class ContractError(SuperResolutionError, ValueError):
    """A precondition of an operation was violated."""


class ImageIOError(SuperResolutionError, OSError):
    """A PNG file could not be read or written."""

    def __init__(self, path: object, reason: str) -> None:
        self.path = str(path)
        self.reason = reason
        super().__init__(f"{self.path}: {reason}")


class CheckpointError(SuperResolutionError):
    """A checkpoint file is malformed or inconsistent with its header."""


class ChecksumError(CheckpointError):
    """Stored checkpoint checksum does not match its contents."""


class ConfigError(SuperResolutionError, ValueError):
    """An experiment config key is unknown or its value is invalid."""

    def __init__(self, key: str, message: str) -> None:
        self.key = key
        super().__init__(f"{key}: {message}")


class DatasetError(SuperResolutionError):
    """Dataset is empty or holds no image large enough for the requested crop."""


class TrainingDivergedError(SuperResolutionError):
    """Loss became NaN or infinite during training."""

    def __init__(self, epoch: int, iteration: int, step: int, loss: float) -> None:
        self.epoch = epoch
        self.iteration = iteration
        self.step = step
        self.loss = loss
        super().__init__(f"non-finite loss {loss} at epoch {epoch}, iteration {iteration} (step {step})")
