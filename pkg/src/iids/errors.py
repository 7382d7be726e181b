"""Exception types shared across the toolkit."""


class IIDSError(Exception):
    """Base class for toolkit errors."""


class DataError(IIDSError, ValueError):
    """Malformed input data (CSV content, labels, dimensions)."""


class ConfigError(IIDSError, ValueError):
    """Invalid experiment or model configuration."""


class ModelFormatError(IIDSError):
    """A serialized model file is corrupt or has an unsupported version."""


class StageError(IIDSError):
    """A pipeline stage failed; ``stage`` names which one."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")


class EmptySelectionWarning(UserWarning):
    """Feature selection produced an empty subset."""
