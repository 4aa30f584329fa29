"""Exception types shared across the package."""

__all__ = [
    "MprhoError",
    "LabelError",
    "ContractionError",
    "PartitionError",
    "ReshapeError",
    "CanonicalFormError",
    "GaugeError",
    "ChannelError",
    "SizeError",
    "ValidityError",
    "ConfigError",
    "SerializationError",
    "StrictCheckError",
]


class MprhoError(Exception):
    """Base class for every package-specific failure."""


class LabelError(MprhoError, ValueError):
    """A named index is missing, duplicated, or malformed."""


class ContractionError(MprhoError, ValueError):
    """Two tensors cannot be contracted as requested."""


class PartitionError(MprhoError, ValueError):
    """A row/column split of a tensor's indices is empty or not proper."""


class ReshapeError(MprhoError, ValueError):
    """A merge or split of indices does not preserve the total dimension."""


class CanonicalFormError(MprhoError, ValueError):
    """An operation required a canonical chain but got something else."""


class GaugeError(MprhoError, ValueError):
    """A gauge transformation is singular or not an isometry."""


class ChannelError(MprhoError, ValueError):
    """A set of Kraus operators is inconsistent or not trace preserving."""


class SizeError(MprhoError, ValueError):
    """A chain is too small, too large, or indexed out of range."""


class ValidityError(MprhoError, ValueError):
    """A state or operator violates a structural requirement (shape,
    hermiticity, positivity, normalization)."""


class ConfigError(MprhoError, ValueError):
    """An experiment configuration file is malformed."""


class SerializationError(MprhoError, ValueError):
    """A checkpoint file cannot be read back."""


class StrictCheckError(MprhoError, RuntimeError):
    """A runtime post-condition enforced under ``--strict`` failed."""
