"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Configuration file violates the schema or an invariant."""


class InventoryError(ValueError):
    """A lexicon, pair pool, split or stage cannot supply what was requested."""


class CoverageError(InventoryError):
    """A split could not keep every test primitive visible in train."""


class VocabularyError(KeyError):
    """Token or id outside the closed vocabulary."""


class CheckpointError(ValueError):
    """Malformed checkpoint file."""
