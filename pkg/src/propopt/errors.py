"""Exception types shared across the toolkit."""


class PropoptError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(PropoptError):
    """Invalid solver/space/GA configuration or config file."""


class GeometryError(PropoptError):
    """Blade geometry violates its physical invariants."""


class GenerationError(PropoptError):
    """Data generation exhausted its attempt budget without keeping records."""


class DatasetFormatError(PropoptError):
    """Dataset CSV is malformed or violates record invariants."""


class TrainingError(PropoptError):
    """Model training was asked to run on unusable (e.g. empty) data."""


class ModelFormatError(PropoptError):
    """Model file is truncated, of the wrong version, or structurally invalid."""


class ModelDataMismatchError(PropoptError):
    """A model was asked to index into a dataset it was not trained on."""
