class ShapeMismatchError(ValueError):
    """An array does not have the length or shape the network layout requires."""


class TauRangeError(ValueError):
    """A quantile probability lies outside [0, 1]."""


class NonFiniteGradientError(ValueError):
    """A gradient contains NaN or infinite entries; the optimizer step is rejected."""


class SpecMismatchError(ValueError):
    """A parameter snapshot was produced for a different network spec."""


class PlacementError(RuntimeError):
    """Objects could not be placed in the bin without overlapping."""


class EpisodeDoneError(RuntimeError):
    """`step` was called on an episode that already finished."""


class ConfigError(ValueError):
    """
    An experiment config could not be loaded.

    `key_paths` lists the dotted paths of every failing key (empty when the
    problem is the file itself).
    """

    def __init__(self, message: str, key_paths: list[str] | None = None):
        super().__init__(message)
        self.key_paths = key_paths or []


class DatasetFormatError(ValueError):
    """A dataset line could not be parsed into an episode record."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class RoleCrashedError(RuntimeError):
    """A pipeline role raised; the run was aborted."""

    def __init__(self, role: str, message: str):
        super().__init__(f"role '{role}' crashed: {message}")
        self.role = role
