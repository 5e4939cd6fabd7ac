"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Operand shapes or subsystem splits do not line up."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class DegenerateCodeError(RuntimeError):
    """The sampled code vectors are numerically linearly dependent."""

    def __init__(self, message, seed=None):
        super().__init__(message if seed is None else f"{message} (seed={seed})")
        self.seed = seed


class CapacityError(ValueError):
    """A requested size exceeds one of the dense-computation caps."""

    def __init__(self, cap, value, limit):
        super().__init__(f"{cap} = {value} exceeds cap {limit}")
        self.cap = cap
        self.value = value
        self.limit = limit


class ConfigError(ValueError):
    """Invalid experiment configuration; ``path`` names the offending key."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
