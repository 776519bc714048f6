class EitcorrError(Exception):
    """Base class for errors raised by this package."""


class NumericalError(EitcorrError, ArithmeticError):
    """A computation produced a non-finite or undefined result."""


class ConfigError(EitcorrError, ValueError):
    """Invalid configuration; ``violations`` lists every ``(key_path, message)``."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = [f"{key}: {msg}" for key, msg in self.violations]
        super().__init__("invalid configuration:\n  " + "\n  ".join(lines))
