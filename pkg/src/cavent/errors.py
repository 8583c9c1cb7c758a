class DomainError(ValueError):
    """An input lies outside the physical or mathematical domain of an operation."""


class PerturbativeRegimeError(DomainError):
    """Evolution time too long for the second-order density matrix to be a state."""


class InvalidStateError(ValueError):
    """A matrix handed in as a density matrix is not one."""


class NumericError(ArithmeticError):
    """A numerical routine failed to meet its accuracy contract."""


class SweepSpecError(ValueError):
    pass


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PerturbativeWarning(UserWarning):
    pass
