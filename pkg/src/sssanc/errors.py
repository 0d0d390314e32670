"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid parameter or scenario configuration."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class IngestionError(ValueError):
    """A noise file could not be read or has an unsupported layout."""


class DomainError(ValueError):
    """A closed-form expression was evaluated outside its valid domain."""


class DivergenceError(ArithmeticError):
    """Adaptive state became non-finite or unbounded."""

    def __init__(self, message, iteration=None):
        self.iteration = iteration
        if iteration is not None:
            message = f"{message} at iteration {iteration}"
        super().__init__(message)


class TrendFault(DivergenceError):
    """The MSD-trend recursion produced a non-finite value."""


class AllTrialsDiverged(DivergenceError):
    """Every trial of an experiment was aborted."""
