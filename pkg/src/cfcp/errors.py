"""Exception types raised across the package."""


class CFCPError(Exception):
    """Base class for package errors."""


class InvalidParameterError(CFCPError, ValueError):
    pass


class UnsupportedOperationError(CFCPError, RuntimeError):
    """The data lacks something the operation needs (exogenous U, counterfactuals)."""


class DivergenceError(CFCPError, ArithmeticError):
    pass


class CsvParseError(CFCPError, ValueError):
    pass


class ConfigError(CFCPError, ValueError):
    pass
