class F2FactorError(ValueError):
    """Base class for input and data errors (CLI exit code 2)."""


class PolynomialParseError(F2FactorError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownVariableError(F2FactorError):
    def __init__(self, name: str):
        super().__init__(f"Unknown variable {name!r}")
        self.name = name


class VarTableMismatchError(F2FactorError):
    pass


class PreconditionError(F2FactorError):
    pass


class DnfError(F2FactorError):
    pass


class TableError(F2FactorError):
    pass


class FactorizationDefect(RuntimeError):
    """Internal consistency failure (CLI exit code 3). Must never happen."""


class CallBudgetExceeded(RuntimeError):
    """An IsEqual run reached its call limit without a verdict."""

    def __init__(self, limit: int):
        super().__init__(f"IsEqual call limit {limit} reached")
        self.limit = limit
