"""Exception hierarchy shared by every wavesim module."""


class WaveSimError(Exception):
    """Base class for all simulator errors."""


class InvalidInputError(WaveSimError, ValueError):
    pass


class RangeError(WaveSimError, ValueError):
    """A query fell outside the domain of a table or model."""


class ConversionError(WaveSimError, ValueError):
    """A matrix representation change was singular."""


class SParamParseError(WaveSimError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NetlistSyntaxError(WaveSimError, ValueError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f"line {line}"
            if col is not None:
                where += f", col {col}"
            where += ": "
        super().__init__(where + message)


class ElaborationError(WaveSimError, ValueError):
    pass


class UnsupportedConfigurationError(WaveSimError, ValueError):
    pass


class SolverError(WaveSimError, RuntimeError):
    pass


class SingularSystemError(SolverError):
    pass


class ConvergenceError(SolverError):
    pass


class InstabilityError(SolverError):
    pass
