"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class RoutineMapError(Exception):
    exit_code = 3


class ConfigError(RoutineMapError, ValueError):
    exit_code = 2


class DataError(RoutineMapError, ValueError):
    exit_code = 3


class EmptyInputError(DataError):
    """The input stream holds no header or no data rows."""


class ParseError(DataError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class AmbiguityError(DataError):
    """Two different locations reported at the same instant."""


class DiscoveryError(DataError):
    pass


class IntegrityError(DataError):
    """Clusterings and groups disagree about day membership."""


class InvariantError(RoutineMapError):
    exit_code = 4
