"""Exception hierarchy shared by every module.

Each class carries the CLI exit code it maps to.
"""


class ErgoscopeError(Exception):
    exit_code = 1


class InvalidInputError(ErgoscopeError, ValueError):
    exit_code = 2


class ConfigError(ErgoscopeError):
    """Config file could not be parsed or failed validation.

    ``field`` holds the dotted path of the offending entry when known.
    """

    exit_code = 2

    def __init__(self, message, field=None, kind="schema"):
        self.field = field
        self.kind = kind
        prefix = f"{kind} error"
        if field:
            prefix += f" at '{field}'"
        super().__init__(f"{prefix}: {message}")


class DegenerateWorkspaceError(ErgoscopeError):
    exit_code = 3


class DegenerateErgonomicModelError(DegenerateWorkspaceError):
    pass


class NumericalFailureError(ErgoscopeError, ArithmeticError):
    exit_code = 4
