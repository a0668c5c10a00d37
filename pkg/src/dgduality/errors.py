"""Exception types shared across the engine.

Each carries the CLI exit status it maps to.
"""


class EngineError(Exception):
    exit_code = 2


class InputError(EngineError, ValueError):
    """Malformed or inconsistent input (bad file, non-homogeneous data, d^2 != 0)."""

    exit_code = 2

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class WindowTooSmall(EngineError):
    exit_code = 3


class WindowNotCertified(EngineError, KeyError):
    """A lookup or comparison touched bidegrees outside a certified window."""

    exit_code = 3

    def __str__(self):
        return str(self.args[0]) if self.args else "window not certified"


class NotGorenstein(EngineError):
    exit_code = 1
