"""Exception hierarchy shared by all modules.

Each class carries a ``category`` used by the CLI for its ``error:<category>:``
prefix and exit-code mapping.
"""


class ScatterError(Exception):
    category = "error"


class DomainError(ScatterError, ValueError):
    """An input lies outside the domain of a formula."""

    category = "domain"


class SingularityError(DomainError):
    """A formula has a pole (or a vanishing normaliser) at the requested point."""

    category = "singularity"


class ConfigError(ScatterError, ValueError):
    category = "config"


class ParseError(ConfigError):
    """Malformed input file; ``lineno`` is 1-based when known."""

    category = "parse"

    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None:
            where = f"{path}"
            if lineno is not None:
                where += f":{lineno}"
            where += ": "
        super().__init__(where + message)
