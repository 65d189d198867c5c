"""Pipeline error hierarchy; each class carries the CLI exit code."""


class LepolyError(Exception):
    exit_code = 5

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ConfigError(LepolyError):
    exit_code = 1


class HypothesisError(LepolyError):
    exit_code = 2


class GeometryError(LepolyError):
    exit_code = 3


class TrackingError(LepolyError):
    exit_code = 4


class ConsistencyError(LepolyError):
    exit_code = 5


class PuiseuxError(LepolyError):
    """Non-squarefree input or branches that do not separate."""
    exit_code = 2
