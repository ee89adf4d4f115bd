class RtncError(Exception):
    """Base class for every error raised by the package."""


class ArgumentError(RtncError, ValueError):
    pass


class InfeasibleError(RtncError):
    def __init__(self, message: str, constraint_id: str | None = None):
        super().__init__(message)
        self.constraint_id = constraint_id


class ProtocolViolation(RtncError):
    def __init__(self, message: str, event_id: int | None = None):
        super().__init__(message)
        self.event_id = event_id

    def __str__(self) -> str:
        base = super().__str__()
        if self.event_id is None:
            return base
        return f"{base} (event {self.event_id})"


class ParseError(RtncError):
    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DecompositionError(RtncError, AssertionError):
    """Raised when a decomposition has overlapping blocks or fails its rate checks.

    `graph_text` holds the offending graph in the text format so the run can be
    reproduced with `python -m src.cli decompose --graph`.
    """

    def __init__(self, message: str, graph_text: str = ""):
        super().__init__(message)
        self.graph_text = graph_text
