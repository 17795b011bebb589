"""Exception types.

Every exception carries a short ``token`` so command-line failures can be
matched with grep.
"""


class TshipError(Exception):
    token = "Error"

    def __str__(self):
        msg = super().__str__()
        return f"{self.token}: {msg}" if msg else self.token


class ValidationError(TshipError, ValueError):
    token = "InvalidInstance"


class Disconnected(ValidationError):
    token = "Disconnected"


class ImproperDemands(ValidationError):
    token = "ImproperDemands"


class NonpositiveCost(ValidationError):
    token = "NonpositiveCost"


class ParallelEdgeOrLoop(ValidationError):
    token = "ParallelEdgeOrLoop"


class TooSmall(ValidationError):
    token = "TooSmall"


class ParseError(TshipError, ValueError):
    token = "ParseError"

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateLayer(TshipError, ValueError):
    token = "DegenerateLayer"


class TooLarge(TshipError, ValueError):
    token = "TooLarge"


class NotConverged(TshipError, RuntimeError):
    """Raised when the solver hits its iteration caps.

    The partially built report (flow, certificate, residual norm) is kept on
    the exception as ``report``.
    """

    token = "NotConverged"

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
