"""Exception hierarchy shared by all solver and reduction modules."""


class WorkbenchError(Exception):
    """Base class for every error raised by steinercover."""


class ValidationError(WorkbenchError):
    """An instance or certificate violates a structural invariant."""


class UncoverableInstance(ValidationError):
    pass


class UnreachableTerminal(ValidationError):
    pass


class UnreachableCoreVertex(ValidationError):
    pass


class NoFeasibleRoot(ValidationError):
    pass


class NoCoverableTerminal(ValidationError):
    pass


class StalledOracle(WorkbenchError):
    """Greedy submodular cover found no element with positive marginal gain."""


class BadParameters(ValidationError):
    pass


class DegreeMismatch(ValidationError):
    pass


class ParameterMismatch(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BudgetExceeded(WorkbenchError):
    """An exhaustive search would exceed its configured enumeration budget."""
