"""Exception hierarchy. Every error carries a short machine-readable ``code``
and a ``context`` dict that the CLI serializes verbatim."""


class KhqaError(Exception):
    code = "error"

    def __init__(self, message, **context):
        super().__init__(message)
        self.message = message
        self.context = context


class ParameterError(KhqaError, ValueError):
    code = "invalid_parameter"


class ExpressionSyntaxError(KhqaError, ValueError):
    code = "syntax_error"

    def __init__(self, message, position, text=None):
        super().__init__(f"{message} at position {position}", position=position, text=text)
        self.position = position


class ArityError(KhqaError, ValueError):
    code = "arity_mismatch"


class BudgetExceeded(KhqaError):
    code = "budget_exceeded"


class TailToleranceError(KhqaError):
    code = "tail_tolerance"


class PreconditionError(KhqaError):
    code = "precondition_violated"


class IntegrationError(KhqaError):
    code = "integration_failed"


class ConversionOverflow(KhqaError, OverflowError):
    code = "float_overflow"


class EigenSolverError(KhqaError):
    code = "eigensolver_failed"
