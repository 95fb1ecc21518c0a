"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the CLI can report
failures without parsing messages.
"""


class LinodeError(Exception):
    code = "error"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class EvaluationError(LinodeError):
    code = "evaluation"


class SingularityError(EvaluationError):
    """Division by zero, log of a nonpositive value, and similar."""

    code = "singular"

    def __init__(self, message, points=None):
        super().__init__(message)
        self.points = points


class OutOfIntervalError(EvaluationError):
    code = "out-of-interval"


class DerivativeOrderError(LinodeError):
    code = "derivative-order"


class IntervalError(LinodeError):
    code = "interval"


class TransformationError(LinodeError):
    code = "transformation"


class InverseError(TransformationError):
    code = "inverse"


class SolverError(LinodeError):
    code = "solver"


class GaugeError(LinodeError):
    code = "gauge"


class WronskianError(LinodeError):
    code = "wronskian"
