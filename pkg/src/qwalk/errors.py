"""Exception hierarchy shared by all qwalk modules.

Each class carries an ``exit_code`` used by the command line front end:
2 for validation problems, 3 for numerical non-convergence, 4 for cost guards.
"""


class QWalkError(Exception):
    exit_code = 2


class ValidationError(QWalkError, ValueError):
    exit_code = 2


class NotTracePreserving(ValidationError):
    pass


class CoinNotUnitarySum(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class HypothesisViolated(ValidationError):
    pass


class ColumnNotNormalized(ValidationError):
    def __init__(self, site, deviation):
        super().__init__(
            f"outgoing transitions from site {site} are not normalized "
            f"(max deviation {deviation:.3e})"
        )
        self.site = site
        self.deviation = deviation


class TermOutOfRange(ValidationError):
    pass


class NodesTooFew(ValidationError):
    pass


class InsufficientData(ValidationError):
    pass


class KacNotApplicable(ValidationError):
    pass


class NumericalError(QWalkError, ArithmeticError):
    exit_code = 3


class EigenConvergenceError(NumericalError):
    pass


class DegenerateStep(NumericalError):
    pass


class NotConverged(NumericalError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NonUnique(NumericalError):
    def __init__(self, message, multiplicity=None):
        super().__init__(message)
        self.multiplicity = multiplicity


class TailTooLarge(NumericalError):
    def __init__(self, message, tail_mass=None):
        super().__init__(message)
        self.tail_mass = tail_mass


class CostGuardExceeded(QWalkError):
    exit_code = 4
