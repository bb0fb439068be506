"""Exception hierarchy.

Every domain failure derives from :class:`HenonError`; the CLI maps these to
exit code 1 and prints :attr:`HenonError.category` on stderr.
"""


class HenonError(Exception):
    category = "domain-error"


class InvalidArgumentError(HenonError, ValueError):
    category = "invalid-argument"


class SearchExhaustedError(HenonError):
    category = "search-exhausted"

    def __init__(self, message, horizon=None):
        super().__init__(message)
        self.horizon = horizon


class ConvergenceError(HenonError):
    category = "convergence"

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class InconsistencyError(HenonError):
    category = "internal-inconsistency"


class HorizonError(HenonError):
    category = "horizon"


class StiffnessError(HenonError):
    category = "stiffness"


class CountMismatchError(HenonError):
    category = "count-mismatch"


class NumericalError(HenonError):
    category = "numerical"


class UnsupportedCaseError(HenonError):
    category = "unsupported-case"


class DegenerateInputError(HenonError):
    category = "degenerate-input"

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair
