"""Exception types raised by the analysis routines."""


class PremiseViolation(ValueError):
    """A hypothesis of a criterion failed on its sample grid.

    `worst` carries the offending sample point (and, where useful, the two
    sides of the failed inequality).
    """

    def __init__(self, message, worst=None):
        super().__init__(message)
        self.worst = worst


class DegenerateError(ValueError):
    """The input makes the requested quantity meaningless (e.g. Phi == 0)."""


class CarveError(RuntimeError):
    """Subsets of the requested measures could not be carved out."""


class SearchFailure(RuntimeError):
    """A witness search ran past its overflow horizon."""


class NormUnbounded(RuntimeError):
    """No finite Luxemburg scale was found within the expansion horizon."""
