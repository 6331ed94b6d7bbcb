"""Exception types raised across the package."""


class DomainError(ValueError):
    """Argument outside the domain of a mathematical function."""


class BracketError(ValueError):
    """Root-finding bracket does not enclose a sign change."""


class BreakdownError(ValueError):
    """Received power exceeds the diode breakdown bound rho_max."""


class RangeError(ValueError):
    """Target value has no preimage in the admissible range."""


class SchemaError(ValueError):
    """Model or data file does not match the expected layout.

    The offending field path is kept in ``path``.
    """

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class InvariantError(ValueError):
    """A structural invariant of a model or pdf is violated."""

    def __init__(self, invariant, message):
        super().__init__(f"[{invariant}] {message}")
        self.invariant = invariant


class InconsistencyError(ValueError):
    """Multipliers (mu0, mu2) do not produce a normalised density."""


class ResolutionError(ValueError):
    """Integration grid is too coarse for the requested accuracy."""


class FitError(RuntimeError):
    """Curve fit failed to converge; the best candidate is attached."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
