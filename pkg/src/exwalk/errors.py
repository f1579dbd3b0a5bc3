"""Exception types shared across the package."""


class ExwalkError(Exception):
    """Base class for package-specific failures."""


class ValidationError(ExwalkError):
    """A configuration violates its invariants.

    Carries the full list of violations so callers can report all of them
    at once instead of fixing one per run.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class CapacityError(ExwalkError):
    """Requested problem size exceeds what the implementation supports."""


class ConvergenceError(ExwalkError):
    """An iterative solver failed to reach its tolerance."""


class QuadratureError(ExwalkError):
    """Adaptive quadrature could not meet the requested tolerance."""


class TieError(ExwalkError):
    """A comparison that must have a unique winner came out tied."""


class NeedsOffsetsError(TieError):
    """Tie resolution requires integer offsets that were not supplied."""


class UnsupportedRefinementError(ExwalkError):
    """More than one tied band carries an infinite weight; not supported."""
