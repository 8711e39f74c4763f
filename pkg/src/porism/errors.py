"""Exception taxonomy shared by all modules."""


class PorismError(Exception):
    """Base class for all library-specific failures."""


class DegenerateChord(PorismError):
    """Chord normal angles do not bound a valid reflection (gap outside (0, pi])."""


class TangentRay(PorismError):
    """Reflection would graze the table (reflection angle below the grazing cutoff)."""


class MissesTable(PorismError):
    """Oriented line does not cross the table interior."""


class NoIntersection(PorismError):
    """Root bracketing for the next impact failed; signals a convexity violation."""


class NotClosed(PorismError):
    """Polygon closure residual is too large for the requested identity check."""


class OutOfRange(PorismError):
    """Confocal parameter or rotation-number target outside its admissible interval."""


class NotBracketed(PorismError):
    """Requested rotation number is outside the range attained on the search bracket."""


class NoConvergence(PorismError):
    """Iterative solver exhausted its iteration budget."""


class ClosureFailure(PorismError):
    """Constructed orbit failed to close within tolerance."""


class OrderViolation(PorismError):
    """Cyclic ordering of normal angles could not be maintained during ascent."""


class NearSingular(PorismError):
    """Denominator quantity too close to zero for a meaningful ratio."""


class WrongPeriod(PorismError):
    """Operation requires a specific orbit period."""


class NonConvexTable(PorismError, ValueError):
    """Support-function data violates strict convexity (h + h'' > 0)."""
