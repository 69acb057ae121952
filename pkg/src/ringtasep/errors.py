"""Exception types raised by the ringtasep numerics.

Every failure mode that a caller may want to catch separately gets its own
class.  They all derive from :class:`RingTasepError` so a blanket ``except``
is still possible.
"""


class RingTasepError(Exception):
    """Base class for all package errors."""


class NonConvergence(RingTasepError):
    """Root solver did not reach the residual tolerance."""


class DegenerateZ(RingTasepError, ValueError):
    """Spectral parameter outside the admissible punctured disk."""


class PairingFailure(RingTasepError):
    """Flat-case partner map is not a clean (d-1)-to-1 correspondence."""


class ScaleExceeded(RingTasepError, ValueError):
    """Requested system size is beyond the supported range."""


class QuadratureDivergence(RingTasepError):
    """Contour average keeps moving when the node count is doubled."""


class BranchDiscontinuity(RingTasepError):
    """Square-root branch of a prefactor jumps between adjacent nodes."""


class TruncationOverflow(RingTasepError):
    """Truncated state space grew beyond the configured cap."""


class BranchCut(RingTasepError, ValueError):
    """Evaluation point lies on a branch cut of a special function."""


class SeriesStall(RingTasepError):
    """Power series failed to reach tolerance within its term budget."""


class TruncationUnstable(RingTasepError):
    """Kernel node truncation has not stabilised."""


class ShapeMismatch(RingTasepError, ValueError):
    """Configuration arrays have inconsistent lengths or ordering."""


class NegativeTime(RingTasepError, ValueError):
    """Negative evolution time."""


class GridMismatch(RingTasepError, ValueError):
    """Two CDF tables do not share a common abscissa grid."""
