"""Exception types shared across the package."""


class DLWalksError(Exception):
    """Base class for all package-specific errors."""


class HorocycleMismatch(DLWalksError):
    """Tree-vertex pair does not satisfy hor(x1) + hor(x2) = 0."""


class ColorMismatch(DLWalksError):
    """Group operation requested on DL(q,r) with q != r."""


class InsufficientDepth(DLWalksError):
    """A boundary-point anchor is too shallow for the requested computation."""


class WalkSpecError(DLWalksError):
    """Invalid walk specification; the message names the offending key."""


class NoBracket(DLWalksError):
    """Root search for phi(c) = 1 found no sign change within the search range."""


class NotStochastic(DLWalksError):
    """Conjugation constant does not satisfy phi(c0) = 1, so the result is not a walk."""


class NoConvergence(DLWalksError):
    """Boundary-coefficient solve left a residual above tolerance."""

    def __init__(self, residual, tol):
        super().__init__(f"coefficient system residual {residual:.3e} exceeds tolerance {tol:.3e}")
        self.residual = residual
        self.tol = tol


class TruncationExceeded(DLWalksError):
    """Kernel evaluation requested an index beyond the solved coefficient range."""


class Unclassifiable(DLWalksError):
    """Walk satisfies none of the classified drift/root hypotheses."""


class DepthExceeded(DLWalksError):
    """Exact dynamic programming hit its configured state-space cap."""
