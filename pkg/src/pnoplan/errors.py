"""Exception hierarchy shared across the package."""


class PnoplanError(Exception):
    """Base class for all pnoplan errors."""


class UnsupportedSceneError(PnoplanError):
    """Scene violates a structural restriction (e.g. overlapping obstacles)."""


class SceneFormatError(PnoplanError):
    """Scene file is malformed or fails validation."""


class SamplingStarvedError(PnoplanError):
    """Rejection sampling exceeded its attempt cap without finding free space."""


class InvalidQueryError(PnoplanError):
    """Query endpoints are in collision or otherwise unusable."""


class DegenerateDeltaError(PnoplanError):
    """Requested error ratio is at or below the Chebyshev threshold."""

    def __init__(self, delta: float, minimum: float):
        self.delta = delta
        self.minimum = minimum
        super().__init__(
            f"delta={delta:.6g} is unusable; it must exceed {minimum:.6g} "
            f"for this tiling"
        )


class UnattainableConfidenceError(PnoplanError):
    """Requested success probability is not below the coverage probability."""

    def __init__(self, p_success: float, coverage: float):
        self.p_success = p_success
        self.coverage = coverage
        super().__init__(
            f"p_success={p_success:.6g} must be strictly below the coverage "
            f"probability {coverage:.9g} at this iteration"
        )


class InfeasibleSpecError(PnoplanError):
    """Stopping specification cannot be satisfied by any iteration count."""


class InvalidTilingError(PnoplanError):
    """Tiling balls overlap each other or the scene obstacles."""


class UnreachableError(PnoplanError):
    """No path exists in the oracle graph between the query endpoints."""
