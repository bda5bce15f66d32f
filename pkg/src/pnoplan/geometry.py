"""Hyperball constants, sine-power integrals, and chained-ball path moments.

The moment formulas are second-order approximations for the length of a
polygonal path whose vertices are drawn uniformly from a row of disjoint
hyperballs (radius ``beta``) whose centers sit ``eps`` apart on a line.  They
are exact when ``beta == 0`` and tighten as ``beta/eps`` shrinks; the Monte
Carlo estimators in :mod:`pnoplan.oracles` quantify the truncation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def ball_volume(d: int, r: float) -> float:
    """Volume of a d-dimensional ball of radius r.

    Uses ``exp(log Gamma)`` so that large dimensions (d ~ 200) neither
    overflow nor lose precision.
    """
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be an integer >= 1, got {d}")
    if r < 0:
        raise ValueError(f"radius must be >= 0, got {r}")
    d = int(d)
    if r == 0.0:
        return 0.0
    log_v = 0.5 * d * math.log(math.pi) - math.lgamma(0.5 * d + 1.0)
    return math.exp(log_v + d * math.log(r))


def unit_ball_volume(d: int) -> float:
    """Volume constant of the unit d-ball."""
    return ball_volume(d, 1.0)


def sine_power_integral(d: int) -> float:
    """Integral of sin(theta)**d over [0, pi].

    Evaluated through the recurrence S_d = (d-1)/d * S_{d-2} seeded with
    S_0 = pi and S_1 = 2.  Agrees with the volume-ratio identity
    S_{d-2} = d*V_d / ((d-1)*V_{d-1}).
    """
    if int(d) != d or d < 0:
        raise ValueError(f"exponent must be an integer >= 0, got {d}")
    d = int(d)
    val = math.pi if d % 2 == 0 else 2.0
    for k in range(2 if d % 2 == 0 else 3, d + 1, 2):
        val *= (k - 1) / k
    return val


def sample_in_ball(rng: np.random.Generator, center, radius: float, size: int | None = None):
    """Draw points uniformly from the closed ball around ``center``.

    Uses an isotropic Gaussian direction scaled by ``radius * U**(1/d)``,
    which stays uniform in any dimension without rejection.  Returns a single
    point of shape (d,) when ``size`` is None, else an array (size, d).

    Draw order is fixed (one normal block, then one uniform block) so results
    are reproducible from the generator state.
    """
    if radius <= 0:
        raise ValueError(f"radius must be > 0, got {radius}")
    center = np.asarray(center, dtype=float)
    d = center.shape[0]
    n = 1 if size is None else int(size)
    g = rng.standard_normal((n, d))
    u = rng.random(n)
    norms = np.sqrt(np.einsum("nd,nd->n", g, g))
    pts = center + g * (radius * u ** (1.0 / d) / norms)[:, None]
    return pts[0] if size is None else pts


@dataclass(frozen=True)
class MomentInputs:
    """Inputs of the chained-ball moment formulas.

    ``d`` space dimension, ``eps`` center separation, ``beta`` ball radius
    (``beta <= eps/2`` keeps consecutive balls disjoint), ``m`` number of
    path segments (``m + 1`` balls).
    """

    d: int
    eps: float
    beta: float
    m: int = 1

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"dimension must be an integer >= 1, got {self.d}")
        if self.eps <= 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")
        if not 0 <= self.beta <= 0.5 * self.eps:
            raise ValueError(
                f"beta must lie in [0, eps/2] = [0, {0.5 * self.eps}], got {self.beta}"
            )
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"segment count must be an integer >= 1, got {self.m}")

    @property
    def lam(self) -> float:
        """Radius-to-separation ratio beta/eps."""
        return self.beta / self.eps


def segment_mean(mi: MomentInputs) -> float:
    """Expected length of one segment: eps + (d-1)*beta^2 / ((d+2)*eps)."""
    return mi.eps + (mi.d - 1) * mi.beta**2 / ((mi.d + 2) * mi.eps)


def segment_second_moment(mi: MomentInputs) -> float:
    """Expected squared segment length: eps^2 + 2*d*beta^2 / (d+2)."""
    return mi.eps**2 + 2.0 * mi.d * mi.beta**2 / (mi.d + 2)


def segment_cross_moment(mi: MomentInputs) -> float:
    """Expected product of two consecutive segment lengths.

    Assumes the three ball centers are collinear:
    eps^2 + (2d-3)*beta^2 / (d+2).
    """
    return mi.eps**2 + (2.0 * mi.d - 3.0) * mi.beta**2 / (mi.d + 2)


def path_mean(mi: MomentInputs) -> float:
    """Expected length of the m-segment path: m * segment_mean."""
    return mi.m * segment_mean(mi)


def path_variance_full(mi: MomentInputs) -> float:
    """Path length variance assembled from the three segment moments.

    M*E[I1^2] + (2M-2)*E[I1*I2] + (2-3M)*E[I1]^2.  For m = 1 this reduces to
    the single-segment variance.  Because the inputs are second-order
    approximations, the assembled value carries an m-dependent fourth-order
    residue; see :func:`path_variance_simple` for the term that survives
    truncation.
    """
    m = mi.m
    return (
        m * segment_second_moment(mi)
        + (2 * m - 2) * segment_cross_moment(mi)
        + (2 - 3 * m) * segment_mean(mi) ** 2
    )


def path_variance_simple(mi: MomentInputs) -> float:
    """Second-order path length variance: 2*beta^2 / (d+2).

    Independent of the segment count and of the underlying path length; only
    the ball radius matters at this order.
    """
    return 2.0 * mi.beta**2 / (mi.d + 2)
