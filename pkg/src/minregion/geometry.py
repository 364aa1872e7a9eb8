"""Distance and angle primitives on Euclidean balls.

Everything here is a pure function of float64 arrays.  The ball-specific
constructions (nearest boundary point, visibility cap, canonical frame)
support the membership test for candidate minimizers: a query point x_star
outside a ball sees only a spherical cap of the boundary, and all scoring
for the ball case happens in the 2-plane spanned by the gradient and the
center direction, summarized by a small canonical frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ArcCosineDomainError,
    CoincidentPointsError,
    DimensionMismatchError,
    InsideBallError,
    NegativeDiscriminantError,
    NotOnBoundaryError,
    ZeroVectorError,
)

# Tolerances, shared with the tests that pin them.
ARCCOS_DOMAIN_SLOP = 1e-9  # |cos| may exceed 1 by at most this before it is an error
ON_SPHERE_ATOL = 1e-9  # how far from the sphere a "boundary" point may sit
DISCRIMINANT_ATOL = 1e-12  # negative squared lengths beyond this are an error


def as_vector(x) -> np.ndarray:
    """Coerce array-like input to a 1-D float64 vector."""
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    return v


def _same_dim(*vectors: np.ndarray) -> int:
    n = vectors[0].shape[0]
    for v in vectors[1:]:
        if v.shape[0] != n:
            raise DimensionMismatchError(
                f"vectors of dimension {n} and {v.shape[0]} cannot be combined"
            )
    return n


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball with strictly positive radius."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = as_vector(self.center)
        if not np.all(np.isfinite(center)):
            raise ValueError("ball center must be finite")
        radius = float(self.radius)
        if not np.isfinite(radius) or radius <= 0.0:
            raise ValueError(f"ball radius must be > 0, got {radius}")
        center.flags.writeable = False
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", radius)

    @property
    def dimension(self) -> int:
        return self.center.shape[0]

    def contains(self, x) -> bool:
        """Closed-ball membership."""
        x = as_vector(x)
        _same_dim(self.center, x)
        return float(np.linalg.norm(x - self.center)) <= self.radius


@dataclass(frozen=True)
class CanonicalFrame:
    """Isometry-invariant summary of (gradient, query point, ball).

    d is the distance from the query point to the ball center, alpha the
    angle between the gradient and the direction from the query point to
    the center, g_norm the gradient norm.  Any rotation or translation of
    the original data yields the same frame, so all ball-case scoring can
    be done on these three numbers alone.
    """

    d: float
    alpha: float
    g_norm: float


def unit_vector(x1, x2) -> np.ndarray:
    """Unit vector pointing from x2 toward x1.

    Raises CoincidentPointsError when the points coincide exactly.
    """
    x1 = as_vector(x1)
    x2 = as_vector(x2)
    _same_dim(x1, x2)
    diff = x1 - x2
    norm = float(np.linalg.norm(diff))
    if norm == 0.0:
        raise CoincidentPointsError("unit_vector requires two distinct points")
    return diff / norm


def angle_between(u, v) -> float:
    """Angle in [0, pi] between two nonzero vectors.

    The cosine is clamped to [-1, 1]; a magnitude beyond 1 + 1e-9 signals a
    geometry bug upstream and raises ArcCosineDomainError instead of being
    silently clamped.
    """
    u = as_vector(u)
    v = as_vector(v)
    _same_dim(u, v)
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVectorError("angle_between requires nonzero vectors")
    c = float(np.dot(u, v)) / (nu * nv)
    if abs(c) > 1.0 + ARCCOS_DOMAIN_SLOP:
        raise ArcCosineDomainError(f"cosine {c} is out of [-1, 1] beyond roundoff")
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def canonicalize(g, x_star, ball: Ball) -> CanonicalFrame:
    """Reduce (gradient, query point, ball) to a CanonicalFrame.

    Requires x_star strictly outside the closed ball and a nonzero gradient.
    """
    g = as_vector(g)
    x_star = as_vector(x_star)
    _same_dim(g, x_star, ball.center)
    to_center = ball.center - x_star
    d = float(np.linalg.norm(to_center))
    if d <= ball.radius:
        raise InsideBallError(
            f"query point at distance {d} from the center is not outside radius {ball.radius}"
        )
    g_norm = float(np.linalg.norm(g))
    if g_norm == 0.0:
        raise ZeroVectorError("canonicalize requires a nonzero gradient")
    alpha = angle_between(g, to_center)
    return CanonicalFrame(d=d, alpha=alpha, g_norm=g_norm)


def theta_max(frame: CanonicalFrame, ball: Ball) -> float:
    """Central angle from the nearest boundary point to the tangent point.

    Boundary points visible from the query point have central angle (measured
    at the ball center, from the direction toward the query point) at most
    arccos(radius / d).
    """
    if frame.d <= ball.radius:
        raise InsideBallError("frame distance must exceed the ball radius")
    return float(np.arccos(ball.radius / frame.d))


def chord_length(d: float, eps0: float, theta: float) -> float:
    """Distance from the query point to the boundary point at central angle theta.

    Law of cosines in the plane through the query point, the center, and the
    boundary point: r^2 = d^2 + eps0^2 - 2 * eps0 * d * cos(theta).  Tiny
    negative radicands from roundoff (|value| < 1e-12) are clamped to zero;
    anything more negative raises NegativeDiscriminantError.
    """
    d = float(d)
    eps0 = float(eps0)
    if not (d > eps0 > 0.0):
        raise ValueError(f"need d > eps0 > 0, got d={d}, eps0={eps0}")
    disc = d * d + eps0 * eps0 - 2.0 * eps0 * d * float(np.cos(theta))
    if disc < 0.0:
        if disc > -DISCRIMINANT_ATOL:
            disc = 0.0
        else:
            raise NegativeDiscriminantError(f"squared chord length {disc} < 0")
    return float(np.sqrt(disc))


def nearest_boundary_point(x_star, ball: Ball) -> np.ndarray:
    """Boundary point closest to x_star (x_star strictly outside the ball)."""
    x_star = as_vector(x_star)
    _same_dim(x_star, ball.center)
    d = float(np.linalg.norm(x_star - ball.center))
    if d <= ball.radius:
        raise InsideBallError("nearest_boundary_point requires x_star outside the ball")
    return ball.center + ball.radius * unit_vector(x_star, ball.center)


def visible_cap_contains(x, x_star, ball: Ball) -> bool:
    """Whether boundary point x is visible from x_star.

    Visible means the open segment from x to x_star does not re-enter the
    ball; for a ball this is the closed half-space test
    <x - center, x_star - center> >= radius^2, which keeps tangent points.
    x must lie on the sphere to within 1e-9.
    """
    x = as_vector(x)
    x_star = as_vector(x_star)
    _same_dim(x, x_star, ball.center)
    if abs(float(np.linalg.norm(x - ball.center)) - ball.radius) > ON_SPHERE_ATOL:
        raise NotOnBoundaryError("x is not on the ball boundary")
    d = float(np.linalg.norm(x_star - ball.center))
    if d <= ball.radius:
        raise InsideBallError("visible_cap_contains requires x_star outside the ball")
    lhs = float(np.dot(x - ball.center, x_star - ball.center))
    return lhs >= ball.radius**2


def arc_point(x_star, ball: Ball, g, theta: float) -> np.ndarray:
    """Boundary point at central angle theta on the scored arc.

    The arc starts at the boundary point nearest x_star (theta = 0) and bends
    toward the side the gradient g leans to; when g is colinear with the
    center direction the side is arbitrary and a fixed one is picked.  Used
    to turn a frame-level sweep angle back into coordinates for witnesses.
    """
    x_star = as_vector(x_star)
    g = as_vector(g)
    _same_dim(x_star, g, ball.center)
    e_r = unit_vector(x_star, ball.center)
    g_norm = float(np.linalg.norm(g))
    if g_norm == 0.0:
        raise ZeroVectorError("arc_point requires a nonzero gradient")
    sin_t = float(np.sin(theta))
    if sin_t == 0.0:
        return ball.center + ball.radius * float(np.cos(theta)) * e_r
    perp = g - float(np.dot(g, e_r)) * e_r
    perp_norm = float(np.linalg.norm(perp))
    if perp_norm > 1e-12 * g_norm:
        e_t = perp / perp_norm
    else:
        if e_r.shape[0] == 1:
            raise ZeroVectorError("no transverse arc direction exists in one dimension")
        # colinear gradient: take the coordinate axis least aligned with e_r
        k = int(np.argmin(np.abs(e_r)))
        basis = np.zeros_like(e_r)
        basis[k] = 1.0
        e_t = basis - float(np.dot(basis, e_r)) * e_r
        e_t = e_t / float(np.linalg.norm(e_t))
    return ball.center + ball.radius * (float(np.cos(theta)) * e_r + sin_t * e_t)
