"""Candidate-minimizer membership tests.

A point x_star outside the uncertainty set can be a minimizer of
f_known + f_unknown only if some subgradient g of f_known at x_star and some
point x_u in the uncertainty set satisfy

    <g, u(x_star, x_u)> / ||x_star - x_u||  <=  -sigma,

where u(x1, x2) is the unit vector from x2 toward x1 and sigma is the
strong-convexity constant of the unknown term.  evaluate_general checks this
over explicit candidate lists; evaluate_ball specializes to ball sets, where
the minimization reduces to a one-parameter sweep over the visible boundary
arc in the plane spanned by the gradient and the center direction.  Points
inside the closed set are always candidates (an admissible unknown term
minimizing there can be constructed directly), so they are classified member
without a score.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ArcCosineDomainError,
    CoincidentPointsError,
    DimensionMismatchError,
    InsideBallError,
)
from .funcmodel import KnownFunction, subdifferential
from .geometry import Ball, CanonicalFrame, arc_point, as_vector, canonicalize, unit_vector

DEFAULT_THETA_STEPS = 2048  # samples for the ball-case sweep
DEFAULT_SLACK = 1e-9  # additive slack on the -sigma threshold, keeps the region closed


@dataclass(frozen=True)
class FinitePointSet:
    """Finitely many candidate minimizer locations for the unknown term."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("a finite point set needs a nonempty (k, n) array of points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("finite point set entries must be finite")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def contains(self, x) -> bool:
        x = as_vector(x)
        if x.shape[0] != self.dimension:
            raise DimensionMismatchError("point dimension does not match the set")
        return bool(np.any(np.all(self.points == x, axis=1)))


@dataclass(frozen=True)
class UncertaintySet:
    """Where the unknown term's minimizer may lie, plus its convexity constant."""

    region: object  # Ball | FinitePointSet
    sigma: float

    def __post_init__(self):
        if not isinstance(self.region, (Ball, FinitePointSet)):
            raise TypeError("region must be a Ball or a FinitePointSet")
        sigma = float(self.sigma)
        if not np.isfinite(sigma) or sigma <= 0.0:
            raise ValueError(f"sigma must be > 0, got {sigma}")
        object.__setattr__(self, "sigma", sigma)

    @property
    def dimension(self) -> int:
        return self.region.dimension

    def contains(self, x) -> bool:
        return self.region.contains(x)


@dataclass(frozen=True)
class Witness:
    """Candidate data backing a verdict.

    x_u and g are coordinates when known; theta is the sweep angle for ball
    verdicts.  truncated marks a sweep stopped at its first passing sample,
    in which case best_score is the score at exit rather than the sweep
    minimum.
    """

    x_u: np.ndarray | None = None
    g: np.ndarray | None = None
    theta: float | None = None
    truncated: bool = False


@dataclass(frozen=True)
class MembershipVerdict:
    """Outcome of a membership test at one query point.

    best_score is the smallest pairwise score among the candidates examined
    (absent when there were none).  interior marks verdicts from the
    inside-the-set rule, which carry no witness.
    """

    member: bool
    best_score: float | None = None
    witness: Witness | None = None
    interior: bool = False


def pair_score(g, x_star, x_u) -> float:
    """<g, u(x_star, x_u)> / ||x_star - x_u|| for one candidate pair."""
    g = as_vector(g)
    x_star = as_vector(x_star)
    x_u = as_vector(x_u)
    u = unit_vector(x_star, x_u)
    dist = float(np.linalg.norm(x_star - x_u))
    return float(np.dot(g, u)) / dist


def _sweep_scores(d, cos_alpha, sin_alpha, g_norm, eps0, cos_theta, sin_theta):
    """Scores along the visible arc, broadcast over theta samples.

    With a = d - eps0*cos(theta) and b = eps0*sin(theta) the chord length r
    satisfies r^2 = a^2 + b^2 (a nonnegative-by-construction rewrite of the
    law of cosines) and the angle phi between the chord and the center
    direction satisfies cos(phi) = a/r, sin(phi) = b/r, so

        score = -g_norm * cos(alpha - phi) / r = -g_norm * (cos_alpha*a + sin_alpha*b) / r^2.
    """
    a = d - eps0 * cos_theta
    b = eps0 * sin_theta
    r2 = a * a + b * b
    return -g_norm * (cos_alpha * a + sin_alpha * b) / r2


def ball_score_infimum(d: float, cos_alpha: float, g_norm: float, eps0: float) -> float:
    """Exact infimum of the pairwise score over the whole ball.

    The level sets of p -> <g, x_star - p> / ||x_star - p||^2 are spheres
    through x_star centered along the gradient ray; the most negative level
    still touching the ball is attained at external tangency, giving

        -g_norm * (eps0 + d*cos_alpha) / (d^2 - eps0^2).

    Every sampled sweep score is bounded below by this value, which makes it
    a sound rejection test: if it exceeds the threshold, no sweep sample can
    pass.  Only meaningful when eps0 + d*cos_alpha > 0 (otherwise no negative
    scores exist at all and the returned value is >= 0).
    """
    return -g_norm * (eps0 + d * cos_alpha) / (d * d - eps0 * eps0)


def evaluate_ball(
    frame: CanonicalFrame,
    eps0: float,
    sigma: float,
    theta_steps: int = DEFAULT_THETA_STEPS,
    *,
    slack: float = DEFAULT_SLACK,
    early_exit: bool = True,
) -> MembershipVerdict:
    """Ball-case membership test on a canonical frame.

    If alpha >= pi/2 + arcsin(eps0/d) the gradient points too far away from
    the ball for any candidate to score negatively enough, and the verdict
    is immediately non-member.  Otherwise theta is swept over theta_steps
    uniform samples of [0, arccos(eps0/d)]; the point is a member iff some
    sampled score is <= -sigma + slack.  With early_exit the sweep stops at
    the first passing sample and the witness is flagged truncated.
    """
    theta_steps = int(theta_steps)
    if theta_steps < 2:
        raise ValueError(f"theta_steps must be >= 2, got {theta_steps}")
    eps0 = float(eps0)
    sigma = float(sigma)
    if eps0 <= 0.0:
        raise ValueError(f"eps0 must be > 0, got {eps0}")
    if sigma <= 0.0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if frame.d <= eps0:
        raise InsideBallError("frame distance must exceed the ball radius")
    threshold = -sigma + float(slack)
    if frame.alpha >= 0.5 * np.pi + np.arcsin(eps0 / frame.d):
        return MembershipVerdict(member=False)
    thetas = np.linspace(0.0, float(np.arccos(eps0 / frame.d)), theta_steps)
    scores = _sweep_scores(
        frame.d,
        np.cos(frame.alpha),
        np.sin(frame.alpha),
        frame.g_norm,
        eps0,
        np.cos(thetas),
        np.sin(thetas),
    )
    passing = scores <= threshold
    if early_exit and bool(passing.any()):
        k = int(np.argmax(passing))
        return MembershipVerdict(
            member=True,
            best_score=float(scores[k]),
            witness=Witness(theta=float(thetas[k]), truncated=True),
        )
    k = int(np.argmin(scores))
    return MembershipVerdict(
        member=bool(passing[k]),
        best_score=float(scores[k]),
        witness=Witness(theta=float(thetas[k])),
    )


def _visible_cap_candidates(
    x_star: np.ndarray, ball: Ball, samples: int, seed: int
) -> np.ndarray:
    """Boundary points visible from x_star, discretized.

    In the plane the visible cap is an arc and is sampled uniformly and
    inclusively (shrunk by a relative 1e-12 so the closed tangency test is
    float-safe).  In higher dimensions the sphere is sampled with a seeded
    normal-direction scheme and filtered to the cap, with the nearest
    boundary point always included.
    """
    center = ball.center
    radius = ball.radius
    rel = x_star - center
    d = float(np.linalg.norm(rel))
    t_max = float(np.arccos(radius / d))
    if ball.dimension == 2:
        base = float(np.arctan2(rel[1], rel[0]))
        psi = base + np.linspace(
            -t_max * (1.0 - 1e-12), t_max * (1.0 - 1e-12), int(samples)
        )
        return center + radius * np.stack([np.cos(psi), np.sin(psi)], axis=1)
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((int(samples), ball.dimension))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = center + radius * dirs
    visible = (pts - center) @ rel >= radius**2
    nearest = center + radius * (rel / d)
    return np.vstack([nearest, pts[visible]])


def evaluate_general(
    f: KnownFunction,
    x_star,
    uset: UncertaintySet,
    *,
    slack: float = DEFAULT_SLACK,
    boundary_samples: int = 10_000,
    sample_seed: int = 0,
) -> MembershipVerdict:
    """Membership by direct minimization over explicit candidate pairs.

    Candidates are (x_u, g) with x_u in the finite set, or on the visible
    boundary cap for a ball, and g a subdifferential generator, restricted
    to pairs with <g, u(x_star, x_u)> < 0.  The point is a member iff the
    minimal pair score is <= -sigma + slack; with no admissible candidates
    the verdict is non-member with no score.  x_star must lie outside the
    set (classify_point handles interior points).
    """
    x_star = as_vector(x_star)
    if x_star.shape[0] != uset.dimension or f.dimension != uset.dimension:
        raise DimensionMismatchError("function, point, and set dimensions must agree")
    region = uset.region
    if isinstance(region, Ball):
        if region.contains(x_star):
            raise InsideBallError("evaluate_general requires x_star outside the ball")
        candidates = _visible_cap_candidates(
            x_star, region, int(boundary_samples), int(sample_seed)
        )
    else:
        if region.contains(x_star):
            raise CoincidentPointsError(
                "x_star coincides with a set point; classify_point handles that case"
            )
        candidates = region.points
    threshold = -uset.sigma + float(slack)
    best_score = None
    best_witness = None
    diff = x_star - candidates  # (M, n)
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    units = diff / dist[:, None]
    for g in subdifferential(f, x_star).generators:
        num = units @ g
        admissible = num < 0.0
        if not bool(admissible.any()):
            continue
        scores = num[admissible] / dist[admissible]
        k = int(np.argmin(scores))
        if best_score is None or scores[k] < best_score:
            best_score = float(scores[k])
            best_witness = Witness(x_u=candidates[admissible][k], g=g)
    if best_score is None:
        return MembershipVerdict(member=False)
    return MembershipVerdict(
        member=bool(best_score <= threshold), best_score=best_score, witness=best_witness
    )


def classify_point(
    f: KnownFunction,
    x_star,
    uset: UncertaintySet,
    theta_steps: int = DEFAULT_THETA_STEPS,
    *,
    slack: float = DEFAULT_SLACK,
    early_exit: bool = True,
    boundary_samples: int = 10_000,
) -> MembershipVerdict:
    """Full membership decision for one query point.

    Points inside the closed set are members by the interior rule (no
    witness).  Outside, ball sets go through the canonical-frame sweep per
    subdifferential generator (zero generators are skipped), finite sets
    through evaluate_general; the point is a member iff any generator says
    so.
    """
    x_star = as_vector(x_star)
    if x_star.shape[0] != uset.dimension or f.dimension != uset.dimension:
        raise DimensionMismatchError("function, point, and set dimensions must agree")
    if uset.contains(x_star):
        return MembershipVerdict(member=True, interior=True)
    region = uset.region
    if isinstance(region, FinitePointSet):
        return evaluate_general(
            f, x_star, uset, slack=slack, boundary_samples=boundary_samples
        )
    best_score = None
    best_witness = None
    for g in subdifferential(f, x_star).generators:
        if float(np.linalg.norm(g)) == 0.0:
            continue
        frame = canonicalize(g, x_star, region)
        verdict = evaluate_ball(
            frame,
            region.radius,
            uset.sigma,
            theta_steps,
            slack=slack,
            early_exit=early_exit,
        )
        witness = None
        if verdict.witness is not None and verdict.witness.theta is not None:
            witness = Witness(
                x_u=arc_point(x_star, region, g, verdict.witness.theta),
                g=g,
                theta=verdict.witness.theta,
                truncated=verdict.witness.truncated,
            )
        if verdict.member:
            return MembershipVerdict(
                member=True, best_score=verdict.best_score, witness=witness
            )
        if verdict.best_score is not None and (
            best_score is None or verdict.best_score < best_score
        ):
            best_score = verdict.best_score
            best_witness = witness
    return MembershipVerdict(member=False, best_score=best_score, witness=best_witness)
