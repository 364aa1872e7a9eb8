"""Falsification oracle: sample concrete unknown terms and verify necessity.

The membership test is a necessary condition, so it can be attacked
end-to-end: draw an admissible unknown term f_u (an isotropic quadratic
(sigma_u/2) * ||x - c||^2 with c in the uncertainty set and sigma_u >=
sigma), minimize f_known + f_u exactly, and check that the true minimizer
is classified as a member.  Any non-member verdict at a true minimizer is a
falsification and indicates a defect.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConvergenceError, KinkPointError
from .funcmodel import KnownFunction, _smooth_gradient
from .geometry import Ball, as_vector
from .membership import (
    DEFAULT_SLACK,
    DEFAULT_THETA_STEPS,
    MembershipVerdict,
    UncertaintySet,
    classify_point,
)

DEFAULT_MULTIPLIER_RANGE = (1.05, 3.0)  # sigma_u / sigma is drawn from here
STATIONARITY_TOL = 1e-8


@dataclass(frozen=True)
class UnknownQuadratic:
    """Concrete admissible unknown term (sigma_u/2) * ||x - center||^2."""

    center: np.ndarray
    sigma_u: float

    def __post_init__(self):
        center = as_vector(self.center)
        sigma_u = float(self.sigma_u)
        if not np.isfinite(sigma_u) or sigma_u <= 0.0:
            raise ValueError(f"sigma_u must be > 0, got {sigma_u}")
        center.flags.writeable = False
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "sigma_u", sigma_u)

    def value(self, x) -> float:
        x = as_vector(x)
        return 0.5 * self.sigma_u * float(np.sum((x - self.center) ** 2))

    def gradient(self, x) -> np.ndarray:
        x = as_vector(x)
        return self.sigma_u * (x - self.center)


@dataclass(frozen=True)
class OracleSample:
    """One end-to-end trial: the sampled term, the true minimizer, the verdict."""

    unknown: UnknownQuadratic
    minimizer: np.ndarray
    verdict: MembershipVerdict


@dataclass(frozen=True)
class ValidationReport:
    """Aggregate of a necessity campaign.

    falsifications counts non-member verdicts at true minimizers (must be
    zero for a correct implementation); worst_margin is the smallest value
    of -sigma - best_score over scored trials, i.e. how close the campaign
    came to the decision boundary (negative on a falsification).
    """

    sigma: float
    classify_sigma: float
    trials: int
    member_count: int
    interior_count: int
    falsification_count: int
    worst_margin: float | None
    seed: int
    theta_steps: int
    slack: float
    sigma_multiplier_range: tuple
    falsification_details: tuple = ()

    @property
    def passed(self) -> bool:
        return self.falsification_count == 0

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "classify_sigma": self.classify_sigma,
            "trials": self.trials,
            "member": self.member_count,
            "inside_set": self.interior_count,
            "falsifications": self.falsification_count,
            "worst_margin": self.worst_margin,
            "seed": self.seed,
            "theta_steps": self.theta_steps,
            "slack": self.slack,
            "sigma_multiplier_range": list(self.sigma_multiplier_range),
            "falsification_details": [dict(d) for d in self.falsification_details],
        }


def sample_unknown(
    uset: UncertaintySet,
    sigma: float,
    seed: int,
    sigma_multiplier_range: tuple = DEFAULT_MULTIPLIER_RANGE,
) -> UnknownQuadratic:
    """Draw an admissible unknown term, deterministically in the seed.

    The center is uniform over the region (normalized normal direction times
    radius * U^(1/n) for a ball; a uniform choice for a finite set) and
    sigma_u = sigma * U(lo, hi) with the multiplier range inside [1, inf),
    so the draw is always sigma-strongly convex.
    """
    lo, hi = (float(v) for v in sigma_multiplier_range)
    if not (1.0 <= lo <= hi):
        raise ValueError(f"multiplier range must satisfy 1 <= lo <= hi, got ({lo}, {hi})")
    sigma = float(sigma)
    if sigma <= 0.0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    rng = np.random.default_rng(seed)
    region = uset.region
    if isinstance(region, Ball):
        n = region.dimension
        direction = rng.standard_normal(n)
        norm = float(np.linalg.norm(direction))
        while norm == 0.0:  # essentially impossible, but keep the draw well defined
            direction = rng.standard_normal(n)
            norm = float(np.linalg.norm(direction))
        radius = region.radius * float(rng.uniform()) ** (1.0 / n)
        center = region.center + radius * (direction / norm)
    else:
        center = region.points[int(rng.integers(region.points.shape[0]))]
    multiplier = float(rng.uniform(lo, hi))
    return UnknownQuadratic(center=center, sigma_u=sigma * multiplier)


def minimize_sum(f: KnownFunction, u: UnknownQuadratic) -> np.ndarray:
    """Exact minimizer of f + u for smooth f, via the normal equations.

    (sum_i 2 w_i Q_i + sigma_u I) x = sum_i 2 w_i Q_i m_i + sigma_u * center.
    The system is positive definite because sigma_u > 0.  Models with kinks
    must go through minimize_sum_iterative.
    """
    if f.kinks:
        raise KinkPointError("minimize_sum handles smooth models only; use minimize_sum_iterative")
    n = f.dimension
    A = u.sigma_u * np.eye(n)
    b = u.sigma_u * u.center.copy()
    for t in f.terms:
        A = A + 2.0 * t.weight * t.Q
        b = b + 2.0 * t.weight * (t.Q @ t.m)
    x = np.linalg.solve(A, b)
    residual = float(np.linalg.norm(A @ x - b))
    if residual > 1e-10 * max(1.0, float(np.linalg.norm(b))):
        raise ArithmeticError(f"normal equations solved poorly (residual {residual})")
    return x


def _hull_project(z: np.ndarray, gens: tuple) -> np.ndarray:
    """Euclidean projection of z onto the convex hull of finitely many points."""
    if len(gens) == 1:
        return gens[0]
    if len(gens) == 2:
        a, b = gens
        ab = b - a
        denom = float(ab @ ab)
        if denom == 0.0:
            return a
        t = float(np.clip((z - a) @ ab / denom, 0.0, 1.0))
        return a + t * ab
    # small simplex-constrained least squares by projected gradient
    M = np.stack(gens)  # (k, n)
    k = M.shape[0]
    lam = np.full(k, 1.0 / k)
    G = M @ M.T
    step = 1.0 / max(float(np.linalg.eigvalsh(G)[-1]), 1e-12)
    Mz = M @ z
    for _ in range(5000):
        lam = _simplex_project(lam - step * (G @ lam - Mz))
    return M.T @ lam


def _simplex_project(v: np.ndarray) -> np.ndarray:
    """Projection onto the probability simplex (sorting method)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, v.size + 1) > css)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1.0), 0.0)


def _interpreted_subgradient(f: KnownFunction, u: UnknownQuadratic, x: np.ndarray) -> np.ndarray:
    """Steepest-known subgradient of f + u at x under the kink completion.

    Away from registered kinks each kink contributes the generator active in
    its supporting max-affine envelope; this is the convex completion of the
    declared kink subdifferentials that the iterative solver minimizes.
    """
    g = _smooth_gradient(f, x) + u.gradient(x)
    for k in f.kinks:
        offsets = np.array([float(gen @ (x - k.point)) for gen in k.generators])
        g = g + k.generators[int(np.argmax(offsets))]
    return g


def _kink_stationarity_gap(f: KnownFunction, u: UnknownQuadratic, k) -> float:
    """Distance from -grad(u + smooth part) at the kink to the generator hull."""
    target = -(u.gradient(k.point) + _smooth_gradient(f, k.point))
    return float(np.linalg.norm(target - _hull_project(target, k.generators)))


def minimize_sum_iterative(
    f: KnownFunction,
    u: UnknownQuadratic,
    tol: float = STATIONARITY_TOL,
    max_iter: int = 200_000,
) -> np.ndarray:
    """Iterative minimizer of f + u, also valid for models with kinks.

    Kink models are minimized as the smooth quadratic part plus one
    max-affine envelope per registered kink (the convex completion of the
    declared kink subdifferentials).  A single kink is handled by proximal
    gradient steps with an exact hull-projection prox; multiple kinks fall
    back to plain subgradient steps.  Iterates within snapping distance of a
    kink whose generator hull certifies stationarity return that kink point
    exactly, so the returned x always satisfies: the distance from
    -grad_u(x) to the subdifferential of f at x is at most tol.
    """
    if tol <= 0.0:
        raise ValueError("tol must be > 0")
    n = f.dimension
    lip = u.sigma_u
    for t in f.terms:
        lip += 2.0 * t.weight * float(np.linalg.eigvalsh(t.Q)[-1])
    step = 1.0 / lip
    x = u.center.astype(float).copy()
    single_kink = f.kinks[0] if len(f.kinks) == 1 else None
    snap_radius = max(1e-5, 10.0 * tol)
    for iteration in range(int(max_iter)):
        # snap: an iterate close to a kink whose hull certifies stationarity
        for k in f.kinks:
            if float(np.linalg.norm(x - k.point)) <= snap_radius:
                if _kink_stationarity_gap(f, u, k) <= tol:
                    return k.point.copy()
        if f.kink_at(x) is None:
            smooth_gap = _smooth_gradient(f, x) + u.gradient(x)
            if not f.kinks and float(np.linalg.norm(smooth_gap)) <= tol:
                return x
            if f.kinks:
                # full stationarity of the completed model at a smooth point
                if float(np.linalg.norm(_interpreted_subgradient(f, u, x))) <= tol:
                    return x
        if single_kink is not None:
            v = x - step * (_smooth_gradient(f, x) + u.gradient(x))
            w = (v - single_kink.point) / step
            x = v - step * _hull_project(w, single_kink.generators)
        elif not f.kinks:
            x = x - step * (_smooth_gradient(f, x) + u.gradient(x))
        else:
            shrink = 1.0 / (1.0 + iteration * u.sigma_u * step)
            x = x - step * shrink * _interpreted_subgradient(f, u, x)
    raise ConvergenceError(f"no stationary point within tol={tol} after {max_iter} iterations")


def evaluate_trial(
    f: KnownFunction,
    uset: UncertaintySet,
    sigma: float,
    seed: int,
    theta_steps: int = DEFAULT_THETA_STEPS,
    *,
    slack: float = DEFAULT_SLACK,
    sigma_multiplier_range: tuple = DEFAULT_MULTIPLIER_RANGE,
    classify_sigma: float | None = None,
) -> OracleSample:
    """Sample one unknown term, minimize the sum exactly, classify the minimizer."""
    unknown = sample_unknown(uset, sigma, seed, sigma_multiplier_range)
    if f.kinks:
        minimizer = minimize_sum_iterative(f, unknown)
    else:
        minimizer = minimize_sum(f, unknown)
    classify_set = uset if classify_sigma is None else replace(uset, sigma=float(classify_sigma))
    verdict = classify_point(f, minimizer, classify_set, theta_steps, slack=slack)
    return OracleSample(unknown=unknown, minimizer=minimizer, verdict=verdict)


def validate_necessity(
    f: KnownFunction,
    uset: UncertaintySet,
    sigma: float,
    trials: int,
    seed: int,
    theta_steps: int = DEFAULT_THETA_STEPS,
    *,
    slack: float = DEFAULT_SLACK,
    sigma_multiplier_range: tuple = DEFAULT_MULTIPLIER_RANGE,
    classify_sigma: float | None = None,
) -> ValidationReport:
    """Run a necessity campaign: every true minimizer must classify as member.

    Per-trial sub-seeds derive deterministically from the master seed.  With
    classify_sigma set above the sampling sigma the hypothesis is knowingly
    violated and falsifications are expected; that mode exists to demonstrate
    the campaign has teeth.
    """
    trials = int(trials)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    sub_seeds = np.random.SeedSequence(int(seed)).generate_state(trials, dtype=np.uint64)
    sigma_c = float(classify_sigma) if classify_sigma is not None else float(sigma)
    member_count = 0
    interior_count = 0
    falsifications = []
    worst_margin = None
    for t in range(trials):
        sample = evaluate_trial(
            f,
            uset,
            sigma,
            int(sub_seeds[t]),
            theta_steps,
            slack=slack,
            sigma_multiplier_range=sigma_multiplier_range,
            classify_sigma=classify_sigma,
        )
        verdict = sample.verdict
        if verdict.interior:
            interior_count += 1
            continue
        if verdict.best_score is not None:
            margin = -sigma_c - verdict.best_score
            if worst_margin is None or margin < worst_margin:
                worst_margin = margin
        if verdict.member:
            member_count += 1
        elif len(falsifications) < 20:
            falsifications.append(
                {
                    "trial": t,
                    "minimizer": [float(v) for v in sample.minimizer],
                    "center": [float(v) for v in sample.unknown.center],
                    "sigma_u": sample.unknown.sigma_u,
                    "best_score": verdict.best_score,
                }
            )
    falsification_count = trials - interior_count - member_count
    return ValidationReport(
        sigma=float(sigma),
        classify_sigma=sigma_c,
        trials=trials,
        member_count=member_count,
        interior_count=interior_count,
        falsification_count=falsification_count,
        worst_margin=worst_margin,
        seed=int(seed),
        theta_steps=int(theta_steps),
        slack=float(slack),
        sigma_multiplier_range=(float(sigma_multiplier_range[0]), float(sigma_multiplier_range[1])),
        falsification_details=tuple(falsifications),
    )
