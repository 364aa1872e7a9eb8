"""Command-line interface: check one point, scan a grid, or validate by sampling.

Exit codes: 0 = member / success, 1 = negative result (non-member verdict or
a validation campaign with falsifications), 2 = usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionMismatchError
from .funcmodel import Kink, KnownFunction, QuadraticTerm
from .geometry import Ball
from .membership import (
    DEFAULT_SLACK,
    DEFAULT_THETA_STEPS,
    FinitePointSet,
    UncertaintySet,
    classify_point,
)
from .oracle import DEFAULT_MULTIPLIER_RANGE, validate_necessity
from .scanner import GridSpec, scan_region, write_mask_csv, write_mask_pgm


@dataclass(frozen=True)
class ProblemConfig:
    """Parsed problem definition plus the raw document for report echoes."""

    known_function: KnownFunction
    uncertainty: UncertaintySet
    grid: GridSpec | None
    theta_steps: int
    slack: float
    raw: dict


def _fail(path: str, message: str):
    raise ConfigError(f"{path}: {message}")


def _require(mapping: dict, key: str, path: str):
    if key not in mapping:
        _fail(f"{path}.{key}", "missing required field")
    return mapping[key]


def _as_vector_field(value, path: str) -> list:
    if not isinstance(value, list) or not value or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        _fail(path, "expected a nonempty list of numbers")
    return [float(v) for v in value]


def _as_matrix_field(value, path: str) -> list:
    if not isinstance(value, list) or not value:
        _fail(path, "expected a matrix as a list of rows (or a flat row-major list)")
    if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        n = int(round(len(value) ** 0.5))
        if n * n != len(value):
            _fail(path, f"flat matrix of length {len(value)} is not square")
        return [[float(value[i * n + j]) for j in range(n)] for i in range(n)]
    rows = [_as_vector_field(row, f"{path}[{i}]") for i, row in enumerate(value)]
    if any(len(row) != len(rows) for row in rows):
        _fail(path, "matrix rows must form a square matrix")
    return rows


def _positive_number(value, path: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or float(value) <= 0.0:
        _fail(path, f"expected a positive number, got {value!r}")
    return float(value)


def _parse_known_function(doc: dict) -> KnownFunction:
    spec = _require(doc, "known_function", "$")
    if not isinstance(spec, dict):
        _fail("$.known_function", "expected an object")
    terms_doc = _require(spec, "terms", "$.known_function")
    if not isinstance(terms_doc, list) or not terms_doc:
        _fail("$.known_function.terms", "expected a nonempty list")
    terms = []
    for i, term in enumerate(terms_doc):
        path = f"$.known_function.terms[{i}]"
        if not isinstance(term, dict):
            _fail(path, "expected an object with Q, m, weight")
        try:
            terms.append(
                QuadraticTerm(
                    Q=_as_matrix_field(_require(term, "Q", path), f"{path}.Q"),
                    m=_as_vector_field(_require(term, "m", path), f"{path}.m"),
                    weight=_positive_number(term.get("weight", 1.0), f"{path}.weight"),
                )
            )
        except (ValueError, DimensionMismatchError) as exc:
            if isinstance(exc, ConfigError):
                raise
            _fail(path, str(exc))
    kinks = []
    for i, kink in enumerate(spec.get("kinks", [])):
        path = f"$.known_function.kinks[{i}]"
        if not isinstance(kink, dict):
            _fail(path, "expected an object with point and generators")
        gens_doc = _require(kink, "generators", path)
        if not isinstance(gens_doc, list) or not gens_doc:
            _fail(f"{path}.generators", "expected a nonempty list of vectors")
        try:
            kinks.append(
                Kink(
                    point=_as_vector_field(_require(kink, "point", path), f"{path}.point"),
                    generators=tuple(
                        _as_vector_field(g, f"{path}.generators[{j}]")
                        for j, g in enumerate(gens_doc)
                    ),
                )
            )
        except (ValueError, DimensionMismatchError) as exc:
            if isinstance(exc, ConfigError):
                raise
            _fail(path, str(exc))
    try:
        return KnownFunction(terms=tuple(terms), kinks=tuple(kinks))
    except (ValueError, DimensionMismatchError) as exc:
        _fail("$.known_function", str(exc))


def _parse_uncertainty(doc: dict, sigma: float) -> UncertaintySet:
    spec = _require(doc, "uncertainty", "$")
    if not isinstance(spec, dict):
        _fail("$.uncertainty", "expected an object")
    kind = _require(spec, "type", "$.uncertainty")
    try:
        if kind == "ball":
            region = Ball(
                center=_as_vector_field(
                    _require(spec, "center", "$.uncertainty"), "$.uncertainty.center"
                ),
                radius=_positive_number(
                    _require(spec, "radius", "$.uncertainty"), "$.uncertainty.radius"
                ),
            )
        elif kind == "points":
            pts = _require(spec, "points", "$.uncertainty")
            if not isinstance(pts, list) or not pts:
                _fail("$.uncertainty.points", "expected a nonempty list of vectors")
            region = FinitePointSet(
                points=np.array(
                    [
                        _as_vector_field(p, f"$.uncertainty.points[{i}]")
                        for i, p in enumerate(pts)
                    ]
                )
            )
        else:
            _fail("$.uncertainty.type", f"expected 'ball' or 'points', got {kind!r}")
        return UncertaintySet(region=region, sigma=sigma)
    except (ValueError, DimensionMismatchError) as exc:
        if isinstance(exc, ConfigError):
            raise
        _fail("$.uncertainty", str(exc))


def _parse_grid(doc: dict) -> GridSpec | None:
    if "grid" not in doc:
        return None
    spec = doc["grid"]
    if not isinstance(spec, dict):
        _fail("$.grid", "expected an object with lower, upper, counts")
    counts = _require(spec, "counts", "$.grid")
    if not isinstance(counts, list) or not all(
        isinstance(c, int) and not isinstance(c, bool) for c in counts
    ):
        _fail("$.grid.counts", "expected a list of integers")
    try:
        return GridSpec(
            lower=_as_vector_field(_require(spec, "lower", "$.grid"), "$.grid.lower"),
            upper=_as_vector_field(_require(spec, "upper", "$.grid"), "$.grid.upper"),
            counts=tuple(counts),
        )
    except (ValueError, DimensionMismatchError) as exc:
        if isinstance(exc, ConfigError):
            raise
        _fail("$.grid", str(exc))


def load_config(path: str) -> ProblemConfig:
    """Parse and validate a problem-definition JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    sigma = _positive_number(_require(doc, "sigma", "$"), "$.sigma")
    f = _parse_known_function(doc)
    uset = _parse_uncertainty(doc, sigma)
    grid = _parse_grid(doc)
    theta_steps = doc.get("theta_steps", DEFAULT_THETA_STEPS)
    if not isinstance(theta_steps, int) or isinstance(theta_steps, bool) or theta_steps < 2:
        _fail("$.theta_steps", f"expected an integer >= 2, got {theta_steps!r}")
    slack = doc.get("slack", DEFAULT_SLACK)
    if not isinstance(slack, (int, float)) or isinstance(slack, bool) or float(slack) < 0.0:
        _fail("$.slack", f"expected a number >= 0, got {slack!r}")
    if f.dimension != uset.dimension:
        _fail("$", f"known_function is {f.dimension}-D but uncertainty is {uset.dimension}-D")
    if grid is not None and grid.dimension != f.dimension:
        _fail("$.grid", f"grid is {grid.dimension}-D but the problem is {f.dimension}-D")
    return ProblemConfig(
        known_function=f,
        uncertainty=uset,
        grid=grid,
        theta_steps=int(theta_steps),
        slack=float(slack),
        raw=doc,
    )


def _parse_point(text: str, dimension: int) -> np.ndarray:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"point {text!r}: expected comma-separated numbers") from None
    if len(values) != dimension:
        raise ConfigError(
            f"point {text!r} has dimension {len(values)}, problem is {dimension}-D"
        )
    return np.array(values)


def _apply_overrides(config: ProblemConfig, args) -> ProblemConfig:
    theta_steps = args.theta_steps if args.theta_steps is not None else config.theta_steps
    slack = args.slack if args.slack is not None else config.slack
    uset = config.uncertainty
    if getattr(args, "sigma_override", None) is not None:
        if args.sigma_override <= 0.0:
            raise ConfigError(f"--sigma-override must be > 0, got {args.sigma_override}")
        uset = UncertaintySet(region=uset.region, sigma=float(args.sigma_override))
    if theta_steps < 2:
        raise ConfigError(f"--theta-steps must be >= 2, got {theta_steps}")
    if slack < 0.0:
        raise ConfigError(f"--slack must be >= 0, got {slack}")
    return ProblemConfig(
        known_function=config.known_function,
        uncertainty=uset,
        grid=config.grid,
        theta_steps=int(theta_steps),
        slack=float(slack),
        raw=config.raw,
    )


def _format_vector(v) -> str:
    return "[" + ", ".join(repr(float(x)) for x in v) + "]"


def _cmd_check(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    point = _parse_point(args.point, config.uncertainty.dimension)
    verdict = classify_point(
        config.known_function,
        point,
        config.uncertainty,
        config.theta_steps,
        slack=config.slack,
    )
    print(f"point: {_format_vector(point)}")
    print(f"member: {'yes' if verdict.member else 'no'}")
    if verdict.interior:
        print("reason: inside the uncertainty set")
    if verdict.best_score is not None:
        print(f"best_score: {verdict.best_score!r} (threshold {-config.uncertainty.sigma + config.slack!r})")
    w = verdict.witness
    if w is not None and w.x_u is not None:
        extra = f", theta={w.theta!r}" if w.theta is not None else ""
        tail = ", sweep truncated at first hit" if w.truncated else ""
        print(f"witness: x_u={_format_vector(w.x_u)}, g={_format_vector(w.g)}{extra}{tail}")
    return 0 if verdict.member else 1


def _cmd_scan(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    if config.grid is None:
        raise ConfigError(f"{args.config}: scan requires a 'grid' section")
    if args.format == "pgm" and config.grid.dimension != 2:
        raise ConfigError("PGM output is only defined for 2-D grids")
    started = time.perf_counter()
    mask = scan_region(
        config.known_function,
        config.uncertainty,
        config.grid,
        config.theta_steps,
        slack=config.slack,
    )
    elapsed = time.perf_counter() - started
    if args.format == "csv":
        write_mask_csv(mask, args.output)
    else:
        write_mask_pgm(mask, args.output)
    counts = "x".join(str(c) for c in config.grid.counts)
    print(
        f"scanned {counts} grid in {elapsed:.2f}s: "
        f"{mask.member_count} of {mask.grid.point_count} points are candidate minimizers"
    )
    print(f"wrote {args.output}")
    return 0


def _cmd_validate(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    if args.trials < 1:
        raise ConfigError(f"--trials must be >= 1, got {args.trials}")
    sampling_sigma = float(config.raw["sigma"])
    classify_sigma = (
        float(args.sigma_override) if args.sigma_override is not None else None
    )
    report = validate_necessity(
        config.known_function,
        UncertaintySet(region=config.uncertainty.region, sigma=sampling_sigma),
        sampling_sigma,
        args.trials,
        args.seed,
        config.theta_steps,
        slack=config.slack,
        classify_sigma=classify_sigma,
    )
    payload = dict(report.to_dict(), config=config.raw)
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.report is not None:
        with open(args.report, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.report}")
    else:
        print(text)
    print(
        f"trials={report.trials} member={report.member_count} "
        f"inside_set={report.interior_count} falsifications={report.falsification_count}"
    )
    return 0 if report.passed else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minregion",
        description=(
            "Decide which points can minimize a partially known strongly convex "
            "objective: a fully known quadratic model plus an unknown term "
            "constrained only by a strong-convexity constant and a set "
            "containing its minimizer."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, sigma_override_help):
        p.add_argument("config", help="problem definition JSON file")
        p.add_argument("--theta-steps", type=int, default=None, help="sweep samples for ball sets")
        p.add_argument("--slack", type=float, default=None, help="additive slack on the -sigma threshold")
        p.add_argument("--sigma-override", type=float, default=None, help=sigma_override_help)

    p_check = sub.add_parser("check", help="classify one query point (exit 0 member, 1 non-member)")
    common(p_check, "classify with this sigma instead of the configured one")
    p_check.add_argument("point", help="comma-separated coordinates, e.g. '1.0,0.0'")

    p_scan = sub.add_parser("scan", help="scan the configured grid and write a mask")
    common(p_scan, "scan with this sigma instead of the configured one")
    p_scan.add_argument("--output", "-o", required=True, help="output file path")
    p_scan.add_argument("--format", choices=("csv", "pgm"), default="csv", help="mask format (default csv)")

    p_val = sub.add_parser(
        "validate",
        help="sample admissible unknown terms and verify their minimizers classify as members",
    )
    common(
        p_val,
        "classify with this sigma while sampling with the configured one "
        "(inflating it demonstrates falsification)",
    )
    p_val.add_argument("--trials", type=int, default=1000, help="number of sampled trials")
    p_val.add_argument("--seed", type=int, default=0, help="master seed for the campaign")
    p_val.add_argument("--report", default=None, help="write the JSON report here instead of stdout")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"check": _cmd_check, "scan": _cmd_scan, "validate": _cmd_validate}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
