"""Tests for grid scanning and mask serialization."""

import numpy as np
import pytest

from minregion.errors import DimensionMismatchError, GridMismatchError
from minregion.funcmodel import Kink, KnownFunction, QuadraticTerm
from minregion.geometry import Ball
from minregion.membership import FinitePointSet, UncertaintySet, classify_point
from minregion.scanner import (
    GridSpec,
    MaskMetadata,
    RegionMask,
    build_grid,
    mask_subset,
    read_mask_csv,
    scan_region,
    write_mask_csv,
    write_mask_pgm,
)


def reference_function():
    return KnownFunction(terms=(QuadraticTerm(Q=np.eye(2), m=[2.0, 0.0]),))


def reference_set(sigma=2.0, radius=0.1):
    return UncertaintySet(region=Ball(center=[0.0, 0.0], radius=radius), sigma=sigma)


def test_build_grid_1d():
    pts = build_grid(GridSpec(lower=[0.0], upper=[1.0], counts=(3,)))
    assert np.array_equal(pts, [[0.0], [0.5], [1.0]])


def test_build_grid_row_major_order():
    pts = build_grid(GridSpec(lower=[0.0, 0.0], upper=[1.0, 1.0], counts=(2, 3)))
    expected = [
        [0.0, 0.0], [0.0, 0.5], [0.0, 1.0],
        [1.0, 0.0], [1.0, 0.5], [1.0, 1.0],
    ]
    assert np.array_equal(pts, expected)


def test_grid_spec_properties():
    spec = GridSpec(lower=[-1.0, -2.0], upper=[3.0, 2.0], counts=(401, 401))
    assert spec.dimension == 2
    assert spec.point_count == 160801
    assert np.allclose(spec.cell_sizes(), [0.01, 0.01])
    with pytest.raises(ValueError):
        GridSpec(lower=[0.0], upper=[0.0], counts=(5,))
    with pytest.raises(ValueError):
        GridSpec(lower=[0.0], upper=[1.0], counts=(1,))
    with pytest.raises(DimensionMismatchError):
        GridSpec(lower=[0.0, 0.0], upper=[1.0], counts=(5,))


def test_scan_matches_classifier_ball():
    f = reference_function()
    uset = reference_set()
    spec = GridSpec(lower=[-1.0, -2.0], upper=[3.0, 2.0], counts=(41, 41))
    mask = scan_region(f, uset, spec)
    pts = build_grid(spec)
    for i, p in enumerate(pts):
        assert bool(mask.membership[i]) == classify_point(f, p, uset).member


def test_scan_matches_classifier_two_terms():
    rng = np.random.default_rng(41)
    a = rng.standard_normal((2, 2))
    f = KnownFunction(
        terms=(
            QuadraticTerm(Q=a.T @ a + 0.2 * np.eye(2), m=[1.0, -0.5], weight=0.7),
            QuadraticTerm(Q=np.eye(2), m=[-1.0, 1.0], weight=1.5),
        )
    )
    uset = UncertaintySet(region=Ball(center=[0.3, 0.2], radius=0.25), sigma=1.5)
    spec = GridSpec(lower=[-2.0, -2.0], upper=[2.0, 2.0], counts=(29, 31))
    mask = scan_region(f, uset, spec)
    pts = build_grid(spec)
    for i, p in enumerate(pts):
        assert bool(mask.membership[i]) == classify_point(f, p, uset).member


def test_scan_matches_classifier_finite_set():
    f = reference_function()
    uset = UncertaintySet(
        region=FinitePointSet(points=[[0.0, 0.0], [0.5, 0.5]]), sigma=2.0
    )
    spec = GridSpec(lower=[-1.0, -1.0], upper=[2.0, 2.0], counts=(21, 21))
    mask = scan_region(f, uset, spec)
    pts = build_grid(spec)
    for i, p in enumerate(pts):
        assert bool(mask.membership[i]) == classify_point(f, p, uset).member


def test_scan_matches_classifier_with_kink_on_grid():
    f = KnownFunction(
        terms=(QuadraticTerm(Q=np.eye(2), m=[2.0, 0.0]),),
        kinks=(Kink(point=[0.5, 0.5], generators=([-3.0, 0.0], [3.0, 0.0])),),
    )
    uset = reference_set()
    spec = GridSpec(lower=[0.0, 0.0], upper=[1.0, 1.0], counts=(3, 3))  # (0.5, 0.5) on grid
    mask = scan_region(f, uset, spec)
    pts = build_grid(spec)
    for i, p in enumerate(pts):
        assert bool(mask.membership[i]) == classify_point(f, p, uset).member


def test_scan_1d_threshold():
    f = KnownFunction(terms=(QuadraticTerm(Q=np.eye(1), m=[2.0]),))
    uset = UncertaintySet(region=Ball(center=[0.0], radius=0.1), sigma=2.0)
    spec = GridSpec(lower=[-0.5], upper=[1.5], counts=(201,))
    mask = scan_region(f, uset, spec)
    xs = build_grid(spec)[:, 0]
    # members are the ball plus the segment up to (4 + sigma*eps0)/(2 + sigma)
    expected = (xs >= -0.1 - 1e-12) & (xs <= 1.05 + 1e-9)
    assert np.array_equal(mask.membership, expected)


def test_scan_huge_sigma_leaves_only_the_ball():
    f = reference_function()
    uset = reference_set(sigma=1e6)
    spec = GridSpec(lower=[-1.0, -2.0], upper=[3.0, 2.0], counts=(101, 101))
    mask = scan_region(f, uset, spec)
    pts = build_grid(spec)
    inside = np.linalg.norm(pts, axis=1) <= 0.1
    assert np.array_equal(mask.membership, inside)


def test_scan_results_deterministic():
    f = reference_function()
    uset = reference_set()
    spec = GridSpec(lower=[-1.0, -2.0], upper=[3.0, 2.0], counts=(51, 51))
    a = scan_region(f, uset, spec)
    b = scan_region(f, uset, spec)
    assert np.array_equal(a.membership, b.membership)


def test_mask_nesting_and_subset():
    f = reference_function()
    spec = GridSpec(lower=[-1.0, -2.0], upper=[3.0, 2.0], counts=(81, 81))
    tight = scan_region(f, reference_set(sigma=5.0), spec)
    loose = scan_region(f, reference_set(sigma=0.25), spec)
    assert mask_subset(tight, loose)
    assert not mask_subset(loose, tight)
    small = scan_region(f, reference_set(radius=0.1), spec)
    large = scan_region(f, reference_set(radius=0.4), spec)
    assert mask_subset(small, large)


def test_mask_subset_requires_identical_grids():
    f = reference_function()
    a = scan_region(f, reference_set(), GridSpec(lower=[-1.0, -1.0], upper=[1.0, 1.0], counts=(11, 11)))
    b = scan_region(f, reference_set(), GridSpec(lower=[-1.0, -1.0], upper=[1.0, 1.0], counts=(21, 21)))
    with pytest.raises(GridMismatchError):
        mask_subset(a, b)


def test_scan_region_symmetry():
    # the reference model is symmetric under x2 -> -x2 and the window is too
    f = reference_function()
    mask = scan_region(
        f, reference_set(), GridSpec(lower=[-1.0, -2.0], upper=[3.0, 2.0], counts=(101, 101))
    )
    img = mask.membership.reshape(101, 101)
    assert np.array_equal(img, img[:, ::-1])


def test_csv_round_trip_exact(tmp_path):
    f = reference_function()
    uset = reference_set()
    spec = GridSpec(lower=[-1.0, -2.0], upper=[3.0, 2.0], counts=(41, 41))
    mask = scan_region(f, uset, spec)
    path = tmp_path / "mask.csv"
    write_mask_csv(mask, str(path))
    loaded = read_mask_csv(str(path))
    assert np.array_equal(loaded.membership, mask.membership)
    assert loaded.grid.counts == mask.grid.counts
    assert np.array_equal(loaded.grid.lower, mask.grid.lower)
    assert np.array_equal(loaded.grid.upper, mask.grid.upper)
    assert loaded.metadata == mask.metadata


def test_csv_round_trip_finite_set(tmp_path):
    f = reference_function()
    uset = UncertaintySet(region=FinitePointSet(points=[[0.0, 0.0], [1.0, 1.0]]), sigma=1.0)
    mask = scan_region(f, uset, GridSpec(lower=[-1.0, -1.0], upper=[2.0, 2.0], counts=(13, 13)))
    path = tmp_path / "mask.csv"
    write_mask_csv(mask, str(path))
    loaded = read_mask_csv(str(path))
    assert loaded.metadata.point_count == 2
    assert loaded.metadata.eps0 is None
    assert np.array_equal(loaded.membership, mask.membership)


def test_csv_write_deterministic(tmp_path):
    f = reference_function()
    mask = scan_region(
        f, reference_set(), GridSpec(lower=[-1.0, -1.0], upper=[2.0, 2.0], counts=(17, 17))
    )
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_mask_csv(mask, str(p1))
    write_mask_csv(mask, str(p2))
    assert p1.read_bytes() == p2.read_bytes()


def test_csv_rejects_garbage(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2,3\n4,5,6\n")
    with pytest.raises(ValueError):
        read_mask_csv(str(path))


def test_pgm_frozen_bytes(tmp_path):
    # hand-built 3x2 grid; PGM rows run top-down in x2, columns left-right in x1
    spec = GridSpec(lower=[0.0, 0.0], upper=[2.0, 1.0], counts=(3, 2))
    mask = RegionMask(
        grid=spec,
        membership=np.array([True, False, False, False, False, True]),
        metadata=MaskMetadata(sigma=1.0, theta_steps=2, slack=0.0, eps0=0.1),
    )
    path = tmp_path / "mask.pgm"
    write_mask_pgm(mask, str(path))
    assert path.read_bytes() == b"P5\n3 2\n255\n" + bytes([0, 0, 255, 255, 0, 0])


def test_pgm_rejects_non_2d(tmp_path):
    spec = GridSpec(lower=[0.0, 0.0, 0.0], upper=[1.0, 1.0, 1.0], counts=(2, 2, 2))
    mask = RegionMask(
        grid=spec,
        membership=np.zeros(8, dtype=bool),
        metadata=MaskMetadata(sigma=1.0, theta_steps=2, slack=0.0, eps0=0.1),
    )
    with pytest.raises(DimensionMismatchError):
        write_mask_pgm(mask, str(tmp_path / "mask.pgm"))


def test_scan_3d_ball():
    f = KnownFunction(terms=(QuadraticTerm(Q=np.eye(3), m=[1.0, 0.0, 0.0]),))
    uset = UncertaintySet(region=Ball(center=[0.0, 0.0, 0.0], radius=0.2), sigma=1.0)
    spec = GridSpec(lower=[-1.0] * 3, upper=[2.0] * 3, counts=(7, 7, 7))
    mask = scan_region(f, uset, spec)
    pts = build_grid(spec)
    for i in range(pts.shape[0]):
        assert bool(mask.membership[i]) == classify_point(f, pts[i], uset).member


def test_scan_dimension_mismatch():
    f = reference_function()
    with pytest.raises(DimensionMismatchError):
        scan_region(f, reference_set(), GridSpec(lower=[0.0], upper=[1.0], counts=(5,)))


def test_region_mask_shape_validation():
    spec = GridSpec(lower=[0.0], upper=[1.0], counts=(5,))
    with pytest.raises(ValueError):
        RegionMask(
            grid=spec,
            membership=np.zeros(4, dtype=bool),
            metadata=MaskMetadata(sigma=1.0, theta_steps=2, slack=0.0),
        )
