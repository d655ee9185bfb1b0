import itertools
import math

import numpy as np
import pytest
from scipy.spatial import ConvexHull
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import LOG_B, LOG_PHI2
from slowent.bowen import (
    boundary_samples,
    bowen_constraints,
    estimate_local_slow_entropy,
    exact_volume_2d,
    fit_slope,
    max_valid_slack,
    mc_volume,
    sandwich_rectangles,
    window_points,
)
from slowent.catalog import cubic_rank2, rotation
from slowent.errors import NotPlanarFactorizable, SlackTooLarge, WraparoundRisk, ZeroAcceptance
from slowent.norms import NormSpec
from slowent.polygon import area, clip_halfplane, strip_intersection

L2_1 = NormSpec("l2", 1)
LINF_2 = NormSpec("linf", 2)


def test_polygon_helpers():
    sq = strip_intersection(np.eye(2), 1.0)
    assert area(sq) == pytest.approx(4.0)
    half = clip_halfplane(sq, np.array([1.0, 1.0]), 0.0)
    assert area(half) == pytest.approx(2.0)
    # |x| <= 1, |y| <= 1, |x + y| <= 1: hexagon of area 3
    assert area(strip_intersection(np.array([[1.0, 0], [0, 1], [1, 1]]), 1.0)) == pytest.approx(3.0)


def test_window_counts(fib, t4):
    assert bowen_constraints(fib, L2_1, 2, 0.1).points == ((-2,), (-1,), (0,), (1,), (2,))
    assert len(bowen_constraints(t4, LINF_2, 1, 0.05)) == 9
    assert len(window_points(NormSpec("l2", 2), 2)) == 13


def test_wraparound(fib):
    with pytest.raises(WraparoundRisk):
        bowen_constraints(fib, L2_1, 40, 0.1)
    with pytest.raises(WraparoundRisk):
        bowen_constraints(fib, L2_1, 1, 0.2)
    with pytest.raises(ValueError):
        bowen_constraints(fib, L2_1, 1, 0.3)


def test_single_cube(fib):
    assert exact_volume_2d(bowen_constraints(fib, L2_1, 0, 0.1)).value == pytest.approx(0.04)


def test_t4_factorizes(t4):
    body = bowen_constraints(t4, LINF_2, 2, 0.05)
    vol = exact_volume_2d(body)
    assert len(vol.factors) == 2
    assert vol.value == pytest.approx(vol.factors[0] * vol.factors[1])


def test_three_torus_does_not_factor():
    body = bowen_constraints(cubic_rank2(), NormSpec("linf", 2), 1, 0.02)
    with pytest.raises(NotPlanarFactorizable):
        exact_volume_2d(body)


def test_fibonacci_area_against_vertex_enumeration(fib):
    # independent oracle: every feasible pairwise intersection of the
    # boundary lines, then the hull area
    body = bowen_constraints(fib, L2_1, 1, 0.1)
    rows = body.rows
    verts = []
    for i, j in itertools.combinations(range(len(rows)), 2):
        a = rows[[i, j]]
        if abs(np.linalg.det(a)) < 1e-12:
            continue
        for si, sj in itertools.product((-1, 1), repeat=2):
            v = np.linalg.solve(a, 0.1 * np.array([si, sj]))
            if np.max(np.abs(rows @ v)) <= 0.1 * (1 + 1e-9):
                verts.append(v)
    hull = ConvexHull(np.array(verts))
    assert exact_volume_2d(body).value == pytest.approx(hull.volume, rel=1e-12)


def test_slack_bound(fib_spec):
    with pytest.raises(SlackTooLarge):
        sandwich_rectangles(fib_spec, None, L2_1, 8, 0.1)
    assert max_valid_slack(fib_spec, L2_1) == pytest.approx(LOG_PHI2 / 200)


def test_sandwich_formula(fib_spec):
    box = sandwich_rectangles(fib_spec, None, L2_1, 8, 0.004)
    assert box.inner[0] == pytest.approx(0.004 * math.exp(-(LOG_PHI2 + 0.008) * 8) / 3)
    assert box.outer[0] == pytest.approx(3 * 0.004 * math.exp(-(LOG_PHI2 - 0.008) * 8))
    zero = sandwich_rectangles(fib_spec, None, L2_1, 0, 0.004)
    assert zero.inner[0] == pytest.approx(0.004 / 3) and zero.outer[0] == pytest.approx(0.012)
    assert all(i <= o for i, o in zip(box.inner, box.outer))
    assert box.predicted_rate == pytest.approx(2 * LOG_PHI2)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 12), st.floats(0.005, 0.15))
def test_sandwich_holds_on_fibonacci(fib, fib_spec, s, eps):
    body = bowen_constraints(fib, L2_1, s, eps)
    box = sandwich_rectangles(fib_spec, None, L2_1, s, max_valid_slack(fib_spec, L2_1), eps=eps)
    assert body.contains(box.inner_vertices()).all()
    assert box.outer_contains(boundary_samples(body, 300, seed=s)).all()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 8), st.floats(0.005, 0.1), st.floats(0.005, 0.1))
def test_volume_monotone(fib, s, e1, e2):
    lo, hi = sorted((e1, e2))
    v = lambda s_, e: exact_volume_2d(bowen_constraints(fib, L2_1, s_, e)).value
    assert v(s + 1, lo) <= v(s, lo) * (1 + 1e-12)
    assert v(s, lo) <= v(s, hi) * (1 + 1e-12)


def test_reflection_symmetry(fib_spec, fib):
    body = bowen_constraints(fib, L2_1, 5, 0.02)
    assert exact_volume_2d(body).value == exact_volume_2d(body.reflect()).value
    box = sandwich_rectangles(fib_spec, None, L2_1, 5, 0.004, eps=0.02)
    assert mc_volume(body, box, 20_000, 3).value == mc_volume(body.reflect(), box, 20_000, 3).value


def test_mc_cube_exact(fib, fib_spec):
    body = bowen_constraints(fib, L2_1, 0, 0.1)
    box = sandwich_rectangles(fib_spec, None, L2_1, 0, 0.004, eps=0.1)
    # replace the box by the body's own cube in the standard basis
    cube = type(box)(
        inner=box.inner, outer=(0.1, 0.1), basis=np.eye(2), functional=box.functional,
        slack=box.slack, radius=box.radius, s=0.0, a=box.a, predicted_rate=box.predicted_rate,
    )
    est = mc_volume(body, cube, 10_000, 0)
    assert est.accepted == 10_000 and est.value == pytest.approx(0.04, rel=1e-12)


def test_mc_rejects_few_samples(fib, fib_spec):
    body = bowen_constraints(fib, L2_1, 3, 0.02)
    box = sandwich_rectangles(fib_spec, None, L2_1, 3, 0.004, eps=0.02)
    with pytest.raises(ValueError):
        mc_volume(body, box, 100, 0)


def test_mc_determinism_and_stderr(fib, fib_spec):
    body = bowen_constraints(fib, L2_1, 6, 0.02)
    box = sandwich_rectangles(fib_spec, None, L2_1, 6, 0.004, eps=0.02)
    a = mc_volume(body, box, 1_000_000, 42)
    assert a == mc_volume(body, box, 1_000_000, 42)
    r = a.accepted / a.samples
    assert a.stderr == pytest.approx(a.value * math.sqrt((1 - r) / (r * a.samples)))
    assert abs(a.value - exact_volume_2d(body).value) <= 3 * a.stderr


def test_mc_t4_matches_polygons(t4, t4_spec):
    body = bowen_constraints(t4, LINF_2, 3, 0.05)
    box = sandwich_rectangles(t4_spec, None, LINF_2, 3, max_valid_slack(t4_spec, LINF_2), eps=0.05)
    est = mc_volume(body, box, 1_000_000, 42)
    assert abs(est.value - exact_volume_2d(body).value) <= 3 * est.stderr


def test_zero_acceptance_reports_bound(fib, fib_spec):
    body = bowen_constraints(fib, L2_1, 3, 0.02)
    box = sandwich_rectangles(fib_spec, None, L2_1, 3, 0.004, eps=0.02)
    # a far-too-large box in a useless basis starves the sampler
    huge = type(box)(
        inner=box.inner, outer=(1e6, 1e6), basis=box.basis, functional=box.functional,
        slack=box.slack, radius=box.radius, s=3.0, a=box.a, predicted_rate=box.predicted_rate,
    )
    with pytest.raises(ZeroAcceptance) as info:
        mc_volume(body, huge, 10_000, 0)
    assert info.value.upper_bound > 0


def test_fit_slope_exact_line():
    fit = fit_slope([1, 2, 3, 4], [3.0, 5.0, 7.0, 9.0])
    assert fit.slope == pytest.approx(2.0) and fit.r_squared == pytest.approx(1.0)
    assert fit.dropped == ()
    flat = fit_slope([1, 2, 3], [1.0, 1.0, 1.0])
    assert flat.slope == pytest.approx(0.0, abs=1e-12) and flat.r_squared == 1.0
    with pytest.raises(ValueError):
        fit_slope([1, 2], [0.0, 1.0])
    with pytest.raises(ValueError):
        fit_slope([1, 3, 2], [0.0, 1.0, 2.0])


def test_fit_drops_transient():
    s = [1, 2, 3, 4, 5, 6]
    y = [0.0, 10.0, 12.0, 14.0, 16.0, 18.0]
    fit = fit_slope(s, y)
    assert fit.dropped == (1.0,)
    assert fit.slope == pytest.approx(2.0)


def test_fibonacci_slope(fib):
    fit = estimate_local_slow_entropy(fib, L2_1, None, 0.02, range(4, 13))
    assert abs(fit.slope - 2 * LOG_PHI2) < 0.1 * 2 * LOG_PHI2
    assert fit.formula_delta == pytest.approx(2 * LOG_PHI2)


def test_isometry_slope_vanishes():
    fit = estimate_local_slow_entropy(rotation(), L2_1, None, 0.05, [1, 2, 3, 4])
    assert abs(fit.slope) < 0.05
    assert fit.formula_delta == 0
