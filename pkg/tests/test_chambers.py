import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slowent.action import LyapunovFunctional, LyapunovSpectrum
from slowent.chambers import (
    HyperplaneArrangement,
    Regular,
    Singular,
    classify_element,
    enumerate_chambers,
    lyapunov_hyperplanes,
    pick_generic_element,
    separation_score,
)
from slowent.errors import AllZeroSpectrum, NoSeparatingElement, RankTooLarge, ZeroVector
from slowent.norms import NormSpec


def spectrum_of(coeffs, mult=None):
    mult = mult or [1] * len(coeffs)
    fs = tuple(LyapunovFunctional(tuple(map(float, c)), m) for c, m in zip(coeffs, mult))
    return LyapunovSpectrum(fs, dim=sum(mult), rank=len(coeffs[0]))


def test_fibonacci_single_hyperplane(fib_spec):
    arr = lyapunov_hyperplanes(fib_spec)
    assert arr.normals == ((1.0,),)
    assert arr.source_indices == ((0, 1),)
    ch = enumerate_chambers(arr)
    assert [c.representative for c in ch] == [(1.0,), (-1.0,)]


def test_t4_arrangement(t4_spec):
    arr = lyapunov_hyperplanes(t4_spec)
    assert np.allclose(arr.matrix, [[1, 0], [0, 1]])
    ch = enumerate_chambers(arr)
    assert [c.sign_vector for c in ch] == [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    for c in ch:
        assert classify_element(t4_spec, c.representative) == Regular(c.sign_vector)


def test_all_zero_spectrum():
    with pytest.raises(AllZeroSpectrum):
        lyapunov_hyperplanes(spectrum_of([[0.0, 0.0]], [2]))


def test_three_lines():
    spec = spectrum_of([[1, 0], [0, 1], [1, 1], [-2, -2]])
    assert len(enumerate_chambers(lyapunov_hyperplanes(spec))) == 6


def test_four_planes_in_space():
    # generic central arrangement of n planes in R^3: n(n-1) + 2 regions
    normals = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]]
    arr = HyperplaneArrangement(tuple(tuple(map(float, n)) for n in normals), ((0,), (1,), (2,), (3,)), 3)
    assert len(enumerate_chambers(arr)) == 14


def test_rank_five_rejected():
    arr = HyperplaneArrangement(((1.0, 0, 0, 0, 0),), ((0,),), 5)
    with pytest.raises(RankTooLarge):
        enumerate_chambers(arr)


def test_classify(t4_spec, fib_spec):
    assert classify_element(t4_spec, [1, 1]) == Regular((1, 1))
    assert classify_element(t4_spec, [1, 0]) == Singular((1,))
    with pytest.raises(ZeroVector):
        classify_element(t4_spec, [0, 0])
    # the test is relative to |t|: tiny multiples of regular elements stay regular
    assert classify_element(fib_spec, [1e-12], tol=1e-6).regular


@settings(max_examples=50, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(1e-6, 1e6))
def test_classification_is_scale_invariant(x, y, lam):
    spec = spectrum_of([[1, 0], [0, 1], [1, -1], [-1, 0]])
    if math.hypot(x, y) < 1e-6:
        return
    assert classify_element(spec, [x, y]) == classify_element(spec, [lam * x, lam * y])


def test_generic_elements(fib_spec, t4_spec):
    t = pick_generic_element(fib_spec, NormSpec("l2", 1))
    assert abs(t[0]) == pytest.approx(1.0)
    assert separation_score(fib_spec, t) == pytest.approx(0.9624236501, abs=1e-9)
    t = pick_generic_element(t4_spec, NormSpec("linf", 2))
    assert separation_score(t4_spec, t) > 0.17
    assert max(abs(t)) == pytest.approx(1.0)


def test_generic_element_score_beats_grid(t4_spec):
    # grid-search oracle over the boundary of the unit square
    grid = np.linspace(-1, 1, 401)
    pts = [(1.0, y) for y in grid] + [(-1.0, y) for y in grid] + [(x, 1.0) for x in grid] + [(x, -1.0) for x in grid]
    best = max(separation_score(t4_spec, p) for p in pts)
    t = pick_generic_element(t4_spec, NormSpec("linf", 2))
    assert separation_score(t4_spec, t) >= best - 1e-3


def test_duplicated_functionals_cannot_separate():
    spec = spectrum_of([[1.0, 0.5], [1.0, 0.5], [-2.0, -1.0]])
    with pytest.raises(NoSeparatingElement):
        pick_generic_element(spec, NormSpec("l2", 2))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_random_planar_chamber_count(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    angles = rng.uniform(0, math.pi, n)
    coeffs = [[math.cos(a), math.sin(a)] for a in angles]
    arr = lyapunov_hyperplanes(spectrum_of(coeffs))
    if len(arr.normals) < n:
        return
    chambers = enumerate_chambers(arr)
    assert len(chambers) == 2 * n
    signs = {c.sign_vector for c in chambers}
    assert all(tuple(-s for s in sv) in signs for sv in signs)
