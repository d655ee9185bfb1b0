import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slowent.bowen import bowen_constraints
from slowent.catalog import t4_block
from slowent.cover import ball_offsets, covering_number
from slowent.errors import DimensionMismatch, GridTooCoarse
from slowent.norms import NormSpec

L2_1 = NormSpec("l2", 1)


def test_quarter_balls(fib):
    c = covering_number(fib, L2_1, 0, 0.25, 0.0, 1 / 16)
    assert 4 <= c.count <= 9
    assert c.uncovered_fraction == 0


def test_vacuous(fib):
    c = covering_number(fib, L2_1, 0, 0.1, 1.0)
    assert c.count == 1 and c.vacuous


def test_grid_too_coarse(fib, t4):
    with pytest.raises(GridTooCoarse):
        covering_number(fib, L2_1, 1, 0.1, 0.05, 0.05)
    with pytest.raises(DimensionMismatch):
        covering_number(t4, NormSpec("linf", 2), 1, 0.05, 0.05)


def test_offsets_match_float_membership(fib):
    body = bowen_constraints(fib, L2_1, 3, 0.1)
    n = 400
    off = ball_offsets(body, n)
    assert body.contains(off / n).all()
    # a brute-force scan of the bounding square finds the same points
    r = int(0.1 * n) + 1
    ii, jj = np.meshgrid(np.arange(-r, r + 1), np.arange(-r, r + 1), indexing="ij")
    pts = np.stack([ii.ravel(), jj.ravel()], axis=1)
    assert len(off) == int(body.contains(pts / n).sum())


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 3), st.floats(0.05, 0.15), st.floats(0.0, 0.3))
def test_bracket_and_coverage(fib, s, eps, delta):
    c = covering_number(fib, L2_1, s, eps, delta)
    assert c.count >= 1
    assert c.uncovered_fraction <= delta + 1e-12
    assert c.bracket_holds


def test_count_monotone(fib):
    h = 1 / 600
    counts_s = [covering_number(fib, L2_1, s, 0.1, 0.05, h).count for s in (1, 2, 3)]
    assert counts_s == sorted(counts_s)
    counts_eps = [covering_number(fib, L2_1, 2, e, 0.05, h).count for e in (0.05, 0.08, 0.1)]
    assert counts_eps == sorted(counts_eps, reverse=True)
    counts_delta = [covering_number(fib, L2_1, 2, 0.1, d, h).count for d in (0.0, 0.1, 0.3)]
    assert counts_delta == sorted(counts_delta, reverse=True)
