"""Greedy covers of the 2-torus by Bowen balls.

Test points and candidate centres share the grid (1/n) Z^2 mod 1. In the
linear regime the Bowen ball around c is c + body (mod 1), so a centre
covers the grid translates of one fixed offset set S, computed once with
integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .action import IntegerMatrixAction
from .bowen import BowenBody, bowen_constraints, exact_volume_2d
from .errors import DimensionMismatch, GridTooCoarse
from .norms import NormSpec
from .polygon import strip_intersection

__all__ = ["CoverEstimate", "covering_number", "ball_offsets", "auto_grid_resolution"]

MIN_OFFSETS = 4


@dataclass(frozen=True)
class CoverEstimate:
    """Greedy cover of the torus grid by Bowen balls of radius eps.

    ``lower_bracket`` is (1 - delta) / vol(ball); ``discretization`` is
    C = max(1, |S| h^2 / vol(ball)), so lower_bracket <= count * C holds
    whenever the grid cover is an honest cover of measure 1 - delta.
    """

    s: float
    eps: float
    delta: float
    count: int
    grid_resolution: float
    grid_size: int
    uncovered_fraction: float
    ball_points: int
    ball_volume: float
    lower_bracket: float
    discretization: float
    vacuous: bool = False

    @property
    def bracket_holds(self) -> bool:
        return self.lower_bracket <= self.count * self.discretization * (1 + 1e-12)

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "eps": self.eps,
            "delta": self.delta,
            "count": self.count,
            "grid_resolution": self.grid_resolution,
            "grid_size": self.grid_size,
            "uncovered_fraction": self.uncovered_fraction,
            "ball_points": self.ball_points,
            "ball_volume": self.ball_volume,
            "lower_bracket": self.lower_bracket,
            "discretization": self.discretization,
            "bracket_holds": self.bracket_holds,
            "vacuous": self.vacuous,
        }


def ball_offsets(body: BowenBody, n: int) -> np.ndarray:
    """Integer pairs (i, j) with (i, j)/n in the body, as an (m, 2) array."""
    poly = strip_intersection(body.rows, body.eps)
    lo = np.floor(poly.min(axis=0) * n).astype(int) - 1
    hi = np.ceil(poly.max(axis=0) * n).astype(int) + 1
    ii, jj = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1), indexing="ij")
    pts = np.stack([ii.ravel(), jj.ravel()], axis=1).astype(np.int64)
    # |M(t) (i,j)|_inf <= eps n, with exact integer products
    mats = np.array(body.matrices, dtype=np.int64).reshape(-1, 2)
    keep = np.max(np.abs(pts @ mats.T), axis=1) <= body.eps * n
    return pts[keep]


@numba.njit(cache=True)
def _greedy(n, di, dj, allowed):
    m = di.shape[0]
    covered = np.zeros((n, n), dtype=np.bool_)
    gain = np.full((n, n), m, dtype=np.int32)
    uncovered = n * n
    count = 0
    thr = m
    while thr > 0 and uncovered > allowed:
        for a in range(n):
            for b in range(n):
                if gain[a, b] < thr:
                    continue
                count += 1
                for k in range(m):
                    pa = (a + di[k]) % n
                    pb = (b + dj[k]) % n
                    if covered[pa, pb]:
                        continue
                    covered[pa, pb] = True
                    uncovered -= 1
                    for q in range(m):
                        gain[(pa - di[q]) % n, (pb - dj[q]) % n] -= 1
                if uncovered <= allowed:
                    return count, uncovered
        thr -= 1
    return count, uncovered


def auto_grid_resolution(body: BowenBody, volume: float | None = None, points_per_side: float = 4.0) -> float:
    """Spacing that puts about points_per_side^2 grid points in the ball."""
    vol = exact_volume_2d(body).value if volume is None else volume
    return min(body.eps / 4, math.sqrt(vol) / points_per_side)


def covering_number(
    action: IntegerMatrixAction,
    norm: NormSpec,
    s: float,
    eps: float,
    delta: float,
    grid_resolution: float | None = None,
) -> CoverEstimate:
    """Greedy count of Bowen balls covering at least 1 - delta of the grid.

    The greedy picks, at every step, a centre covering the most uncovered
    grid points. ``grid_resolution=None`` selects a spacing scaled to the
    ball, so discretization effects stay comparable across s.
    """
    if action.dim != 2:
        raise DimensionMismatch(f"covering numbers are computed on the 2-torus, got dimension {action.dim}")
    if not 0 <= delta <= 1:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    body = bowen_constraints(action, norm, s, eps)
    vol = exact_volume_2d(body).value
    if grid_resolution is None:
        grid_resolution = auto_grid_resolution(body, vol)
    if not grid_resolution > 0:
        raise ValueError("grid resolution must be positive")
    if grid_resolution > eps / 4 * (1 + 1e-12):
        raise GridTooCoarse(f"grid resolution {grid_resolution:g} exceeds eps/4 = {eps / 4:g}")
    n = int(math.ceil(1 / grid_resolution - 1e-9))
    h = 1.0 / n
    lower = (1 - delta) / vol
    if delta >= 1:
        return CoverEstimate(float(s), eps, delta, 1, h, n, 1.0, 0, vol, lower, 1.0, vacuous=True)
    offsets = ball_offsets(body, n)
    if len(offsets) < MIN_OFFSETS:
        raise GridTooCoarse(f"only {len(offsets)} grid points fall in a ball; refine the grid")
    allowed = int(math.floor(delta * n * n + 1e-9))
    count, uncovered = _greedy(n, offsets[:, 0].copy(), offsets[:, 1].copy(), allowed)
    disc = max(1.0, len(offsets) * h * h / vol)
    return CoverEstimate(
        s=float(s),
        eps=eps,
        delta=delta,
        count=int(count),
        grid_resolution=h,
        grid_size=n,
        uncovered_fraction=uncovered / (n * n),
        ball_points=len(offsets),
        ball_volume=vol,
        lower_bracket=lower,
        discretization=disc,
    )
