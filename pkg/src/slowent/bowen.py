"""Bowen balls of linear toral actions: construction, volume, and the decay
rate of their Haar measure in the window radius."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .action import IntegerMatrixAction, LyapunovSpectrum, compute_spectrum
from .entropy import GammaAssignment, slow_entropy
from .errors import (
    EmptyWindow,
    NotPlanarFactorizable,
    SlackTooLarge,
    WraparoundRisk,
    ZeroAcceptance,
)
from .norms import NormSpec, dual_max, norm_value
from .polygon import area, strip_intersection

log = logging.getLogger(__name__)

__all__ = [
    "BowenBody",
    "SandwichRectangles",
    "VolumeEstimate",
    "SlopeFit",
    "window_points",
    "bowen_constraints",
    "sandwich_rectangles",
    "exact_volume_2d",
    "mc_volume",
    "fit_slope",
    "estimate_local_slow_entropy",
    "boundary_samples",
    "body_volume",
    "max_valid_slack",
    "planar_factors",
]

# entries beyond this make |M(t)| |M(-t)| exceed double precision
FLOAT_FIDELITY = 2.0**26
MC_BATCH = 1 << 16


@dataclass(frozen=True)
class BowenBody:
    """{v in R^d : |M(t) v|_inf <= eps for every lattice t with p(t) <= s}.

    This is the Bowen ball around the base point in linear coordinates;
    for toral automorphisms with Haar measure the base point is irrelevant
    and is fixed at 0.
    """

    points: tuple[tuple[int, ...], ...]
    matrices: tuple[tuple[tuple[int, ...], ...], ...]
    s: float
    eps: float
    norm_used: NormSpec
    dim: int

    @property
    def rows(self) -> np.ndarray:
        """All constraint rows stacked, as floats (n_constraints * d, d)."""
        return np.array(self.matrices, dtype=float).reshape(-1, self.dim)

    def __len__(self) -> int:
        return len(self.points)

    def contains(self, v: np.ndarray) -> np.ndarray:
        v = np.atleast_2d(v)
        return np.max(np.abs(v @ self.rows.T), axis=1) <= self.eps * (1 + 1e-12)

    def reflect(self) -> "BowenBody":
        """The body under v -> -v, written with negated constraint rows."""
        neg = tuple(tuple(tuple(-x for x in row) for row in m) for m in self.matrices)
        return BowenBody(self.points, neg, self.s, self.eps, self.norm_used, self.dim)


def window_points(norm: NormSpec, s: float) -> list[tuple[int, ...]]:
    """Lattice points t in Z^k with p(t) <= s, in lexicographic order."""
    k = norm.dim
    bounds = []
    for j in range(k):
        e = np.zeros(k)
        e[j] = 1.0
        bounds.append(int(math.floor(s * dual_max(norm, e)[0] + 1e-9)))
    pts = []
    for t in itertools.product(*[range(-b, b + 1) for b in bounds]):
        if norm_value(norm, t) <= s * (1 + 1e-12) + 1e-12:
            pts.append(t)
    return pts


def _inf_norm(m) -> int:
    return max(sum(abs(x) for x in row) for row in m)


def _check_linear_regime(action: IntegerMatrixAction, points, matrices, eps: float) -> None:
    if len(points) == 1:
        return
    for j, (g, gi) in enumerate(zip(action.generators, action.inverse_generators())):
        for mat, label in ((g, f"A_{j}"), (gi, f"A_{j}^-1")):
            if _inf_norm(mat) * eps > 0.5:
                raise WraparoundRisk(
                    f"one step of {label} maps the eps-cube outside the injectivity box "
                    f"(|{label}|_inf * eps = {_inf_norm(mat) * eps:.3g} > 1/2)"
                )
    # each window point must be reachable from 0 by unit steps inside the
    # window, so the chart body and the torus Bowen ball coincide
    inside = set(points)
    k = action.rank
    seen = {(0,) * k}
    frontier = [(0,) * k]
    while frontier:
        t = frontier.pop()
        for j in range(k):
            for sgn in (1, -1):
                u = t[:j] + (t[j] + sgn,) + t[j + 1 :]
                if u in inside and u not in seen:
                    seen.add(u)
                    frontier.append(u)
    if len(seen) != len(inside):
        raise WraparoundRisk("window is not connected by unit steps; linearization is not certified")
    worst = max(_inf_norm(m) for m in matrices)
    if worst > FLOAT_FIDELITY:
        raise WraparoundRisk(
            f"matrix entries reach {float(worst):.3e}: the body is below double-precision resolution"
        )


def bowen_constraints(action: IntegerMatrixAction, norm: NormSpec, s: float, eps: float) -> BowenBody:
    """Constraint matrices M(t) = prod A_j^t_j over the window p(t) <= s.

    Matrices are exact integers. Raises WraparoundRisk when the
    linearized body cannot be trusted to equal the torus Bowen ball.
    """
    if not 0 < eps <= 0.25:
        raise ValueError(f"eps must lie in (0, 1/4], got {eps}")
    if s < 0:
        raise ValueError("window radius must be nonnegative")
    if norm.dim != action.rank:
        raise ValueError(f"norm on R^{norm.dim} for a rank-{action.rank} action")
    points = window_points(norm, s)
    if not points:
        raise EmptyWindow(f"no lattice point with p(t) <= {s}")
    matrices = [action.element(t) for t in points]
    _check_linear_regime(action, points, matrices, eps)
    return BowenBody(tuple(points), tuple(matrices), float(s), float(eps), norm, action.dim)


def boundary_samples(body: BowenBody, n: int, seed: int = 0) -> np.ndarray:
    """n points on the body's boundary along random rays from 0."""
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n, body.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    reach = np.max(np.abs(dirs @ body.rows.T), axis=1)
    return dirs * (body.eps / reach)[:, None]


# ---------------------------------------------------------------------------
# analytic sandwich


@dataclass(frozen=True)
class SandwichRectangles:
    """Inner and outer boxes for the Bowen body in the joint eigenbasis.

    Coordinates u relate to the body by v = basis @ u. ``inner`` and
    ``outer`` are per-coordinate half-widths; ``functional`` names the
    Lyapunov functional each coordinate belongs to.
    """

    inner: tuple[float, ...]
    outer: tuple[float, ...]
    basis: np.ndarray = field(repr=False, compare=False)
    functional: tuple[int, ...]
    slack: float
    radius: float
    s: float
    a: tuple[float, ...]
    predicted_rate: float

    def inner_vertices(self) -> np.ndarray:
        h = np.asarray(self.inner)
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=len(h))))
        return (signs * h) @ self.basis.T

    def outer_contains(self, v: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
        u = np.linalg.solve(self.basis, np.atleast_2d(v).T).T
        return np.all(np.abs(u) <= np.asarray(self.outer) * (1 + rtol), axis=1)

    def outer_volume(self) -> float:
        return abs(np.linalg.det(self.basis)) * float(np.prod(2 * np.asarray(self.outer)))

    def inner_volume(self) -> float:
        return abs(np.linalg.det(self.basis)) * float(np.prod(2 * np.asarray(self.inner)))


def max_valid_slack(spec: LyapunovSpectrum, norm: NormSpec, m: int | None = None) -> float:
    """Largest slack allowed by eps <= min{1, a_1, ..., a_D} / (100 m)
    (chart constant l = 1; zero exponents are neutral and excluded)."""
    m = spec.dim if m is None else m
    a = [dual_max(norm, f.vector)[0] for _, f in spec.nonorbit() if not f.is_zero(spec.grouping_tolerance)]
    return min([1.0] + a) / (100 * m)


def sandwich_rectangles(
    spec: LyapunovSpectrum,
    gammas: GammaAssignment | None,
    norm: NormSpec,
    s: float,
    eps_slack: float,
    eps: float | None = None,
) -> SandwichRectangles:
    """Boxes bracketing the Bowen body with identity charts (K = l = 1).

    With a_i = max_{p(t)<=1} chi_i(t), m = d and radius eps (defaulting to
    the slack), the i-th Lyapunov block gets the ball radii

        inner  eps e^{-(a_i + 2 slack) s} / (m + 1)
        outer  (m + 1) eps e^{-(a_i - 2 slack) s}

    and zero exponents get eps e^{-2 slack s} / (m + 1) and (m + 1) eps.
    Inner boxes are inscribed in the inner balls, outer boxes circumscribe
    the outer balls.
    """
    if spec.subspaces is None:
        raise ValueError("spectrum carries no Lyapunov subspaces; use compute_spectrum")
    if eps_slack <= 0:
        raise ValueError("slack must be positive")
    m = spec.dim
    bound = max_valid_slack(spec, norm, m)
    if eps_slack > bound * (1 + 1e-12):
        raise SlackTooLarge(f"slack {eps_slack:g} exceeds min(1, a_i) / (100 m) = {bound:.4g}")
    radius = eps_slack if eps is None else eps
    inner, outer, owner, blocks, avals = [], [], [], [], []
    for (i, f), basis in zip(spec.nonorbit(), spec.subspaces):
        a = dual_max(norm, f.vector)[0]
        avals.append(a)
        if f.is_zero(spec.grouping_tolerance):
            r_in = radius * math.exp(-2 * eps_slack * s) / (m + 1)
            r_out = (m + 1) * radius
        else:
            r_in = radius * math.exp(-(a + 2 * eps_slack) * s) / (m + 1)
            r_out = (m + 1) * radius * math.exp(-(a - 2 * eps_slack) * s)
        di = basis.shape[1]
        inner += [r_in / math.sqrt(di)] * di
        outer += [r_out] * di
        owner += [i] * di
        blocks.append(basis)
    g = GammaAssignment.haar(spec) if gammas is None else gammas
    rate = math.fsum(gi * ai for gi, ai in zip(g.gammas, avals))
    return SandwichRectangles(
        inner=tuple(inner),
        outer=tuple(outer),
        basis=np.hstack(blocks),
        functional=tuple(owner),
        slack=float(eps_slack),
        radius=float(radius),
        s=float(s),
        a=tuple(avals),
        predicted_rate=rate,
    )


# ---------------------------------------------------------------------------
# volumes


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    method: str
    samples: int = 0
    accepted: int = 0
    stderr: float = 0.0
    seed: int | None = None
    bounding_box: tuple[float, ...] = ()
    factors: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "samples": self.samples,
            "accepted": self.accepted,
            "stderr": self.stderr,
            "seed": self.seed,
            "bounding_box": list(self.bounding_box),
            "factors": list(self.factors),
        }


def planar_factors(body: BowenBody) -> list[list[int]]:
    """Coordinate blocks on which every constraint matrix is block
    diagonal; raises unless every block has size 1 or 2."""
    d = body.dim
    coupled = np.zeros((d, d), dtype=bool)
    for m in body.matrices:
        coupled |= np.array(m, dtype=object) != 0
    coupled |= coupled.T
    seen, blocks = set(), []
    for start in range(d):
        if start in seen:
            continue
        comp, stack = [], [start]
        seen.add(start)
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in np.flatnonzero(coupled[i]):
                if j not in seen:
                    seen.add(int(j))
                    stack.append(int(j))
        blocks.append(sorted(comp))
    if any(len(b) > 2 for b in blocks):
        raise NotPlanarFactorizable(f"coordinate blocks {blocks} include one larger than 2")
    return blocks


def exact_volume_2d(body: BowenBody) -> VolumeEstimate:
    """Volume by convex polygon clipping, factor by factor."""
    blocks = planar_factors(body)
    mats = np.array(body.matrices, dtype=float)
    factors = []
    for b in blocks:
        sub = mats[:, b][:, :, b].reshape(-1, len(b))
        # |r.v| = |-r.v|: fix each row's sign so v -> -v gives identical input
        lead = sub[np.arange(len(sub)), np.argmax(sub != 0, axis=1)]
        sub = sub * np.where(lead < 0, -1.0, 1.0)[:, None]
        if len(b) == 1:
            factors.append(2 * body.eps / float(np.max(np.abs(sub))))
        else:
            factors.append(area(strip_intersection(sub, body.eps)))
    return VolumeEstimate(value=float(np.prod(factors)), method="ExactPolygon2D", factors=tuple(factors))


def _body_extents(gmat: np.ndarray) -> np.ndarray:
    """max |y_j| over {y : |G y|_inf <= 1}, one LP per coordinate."""
    d = gmat.shape[1]
    a_ub = np.vstack([gmat, -gmat])
    b_ub = np.ones(len(a_ub))
    ext = np.empty(d)
    for j in range(d):
        c = np.zeros(d)
        c[j] = -1.0
        res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * d, method="highs")
        if res.status != 0:
            raise ArithmeticError(f"extent LP failed: {res.message}")
        ext[j] = -res.fun
    return ext


def mc_volume(body: BowenBody, box: SandwichRectangles, samples: int = 1_000_000, seed: int = 42) -> VolumeEstimate:
    """Monte Carlo volume with the outer box as sampling region.

    Samples are drawn in fixed batches, each from its own child of
    SeedSequence(seed), so the estimate depends only on (body, box,
    samples, seed). If the outer box does not contain the body (the
    analytic constants are only asymptotic) the offending half-widths are
    widened to the body's exact extent first.
    """
    if samples < 10_000:
        raise ValueError("mc_volume needs at least 10^4 samples")
    basis = box.basis
    half = np.asarray(box.outer, dtype=float)
    gmat = body.rows @ basis * half / body.eps
    ext = _body_extents(gmat)
    if np.any(ext > 1):
        grow = np.maximum(ext, 1.0) * (1 + 1e-9)
        log.info("outer box widened by factors %s", grow)
        half = half * grow
        gmat = gmat * grow
    n_batches = -(-samples // MC_BATCH)
    children = np.random.SeedSequence(seed).spawn(n_batches)
    accepted = 0
    for b, child in enumerate(children):
        n = min(MC_BATCH, samples - b * MC_BATCH)
        y = np.random.default_rng(child).uniform(-1.0, 1.0, size=(n, body.dim))
        accepted += int(np.count_nonzero(np.max(np.abs(y @ gmat.T), axis=1) <= 1.0))
    box_volume = abs(np.linalg.det(basis)) * float(np.prod(2 * half))
    if accepted == 0:
        raise ZeroAcceptance(
            f"no accepted sample out of {samples}", upper_bound=3.0 / samples * box_volume
        )
    ratio = accepted / samples
    value = box_volume * ratio
    stderr = value * math.sqrt((1 - ratio) / (ratio * samples))
    return VolumeEstimate(
        value=value,
        method="MonteCarlo",
        samples=samples,
        accepted=accepted,
        stderr=stderr,
        seed=seed,
        bounding_box=tuple(float(h) for h in half),
    )


# ---------------------------------------------------------------------------
# slope fitting


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares fit of -log(volume) against s.

    ``dropped`` lists small radii removed by the transient guard;
    ``formula_delta`` and ``relative_gap`` compare the slope with the
    slow-entropy formula when available.
    """

    s_grid: tuple[float, ...]
    logvols: tuple[float, ...]
    slope: float
    intercept: float
    r_squared: float
    loo_range: tuple[float, float]
    dropped: tuple[float, ...] = ()
    volumes: tuple[VolumeEstimate, ...] = ()
    constraint_counts: tuple[int, ...] = ()
    formula_delta: float | None = None
    relative_gap: float | None = None
    eps: float | None = None

    def to_dict(self) -> dict:
        return {
            "s_grid": list(self.s_grid),
            "logvols": list(self.logvols),
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "loo_range": list(self.loo_range),
            "dropped": list(self.dropped),
            "formula_delta": self.formula_delta,
            "relative_gap": self.relative_gap,
            "eps": self.eps,
        }


def _linfit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, min(1.0, 1 - ss_res / ss_tot))
    return float(slope), float(intercept), r2


def fit_slope(s_grid, logvols, guard: float = 0.2) -> SlopeFit:
    """Fit with leave-one-out diagnostics; while the leave-one-out slope
    range exceeds ``guard`` times the slope and more than three points
    remain, the smallest s is dropped as transient."""
    s = np.asarray(s_grid, dtype=float)
    y = np.asarray(logvols, dtype=float)
    if len(s) < 3 or np.any(np.diff(s) <= 0):
        raise ValueError("s grid must be strictly increasing with at least 3 points")
    dropped = []
    while True:
        slope, intercept, r2 = _linfit(s, y)
        loo = [_linfit(np.delete(s, i), np.delete(y, i))[0] for i in range(len(s))]
        rng = (min(loo), max(loo))
        if len(s) > 3 and rng[1] - rng[0] > guard * abs(slope):
            dropped.append(float(s[0]))
            s, y = s[1:], y[1:]
            continue
        break
    if not math.isfinite(slope):
        raise ArithmeticError("non-finite slope")
    return SlopeFit(
        s_grid=tuple(float(v) for v in s),
        logvols=tuple(float(v) for v in y),
        slope=slope,
        intercept=intercept,
        r_squared=r2,
        loo_range=rng,
        dropped=tuple(dropped),
    )


def body_volume(
    body: BowenBody,
    spec: LyapunovSpectrum,
    samples: int = 1_000_000,
    seed: int = 42,
    eps_slack: float | None = None,
    method: str = "auto",
) -> VolumeEstimate:
    """Exact polygon volume when the body factorizes into planar pieces,
    Monte Carlo in the eigenbasis otherwise. ``method`` may force either
    path ("exact" or "mc")."""
    if method not in ("auto", "exact", "mc"):
        raise ValueError(f"unknown volume method {method!r}")
    if method == "exact":
        return exact_volume_2d(body)
    if method == "auto":
        try:
            return exact_volume_2d(body)
        except NotPlanarFactorizable:
            pass
    slack = 0.5 * max_valid_slack(spec, body.norm_used) if eps_slack is None else eps_slack
    box = sandwich_rectangles(spec, None, body.norm_used, body.s, slack, eps=body.eps)
    return mc_volume(body, box, samples, seed)


def estimate_local_slow_entropy(
    action: IntegerMatrixAction,
    norm: NormSpec,
    gammas: GammaAssignment | None,
    eps: float,
    s_grid,
    samples: int = 1_000_000,
    seed: int = 42,
    spec: LyapunovSpectrum | None = None,
    method: str = "auto",
) -> SlopeFit:
    """Empirical decay rate of the Haar measure of Bowen balls.

    Fits -log vol(B_s) against s; the slope estimates the slow entropy.
    The formula value uses ``gammas`` (None for Haar multiplicities).
    Each s gets the seed ``seed + index`` for Monte Carlo volumes;
    ``method`` is passed to body_volume.
    """
    spec = compute_spectrum(action) if spec is None else spec
    vols, counts = [], []
    for idx, s in enumerate(s_grid):
        body = bowen_constraints(action, norm, s, eps)
        vols.append(body_volume(body, spec, samples, seed + idx, method=method))
        counts.append(len(body))
    logvols = [-math.log(v.value) for v in vols]
    fit = fit_slope(s_grid, logvols)
    delta = slow_entropy(spec, gammas, norm).total
    gap = (fit.slope - delta) / delta if delta != 0 else fit.slope - delta
    return SlopeFit(
        s_grid=fit.s_grid,
        logvols=fit.logvols,
        slope=fit.slope,
        intercept=fit.intercept,
        r_squared=fit.r_squared,
        loo_range=fit.loo_range,
        dropped=fit.dropped,
        volumes=tuple(vols),
        constraint_counts=tuple(counts),
        formula_delta=delta,
        relative_gap=gap,
        eps=eps,
    )
