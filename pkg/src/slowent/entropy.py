"""Slow entropy of a Lyapunov spectrum under a norm, the entropy identities
behind it, and its minimization over unit-volume norm families."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .action import LyapunovSpectrum
from .errors import BudgetExhausted, DimensionMismatch, GammaMismatch, ZeroVector
from .norms import NormSpec, dual_max, euclidean_ball_volume, unit_ball_volume
from .sampling import halton_sphere

log = logging.getLogger(__name__)

__all__ = [
    "GammaAssignment",
    "FunctionalTerm",
    "SlowEntropyReport",
    "GammaValidation",
    "NormSearchResult",
    "slow_entropy",
    "pesin_entropy",
    "validate_gammas",
    "minimize_over_norm_family",
]

HAAR = "HaarMultiplicity"
USER = "UserSupplied"


@dataclass(frozen=True)
class GammaAssignment:
    """Transversal dimensions, one per non-orbit functional."""

    gammas: tuple[float, ...]
    source: str = USER

    @classmethod
    def haar(cls, spec: LyapunovSpectrum) -> "GammaAssignment":
        return cls(tuple(float(f.multiplicity) for _, f in spec.nonorbit()), HAAR)

    @classmethod
    def user(cls, spec: LyapunovSpectrum, gammas) -> "GammaAssignment":
        g = cls(tuple(float(x) for x in gammas), USER)
        g.check(spec)
        return g

    def check(self, spec: LyapunovSpectrum) -> None:
        nonorbit = spec.nonorbit()
        if len(self.gammas) != len(nonorbit):
            raise GammaMismatch(f"{len(self.gammas)} gammas for {len(nonorbit)} non-orbit functionals")
        for g, (i, f) in zip(self.gammas, nonorbit):
            if not g >= 0:
                raise GammaMismatch(f"gamma for functional {i} is negative ({g})")
            if g > f.multiplicity + 1e-12:
                raise GammaMismatch(f"gamma {g} exceeds multiplicity {f.multiplicity} of functional {i}")


def _resolve(spec: LyapunovSpectrum, gammas: GammaAssignment | None) -> GammaAssignment:
    if gammas is None or (gammas.source == HAAR and not gammas.gammas):
        return GammaAssignment.haar(spec)
    gammas.check(spec)
    return gammas


@dataclass(frozen=True)
class FunctionalTerm:
    index: int
    gamma: float
    a: float
    argmax: tuple[float, ...]
    product: float


@dataclass(frozen=True)
class SlowEntropyReport:
    """sum_i gamma_i max_{p(t)<=1} chi_i(t), with its per-functional terms.

    ``half_total`` is total / 2. For k = 1 and the standard norm it equals
    the metric entropy of the generator, since the symmetric unit ball
    sees every exponent with both signs.
    """

    per_functional: tuple[FunctionalTerm, ...]
    total: float
    norm: NormSpec

    @property
    def half_total(self) -> float:
        return self.total / 2

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "half_total": self.half_total,
            "norm": self.norm.to_dict(),
            "per_functional": [
                {"index": t.index, "gamma": t.gamma, "a": t.a, "argmax": list(t.argmax), "product": t.product}
                for t in self.per_functional
            ],
        }


def slow_entropy(spec: LyapunovSpectrum, gammas: GammaAssignment | None, norm: NormSpec) -> SlowEntropyReport:
    """Evaluate the slow-entropy formula for the given norm.

    ``gammas=None`` means Haar measure: each gamma is the multiplicity.
    Orbit-direction functionals contribute nothing.
    """
    if norm.dim != spec.rank:
        raise DimensionMismatch(f"norm on R^{norm.dim} for a rank-{spec.rank} action")
    gammas = _resolve(spec, gammas)
    terms = []
    for g, (i, f) in zip(gammas.gammas, spec.nonorbit()):
        a, arg = dual_max(norm, f.vector)
        terms.append(FunctionalTerm(i, g, a, tuple(float(x) for x in arg), g * a))
    total = math.fsum(t.product for t in terms)
    return SlowEntropyReport(tuple(terms), total, norm)


def pesin_entropy(spec: LyapunovSpectrum, gammas: GammaAssignment | None, t) -> float:
    """Metric entropy of alpha(t): sum of gamma_i chi_i(t) over chi_i(t) > 0."""
    t = np.asarray(t, dtype=float).reshape(-1)
    if t.shape[0] != spec.rank:
        raise DimensionMismatch(f"t has length {t.shape[0]}, expected {spec.rank}")
    if not np.any(t):
        raise ZeroVector("pesin_entropy needs a nonzero group element")
    gammas = _resolve(spec, gammas)
    chi = spec.coeff_matrix() @ t
    g = np.asarray(gammas.gammas)
    return float(math.fsum(g[chi > 0] * chi[chi > 0]))


@dataclass(frozen=True)
class GammaValidation:
    trials: int
    sum_residual: float
    abs_sum_residual: float
    sum_passed: bool
    abs_sum_passed: bool

    @property
    def passed(self) -> bool:
        return self.sum_passed and self.abs_sum_passed

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "sum_residual": self.sum_residual,
            "abs_sum_residual": self.abs_sum_residual,
            "sum_passed": self.sum_passed,
            "abs_sum_passed": self.abs_sum_passed,
        }


def validate_gammas(
    spec: LyapunovSpectrum,
    gammas: GammaAssignment | None,
    trial_count: int = 100,
    directions=None,
    tol: float = 1e-9,
) -> GammaValidation:
    """Check sum gamma_i chi_i(t) = 0 and sum gamma_i |chi_i(t)| = 2 h(t).

    Residuals are relative to |t|. Directions default to ``trial_count``
    Halton points on the unit sphere. The second identity follows from the
    first algebraically; it is kept as a consistency tripwire.
    """
    if trial_count < 1:
        raise ValueError("trial_count must be >= 1")
    gammas = _resolve(spec, gammas)
    ts = halton_sphere(trial_count, spec.rank) if directions is None else np.atleast_2d(np.asarray(directions, float))
    g = np.asarray(gammas.gammas)
    c = spec.coeff_matrix()
    worst_sum = worst_abs = 0.0
    for t in ts:
        scale = float(np.linalg.norm(t))
        chi = c @ t
        r1 = abs(math.fsum(g * chi)) / scale
        r2 = abs(math.fsum(g * np.abs(chi)) - 2 * pesin_entropy(spec, gammas, t)) / scale
        worst_sum = max(worst_sum, r1)
        worst_abs = max(worst_abs, r2)
    return GammaValidation(len(ts), worst_sum, worst_abs, worst_sum < tol, worst_abs < tol)


# ---------------------------------------------------------------------------
# norm-family minimization

FAMILIES = ("box", "ellipsoid")
_FAMILY_ALIASES = {"weightedbox": "box", "weighted_box": "box", "box": "box", "ellipsoid": "ellipsoid"}


@dataclass(frozen=True)
class NormSearchResult:
    """Best unit-volume norm found in a family; an upper bound on the
    infimum of slow entropy over all unit-volume norms."""

    best_norm: NormSpec
    best_value: float
    trace: tuple[tuple[int, tuple[float, ...], float, float], ...]
    family: str
    converged: bool = True
    initial_value: float = math.nan
    restarts: int = 1

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "best_value": self.best_value,
            "best_norm": self.best_norm.to_dict(),
            "converged": self.converged,
            "initial_value": self.initial_value,
            "restarts": self.restarts,
            "upper_bound_only": True,
            "trace": [
                {"iteration": it, "params": list(p), "value": v, "volume": vol} for it, p, v, vol in self.trace
            ],
        }


class _Family:
    """Parameter <-> unit-volume norm map for one family."""

    def __init__(self, name: str, k: int):
        self.name, self.k = name, k
        if name == "box":
            self.n_params = k
        else:
            self.n_params = k + k * (k - 1) // 2

    def initial(self) -> np.ndarray:
        return np.zeros(self.n_params)

    def norm(self, x: np.ndarray) -> NormSpec:
        k = self.k
        if self.name == "box":
            logw = x - x.mean() + math.log(0.5)  # 2^k prod w = 1
            return NormSpec.weighted_box(np.exp(logw))
        # Q = L L^T with log-diagonal parametrization; det Q fixed by the volume
        chol = np.zeros((k, k))
        chol[np.diag_indices(k)] = np.exp(x[:k])
        chol[np.tril_indices(k, -1)] = x[k:]
        q = chol @ chol.T
        target = euclidean_ball_volume(k) ** 2
        q *= (target / np.linalg.det(q)) ** (1.0 / k)
        return NormSpec.ellipsoid((q + q.T) / 2)


def _pattern_search(objective, x0: np.ndarray, budget: int, step: float, tol: float):
    """Compass search with step halving. Returns (x, f, converged, trace)."""
    x = x0.copy()
    fx = objective(x)
    trace = [(0, x.copy(), fx)]
    n = len(x)
    for it in range(1, budget + 1):
        improved = False
        for j in range(n):
            for sgn in (1.0, -1.0):
                y = x.copy()
                y[j] += sgn * step
                fy = objective(y)
                if fy < fx - 1e-15 * max(1.0, abs(fx)):
                    x, fx, improved = y, fy, True
                    break
            if improved:
                break
        if not improved:
            step *= 0.5
        trace.append((it, x.copy(), fx))
        if step < tol:
            return x, fx, True, trace
    return x, fx, False, trace


def minimize_over_norm_family(
    spec: LyapunovSpectrum,
    gammas: GammaAssignment | None,
    family: str = "box",
    budget: int = 2000,
    seed: int = 0,
    restarts: int = 4,
    tol: float = 1e-8,
) -> NormSearchResult:
    """Minimize slow entropy over unit-volume weighted boxes or ellipsoids.

    Compass search in log-parameters, restarted from the canonical point
    (the unit-volume cube or Euclidean ball) and from ``restarts - 1``
    seeded random points. ``budget`` bounds iterations per restart.
    Raises BudgetExhausted, carrying the best-so-far result, when a
    restart ends with step above ``tol``.
    """
    family = _FAMILY_ALIASES.get(str(family).lower(), family)
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}, got {family!r}")
    gammas = _resolve(spec, gammas)
    fam = _Family(family, spec.rank)

    def objective(x):
        return slow_entropy(spec, gammas, fam.norm(x)).total

    rng = np.random.default_rng(seed)
    starts = [fam.initial()] + [rng.normal(scale=0.5, size=fam.n_params) for _ in range(max(restarts, 1) - 1)]
    initial_value = objective(starts[0])
    best = None
    for r, x0 in enumerate(starts):
        x, fx, conv, trace = _pattern_search(objective, x0, budget, step=0.5, tol=tol)
        if best is None or fx < best[1]:
            best = (x, fx, conv, trace, r)
        elif not conv:
            best = (best[0], best[1], False, best[3], best[4])
    x, fx, conv, trace, r = best
    norm = fam.norm(x)
    value = slow_entropy(spec, gammas, norm).total
    rows = tuple((it, tuple(float(v) for v in p), float(f), unit_ball_volume(fam.norm(p))) for it, p, f in trace)
    result = NormSearchResult(norm, value, rows, family, conv, initial_value, len(starts))
    log.debug("norm search %s: best %.12g from restart %d", family, value, r)
    if not conv:
        raise BudgetExhausted(f"step did not reach {tol:g} within {budget} iterations", result=result)
    return result
