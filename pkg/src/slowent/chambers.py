"""Lyapunov hyperplanes, Weyl chambers and generic elements."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .action import LyapunovSpectrum
from .errors import (
    AllZeroSpectrum,
    DegenerateArrangement,
    DimensionMismatch,
    NoSeparatingElement,
    RankTooLarge,
    ZeroVector,
)
from .norms import NormSpec, norm_value
from .sampling import halton_sphere

__all__ = [
    "HyperplaneArrangement",
    "Chamber",
    "Regular",
    "Singular",
    "lyapunov_hyperplanes",
    "enumerate_chambers",
    "classify_element",
    "pick_generic_element",
    "separation_score",
]

PARALLEL_TOL = 1e-9
REP_MARGIN = 1e-6
LP_MARGIN = 1e-9
MAX_RANK = 4


@dataclass(frozen=True)
class HyperplaneArrangement:
    """Unit normals of the Lyapunov hyperplanes ker chi_i, one per
    projective class of nonzero functional."""

    normals: tuple[tuple[float, ...], ...]
    source_indices: tuple[tuple[int, ...], ...]
    rank: int

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.normals, dtype=float).reshape(len(self.normals), self.rank)


@dataclass(frozen=True)
class Chamber:
    sign_vector: tuple[int, ...]
    representative: tuple[float, ...]

    def to_dict(self) -> dict:
        return {"sign_vector": list(self.sign_vector), "representative": list(self.representative)}


@dataclass(frozen=True)
class Regular:
    signs: tuple[int, ...]
    regular = True


@dataclass(frozen=True)
class Singular:
    hyperplanes: tuple[int, ...]
    regular = False


def _sign_normalize(v: np.ndarray) -> np.ndarray:
    lead = np.flatnonzero(np.abs(v) > 1e-12)[0]
    return v if v[lead] > 0 else -v


def lyapunov_hyperplanes(spec: LyapunovSpectrum) -> HyperplaneArrangement:
    normals: list[np.ndarray] = []
    sources: list[list[int]] = []
    for i, f in spec.nonorbit():
        c = f.vector
        n = float(np.linalg.norm(c))
        if n <= spec.grouping_tolerance:
            continue
        u = _sign_normalize(c / n)
        for j, existing in enumerate(normals):
            if np.max(np.abs(existing - u)) < PARALLEL_TOL:
                sources[j].append(i)
                break
        else:
            normals.append(u)
            sources.append([i])
    if not normals:
        raise AllZeroSpectrum("no nonzero Lyapunov functional: no hyperbolic element")
    return HyperplaneArrangement(
        normals=tuple(tuple(float(x) for x in u) for u in normals),
        source_indices=tuple(tuple(s) for s in sources),
        rank=spec.rank,
    )


def _signs(normals: np.ndarray, t: np.ndarray) -> tuple[int, ...]:
    return tuple(int(s) for s in np.sign(normals @ t))


def _chambers_plane(normals: np.ndarray) -> list[Chamber]:
    # rays of the kernel lines, sorted by angle; a chamber is a sector
    # between consecutive rays
    angles = []
    for n in normals:
        base = math.atan2(n[0], -n[1])  # direction (-n1, n0)
        angles.extend([base % (2 * math.pi), (base + math.pi) % (2 * math.pi)])
    angles.sort()
    chambers = []
    for a, b in zip(angles, angles[1:] + [angles[0] + 2 * math.pi]):
        mid = (a + b) / 2
        t = np.array([math.cos(mid), math.sin(mid)])
        margin = float(np.min(np.abs(normals @ t)))
        if margin < REP_MARGIN:
            raise DegenerateArrangement(f"sector between angles {a:.3e} and {b:.3e} is too thin")
        chambers.append(Chamber(_signs(normals, t), tuple(float(x) for x in t)))
    return chambers


def _feasible(normals: np.ndarray, signs: tuple[int, ...]):
    """Max margin m with s_j n_j . t >= m, |t|_inf <= 1. Returns t or None."""
    k = normals.shape[1]
    s = np.asarray(signs, dtype=float)[:, None]
    # variables (t, m); maximize m
    a_ub = np.hstack([-(s * normals), np.ones((len(signs), 1))])
    res = linprog(
        np.r_[np.zeros(k), -1.0],
        A_ub=a_ub,
        b_ub=np.zeros(len(signs)),
        bounds=[(-1, 1)] * k + [(None, 1)],
        method="highs",
    )
    if res.status != 0:
        raise DegenerateArrangement(f"feasibility LP failed for {signs}: {res.message}")
    t, m = res.x[:k], -res.fun
    if m <= LP_MARGIN:
        return None
    if m < REP_MARGIN * np.linalg.norm(t):
        raise DegenerateArrangement(f"chamber {signs} exists but is thinner than the representative margin")
    return t


def enumerate_chambers(arr: HyperplaneArrangement) -> list[Chamber]:
    """All Weyl chambers of the arrangement, sorted by sign vector
    (descending, so the all-plus chamber comes first)."""
    k = arr.rank
    if k > MAX_RANK:
        raise RankTooLarge(f"exact chamber enumeration supports k <= {MAX_RANK}, got {k}")
    normals = arr.matrix
    if k == 1:
        chambers = [Chamber((1,) * len(normals), (1.0,)), Chamber((-1,) * len(normals), (-1.0,))]
    elif k == 2:
        chambers = _chambers_plane(normals)
    else:
        # incremental insertion: every chamber restricts to a chamber of
        # the arrangement of the first j hyperplanes
        found = {(1,): None, (-1,): None}
        for j in range(1, len(normals)):
            nxt = {}
            for signs in found:
                for s in (1, -1):
                    cand = signs + (s,)
                    t = _feasible(normals[: j + 1], cand)
                    if t is not None:
                        nxt[cand] = t
            found = nxt
        if len(normals) == 1:
            found = {(1,): normals[0], (-1,): -normals[0]}
        chambers = []
        for signs, t in found.items():
            t = np.asarray(t, dtype=float)
            t = t / np.linalg.norm(t)
            chambers.append(Chamber(signs, tuple(float(x) for x in t)))
    chambers.sort(key=lambda c: c.sign_vector, reverse=True)
    return chambers


def classify_element(spec: LyapunovSpectrum, t, tol: float = 1e-9) -> Regular | Singular:
    """Regular (with its chamber's sign vector) or Singular (with the
    hyperplanes containing t). The test is relative to |t|, so t and
    lambda t always classify alike."""
    t = np.asarray(t, dtype=float).reshape(-1)
    if t.shape[0] != spec.rank:
        raise DimensionMismatch(f"t has length {t.shape[0]}, expected {spec.rank}")
    scale = float(np.linalg.norm(t))
    if scale == 0:
        raise ZeroVector("cannot classify the zero element")
    arr = lyapunov_hyperplanes(spec)
    coeffs = {i: f.vector for i, f in spec.nonorbit()}
    hits = []
    for j, members in enumerate(arr.source_indices):
        if min(abs(float(coeffs[i] @ t)) for i in members) <= tol * scale:
            hits.append(j)
    if hits:
        return Singular(tuple(hits))
    return Regular(_signs(arr.matrix, t))


def separation_score(spec: LyapunovSpectrum, t) -> float:
    """min(|chi_i(t)|, |chi_i(t) - chi_j(t)|) over nonzero functionals."""
    c = np.array([f.vector for _, f in spec.nonorbit() if not f.is_zero(spec.grouping_tolerance)])
    chi = c @ np.asarray(t, dtype=float)
    score = float(np.min(np.abs(chi)))
    for i, j in itertools.combinations(range(len(chi)), 2):
        score = min(score, abs(chi[i] - chi[j]))
    return score


def pick_generic_element(spec: LyapunovSpectrum, norm: NormSpec, samples: int = 256) -> np.ndarray:
    """A t with p(t) <= 1 whose exponents are nonzero and pairwise distinct.

    Maximizes the separation score over Halton directions pushed to the
    unit sphere of p, then refines the best one coordinate-wise. This is
    only a necessary surrogate for a generic element: ergodicity of
    alpha(t) is not certified.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if all(f.is_zero(spec.grouping_tolerance) for _, f in spec.nonorbit()):
        raise AllZeroSpectrum("no nonzero Lyapunov functional")

    def to_boundary(u):
        return u / norm_value(norm, u)

    def score(u):
        return separation_score(spec, to_boundary(u))

    best_u, best = None, -1.0
    for u in halton_sphere(samples, spec.rank):
        s = score(u)
        if s > best:
            best_u, best = u, s
    step = 0.25
    while step > 1e-10:
        improved = False
        for j in range(spec.rank):
            for sgn in (1.0, -1.0):
                v = best_u.copy()
                v[j] += sgn * step
                if not np.any(v):
                    continue
                s = score(v)
                if s > best:
                    best_u, best, improved = v / np.linalg.norm(v), s, True
        if not improved:
            step /= 2
    if best < 1e-9:
        raise NoSeparatingElement(f"best separation score {best:.3e}: some functionals coincide")
    return to_boundary(best_u)
