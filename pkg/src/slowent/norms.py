"""Norms on R^k with computable gauge, support function and ball volume."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, nnls
from scipy.spatial import ConvexHull

from .errors import DimensionMismatch

__all__ = ["NormSpec", "norm_value", "dual_max", "dual_max_lp", "unit_ball_volume", "euclidean_ball_volume"]

KINDS = ("l1", "l2", "linf", "box", "polytope", "ellipsoid")


@dataclass(frozen=True)
class NormSpec:
    """A norm p on R^k.

    kind is one of ``l1``, ``l2``, ``linf`` (the l_q norms), ``box``
    (weighted box, unit ball prod [-w_j, w_j]), ``polytope`` (unit ball is
    the hull of a centrally symmetric vertex list) or ``ellipsoid``
    (unit ball {t : t^T Q t <= 1}).
    """

    kind: str
    dim: int
    weights: tuple[float, ...] | None = None
    vertices: tuple[tuple[float, ...], ...] | None = None
    matrix: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("norm dimension must be >= 1")
        if self.kind == "box":
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (self.dim,) or not np.all(w > 0) or not np.all(np.isfinite(w)):
                raise ValueError("box weights must be k strictly positive reals")
        elif self.kind == "ellipsoid":
            q = np.asarray(self.matrix, dtype=float)
            if q.shape != (self.dim, self.dim):
                raise ValueError("ellipsoid matrix must be k x k")
            if np.max(np.abs(q - q.T)) > 1e-12:
                raise ValueError("ellipsoid matrix must be symmetric")
            if np.min(np.linalg.eigvalsh(q)) <= 0:
                raise ValueError("ellipsoid matrix must be positive definite")
        elif self.kind == "polytope":
            v = np.asarray(self.vertices, dtype=float)
            if v.ndim != 2 or v.shape[1] != self.dim:
                raise ValueError("polytope vertices must be points of R^k")
            for p in v:
                if np.min(np.max(np.abs(v + p), axis=1)) > 1e-12:
                    raise ValueError(f"polytope is not centrally symmetric: -{p.tolist()} missing")
            if np.linalg.matrix_rank(v) < self.dim:
                raise ValueError("polytope vertices do not span R^k")

    # constructors -----------------------------------------------------
    @classmethod
    def lq(cls, q, dim: int) -> "NormSpec":
        name = {1: "l1", 2: "l2", math.inf: "linf", "inf": "linf", "l1": "l1", "l2": "l2", "linf": "linf"}[q]
        return cls(name, dim)

    @classmethod
    def standard(cls, dim: int) -> "NormSpec":
        return cls("l2", dim)

    @classmethod
    def weighted_box(cls, weights) -> "NormSpec":
        w = tuple(float(x) for x in weights)
        return cls("box", len(w), weights=w)

    @classmethod
    def polytope(cls, vertices) -> "NormSpec":
        v = tuple(tuple(float(x) for x in row) for row in vertices)
        return cls("polytope", len(v[0]), vertices=v)

    @classmethod
    def ellipsoid(cls, matrix) -> "NormSpec":
        q = np.asarray(matrix, dtype=float)
        return cls("ellipsoid", q.shape[0], matrix=tuple(tuple(float(x) for x in row) for row in q))

    def scaled(self, lam: float) -> "NormSpec":
        """The norm p / lam, whose unit ball is lam times this one's."""
        if lam <= 0:
            raise ValueError("scale must be positive")
        k = self.dim
        if self.kind == "linf":
            return NormSpec.weighted_box([lam] * k)
        if self.kind == "l2":
            return NormSpec.ellipsoid(np.eye(k) / lam**2)
        if self.kind == "l1":
            verts = np.vstack([np.eye(k), -np.eye(k)]) * lam
            return NormSpec.polytope(verts)
        if self.kind == "box":
            return NormSpec.weighted_box(np.asarray(self.weights) * lam)
        if self.kind == "ellipsoid":
            return NormSpec.ellipsoid(np.asarray(self.matrix) / lam**2)
        return NormSpec.polytope(np.asarray(self.vertices) * lam)

    def value(self, t) -> float:
        return norm_value(self, t)

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "dim": self.dim}
        if self.weights is not None:
            out["weights"] = list(self.weights)
        if self.vertices is not None:
            out["vertices"] = [list(v) for v in self.vertices]
        if self.matrix is not None:
            out["matrix"] = [list(r) for r in self.matrix]
        return out


def _check(norm: NormSpec, t) -> np.ndarray:
    t = np.asarray(t, dtype=float).reshape(-1)
    if t.shape[0] != norm.dim:
        raise DimensionMismatch(f"vector has length {t.shape[0]}, norm lives on R^{norm.dim}")
    return t


def _gauge_lp(vertices: np.ndarray, t: np.ndarray) -> float:
    # t = sum_i mu_i v_i, mu >= 0, minimize sum mu
    res = linprog(
        np.ones(len(vertices)),
        A_eq=vertices.T,
        b_eq=t,
        bounds=(0, None),
        method="highs",
    )
    if res.status != 0:
        raise ArithmeticError(f"gauge LP failed: {res.message}")
    return float(res.fun)


def norm_value(norm: NormSpec, t) -> float:
    """p(t)."""
    t = _check(norm, t)
    if norm.kind == "l1":
        return float(np.sum(np.abs(t)))
    if norm.kind == "l2":
        return float(np.linalg.norm(t))
    if norm.kind == "linf":
        return float(np.max(np.abs(t)))
    if norm.kind == "box":
        return float(np.max(np.abs(t) / np.asarray(norm.weights)))
    if norm.kind == "ellipsoid":
        q = np.asarray(norm.matrix)
        return float(math.sqrt(max(float(t @ q @ t), 0.0)))
    if not np.any(t):
        return 0.0
    return _gauge_lp(np.asarray(norm.vertices), t)


def _min_norm_in_hull(points: np.ndarray) -> np.ndarray:
    """Minimal Euclidean norm point of conv(points) (unique)."""
    if len(points) == 1:
        return points[0].copy()
    # min |P^T w|^2 on the simplex, via the penalized nnls formulation
    big = 1e4 * max(1.0, float(np.max(np.abs(points))))
    a = np.vstack([points.T, big * np.ones((1, len(points)))])
    b = np.concatenate([np.zeros(points.shape[1]), [big]])
    w, _ = nnls(a, b)
    w /= w.sum()
    return w @ points


def dual_max(norm: NormSpec, c) -> tuple[float, np.ndarray]:
    """Support function max{c.t : p(t) <= 1} with a maximizer.

    Among maximizers the one of minimal Euclidean norm is returned; that
    point is unique because the maximizing face is convex.
    """
    c = _check(norm, c)
    k = norm.dim
    absc = np.abs(c)
    if norm.kind == "l2":
        n = float(np.linalg.norm(c))
        return n, (c / n if n > 0 else np.zeros(k))
    if norm.kind in ("linf", "box"):
        w = np.ones(k) if norm.kind == "linf" else np.asarray(norm.weights)
        return float(np.sum(w * absc)), w * np.sign(c)
    if norm.kind == "l1":
        m = float(np.max(absc, initial=0.0))
        if m == 0:
            return 0.0, np.zeros(k)
        face = absc >= m * (1 - 1e-15)
        arg = np.where(face, np.sign(c), 0.0) / np.count_nonzero(face)
        return m, arg
    if norm.kind == "ellipsoid":
        q = np.asarray(norm.matrix)
        y = np.linalg.solve(q, c)
        val = math.sqrt(max(float(c @ y), 0.0))
        return val, (y / val if val > 0 else np.zeros(k))
    verts = np.asarray(norm.vertices)
    scores = verts @ c
    best = float(np.max(scores))
    scale = max(1.0, float(np.max(np.abs(scores))))
    face = verts[scores >= best - 1e-12 * scale]
    if best <= 1e-12 * scale:
        return 0.0, np.zeros(k)
    return best, _min_norm_in_hull(face)


def dual_max_lp(norm: NormSpec, c) -> float:
    """Support function of a polytope ball by linear programming over the
    hull (max c.t with t = sum theta_i v_i, theta in the simplex)."""
    if norm.kind != "polytope":
        raise ValueError("LP support function is only defined for polytope norms")
    c = _check(norm, c)
    verts = np.asarray(norm.vertices)
    n = len(verts)
    res = linprog(
        -(verts @ c),
        A_eq=np.ones((1, n)),
        b_eq=[1.0],
        bounds=(0, None),
        method="highs",
    )
    return float(-res.fun)


def euclidean_ball_volume(k: int) -> float:
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


def unit_ball_volume(norm: NormSpec) -> float:
    """Lebesgue volume of {t : p(t) <= 1}."""
    k = norm.dim
    if norm.kind == "linf":
        return 2.0**k
    if norm.kind == "l1":
        return 2.0**k / math.factorial(k)
    if norm.kind == "l2":
        return euclidean_ball_volume(k)
    if norm.kind == "box":
        return 2.0**k * float(np.prod(norm.weights))
    if norm.kind == "ellipsoid":
        return euclidean_ball_volume(k) / math.sqrt(np.linalg.det(np.asarray(norm.matrix)))
    verts = np.asarray(norm.vertices)
    if k == 1:
        return 2.0 * float(np.max(np.abs(verts)))
    hull = ConvexHull(verts)
    if k == 2:
        ring = verts[hull.vertices]
        ang = np.arctan2(ring[:, 1], ring[:, 0])
        ring = ring[np.argsort(ang)]
        x, y = ring[:, 0], ring[:, 1]
        return float(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))
    # cone over each (triangulated) facet from the origin
    total = 0.0
    for simplex in hull.simplices:
        total += abs(np.linalg.det(verts[simplex])) / math.factorial(k)
    return float(total)
