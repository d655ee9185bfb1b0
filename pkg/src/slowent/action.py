"""Z^k actions by commuting unimodular integer matrices and their joint
Lyapunov spectrum."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg as spla

from .errors import (
    AlreadySuspended,
    DimensionMismatch,
    EigenFailure,
    NonCommuting,
    NonUnimodular,
    ToleranceAmbiguity,
)

IntMatrix = tuple[tuple[int, ...], ...]

__all__ = [
    "IntegerMatrixAction",
    "LyapunovFunctional",
    "LyapunovSpectrum",
    "verify_action",
    "compute_spectrum",
    "evaluate_exponent",
    "suspend",
    "int_det",
    "int_matmul",
    "int_inverse",
    "int_matpow",
]

_MAX_TRIES = 8
_RESIDUAL_TOL = 1e-10


# ---------------------------------------------------------------------------
# exact integer matrix arithmetic (Python ints never overflow)


def int_matmul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    cols = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)


def int_identity(n: int) -> IntMatrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def int_det(a: IntMatrix) -> int:
    """Determinant by fraction-free Bareiss elimination."""
    m = [list(row) for row in a]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def int_inverse(a: IntMatrix) -> IntMatrix:
    """Exact inverse of a unimodular integer matrix."""
    n = len(a)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    out = []
    for row in aug:
        vals = row[n:]
        if any(v.denominator != 1 for v in vals):
            raise NonUnimodular("matrix inverse is not integral")
        out.append(tuple(int(v) for v in vals))
    return tuple(out)


def int_matpow(a: IntMatrix, e: int) -> IntMatrix:
    if e < 0:
        a, e = int_inverse(a), -e
    result = int_identity(len(a))
    base = a
    while e:
        if e & 1:
            result = int_matmul(result, base)
        base = int_matmul(base, base)
        e >>= 1
    return result


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntegerMatrixAction:
    """k commuting d x d integer matrices with determinant +-1."""

    dim: int
    rank: int
    generators: tuple[IntMatrix, ...]
    _inverses: tuple[IntMatrix, ...] = field(default=(), repr=False, compare=False)

    def inverse_generators(self) -> tuple[IntMatrix, ...]:
        if not self._inverses:
            object.__setattr__(self, "_inverses", tuple(int_inverse(g) for g in self.generators))
        return self._inverses

    def element(self, t: Sequence[int]) -> IntMatrix:
        """Exact matrix of alpha(t) = A_1^t_1 ... A_k^t_k for lattice t."""
        if len(t) != self.rank:
            raise DimensionMismatch(f"t has length {len(t)}, expected rank {self.rank}")
        m = int_identity(self.dim)
        invs = self.inverse_generators()
        for g, gi, e in zip(self.generators, invs, t):
            e = int(e)
            if e:
                m = int_matmul(m, int_matpow(g if e > 0 else gi, abs(e)))
        return m

    def float_generators(self) -> list[np.ndarray]:
        return [np.array(g, dtype=float) for g in self.generators]

    def inverse(self) -> "IntegerMatrixAction":
        return verify_action(self.inverse_generators())

    def conjugate(self, p: Sequence[Sequence[int]]) -> "IntegerMatrixAction":
        """The action generated by P A_j P^-1 (P unimodular)."""
        p = _as_int_matrix(p)
        pinv = int_inverse(p)
        return verify_action([int_matmul(int_matmul(p, g), pinv) for g in self.generators])


def _as_int_matrix(m) -> IntMatrix:
    rows = []
    for row in m:
        r = []
        for x in row:
            if isinstance(x, (bool, np.bool_)):
                raise DimensionMismatch("matrix entries must be integers")
            if isinstance(x, (float, np.floating)):
                if not float(x).is_integer():
                    raise DimensionMismatch(f"non-integer matrix entry {x!r}")
                x = int(x)
            r.append(int(x))
        rows.append(tuple(r))
    return tuple(rows)


def verify_action(matrices) -> IntegerMatrixAction:
    """Validate generators exactly and wrap them as an action.

    Determinants and pairwise commutators are checked in integer
    arithmetic.
    """
    if len(matrices) == 0:
        raise DimensionMismatch("need at least one generator")
    gens = tuple(_as_int_matrix(m) for m in matrices)
    d = len(gens[0])
    for idx, g in enumerate(gens):
        if len(g) != d or any(len(row) != d for row in g):
            raise DimensionMismatch(f"generator {idx} is not a {d}x{d} square matrix")
    if d < 2:
        raise DimensionMismatch("torus dimension must be at least 2")
    for idx, g in enumerate(gens):
        det = int_det(g)
        if abs(det) != 1:
            raise NonUnimodular(f"generator {idx} has determinant {det}")
    for i, j in itertools.combinations(range(len(gens)), 2):
        if int_matmul(gens[i], gens[j]) != int_matmul(gens[j], gens[i]):
            raise NonCommuting(i, j)
    return IntegerMatrixAction(dim=d, rank=len(gens), generators=gens)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LyapunovFunctional:
    """chi(t) = coeffs . t, with the real dimension of its Lyapunov subspace."""

    coeffs: tuple[float, ...]
    multiplicity: int
    orbit_direction: bool = False

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be >= 1")
        if self.orbit_direction and any(c != 0.0 for c in self.coeffs):
            raise ValueError("orbit-direction functionals must be zero")

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    def is_zero(self, tol: float = 1e-12) -> bool:
        return max((abs(c) for c in self.coeffs), default=0.0) <= tol


@dataclass(frozen=True)
class LyapunovSpectrum:
    """Distinct joint Lyapunov functionals of an action.

    ``subspaces`` optionally holds, per functional, a real d x d_i basis of
    the Lyapunov subspace in which the action is conformal (rotation times
    e^chi). It is ``None`` for orbit-direction functionals and for spectra
    built by hand.
    """

    functionals: tuple[LyapunovFunctional, ...]
    dim: int
    rank: int
    grouping_tolerance: float = 1e-8
    subspaces: tuple[np.ndarray | None, ...] | None = field(default=None, compare=False, repr=False)

    @property
    def suspended(self) -> bool:
        return any(f.orbit_direction for f in self.functionals)

    def nonorbit(self) -> list[tuple[int, LyapunovFunctional]]:
        return [(i, f) for i, f in enumerate(self.functionals) if not f.orbit_direction]

    def coeff_matrix(self, include_orbit: bool = False) -> np.ndarray:
        fs = self.functionals if include_orbit else [f for _, f in self.nonorbit()]
        if not fs:
            return np.zeros((0, self.rank))
        return np.array([f.coeffs for f in fs], dtype=float)

    def multiplicities(self, include_orbit: bool = False) -> np.ndarray:
        fs = self.functionals if include_orbit else [f for _, f in self.nonorbit()]
        return np.array([f.multiplicity for f in fs], dtype=int)

    def determinant_residual(self) -> np.ndarray:
        """sum_i d_i c_i, which vanishes for unimodular generators."""
        c = self.coeff_matrix()
        if len(c) == 0:
            return np.zeros(self.rank)
        return self.multiplicities() @ c

    def check_invariants(self) -> None:
        res = self.determinant_residual()
        if np.max(np.abs(res), initial=0.0) >= 1e-9:
            raise AssertionError(f"determinant-sum residual {res}")
        total = int(self.multiplicities(include_orbit=True).sum())
        expected = self.dim + (self.rank if self.suspended else 0)
        if total != expected:
            raise AssertionError(f"multiplicities sum to {total}, expected {expected}")
        c = self.coeff_matrix()
        for i, j in itertools.combinations(range(len(c)), 2):
            if np.max(np.abs(c[i] - c[j])) <= self.grouping_tolerance:
                raise AssertionError(f"functionals {i} and {j} are not distinct")


def _real_basis(u: np.ndarray, complex_pair: bool) -> np.ndarray:
    """Real basis of span(u) (real eigenvalue) or span(u, conj u)."""
    if complex_pair:
        # (Re w, Im w) puts the action in rotation-scaling form
        return np.hstack([u.real, u.imag])
    stacked = np.hstack([u.real, u.imag])
    left, _, _ = np.linalg.svd(stacked, full_matrices=False)
    return left[:, : u.shape[1]]


def _joint_clusters(mats: list[np.ndarray], rng: np.random.Generator):
    """One attempt at joint eigenstructure from a random combination.

    Returns a list of (joint eigenvalue tuple, multiplicity, complex
    basis) or ``None`` when the combination failed to separate the
    family to the required accuracy.
    """
    d = mats[0].shape[0]
    weights = rng.standard_normal(len(mats))
    combo = sum(w * m for w, m in zip(weights, mats))
    eig = np.linalg.eigvals(combo)
    scale = max(1.0, np.linalg.norm(combo, 2))
    cluster_tol = 1e-6 * scale

    unassigned = list(range(d))
    clusters = []
    while unassigned:
        seed = eig[unassigned[0]]
        members = [i for i in unassigned if abs(eig[i] - seed) <= cluster_tol]
        unassigned = [i for i in unassigned if i not in members]
        center = eig[members].mean()
        clusters.append((center, len(members)))

    out = []
    for center, size in clusters:
        _, z, sdim = spla.schur(
            combo.astype(complex), output="complex", sort=lambda x, c=center: abs(x - c) <= cluster_tol
        )
        if sdim != size:
            return None
        u = z[:, :sdim]
        joint = []
        for m in mats:
            block = u.conj().T @ m @ u
            norm_m = max(1.0, np.linalg.norm(m, 2))
            if np.linalg.norm(m @ u - u @ block) > _RESIDUAL_TOL * norm_m:
                return None
            lam = np.trace(block) / sdim
            if sdim > 1:
                spread = np.max(np.abs(np.linalg.eigvals(block) - lam))
                if spread > 1e-6 * norm_m:
                    return None
            joint.append(lam)
        out.append((np.array(joint), size, u))
    return out


def _group(points: list[np.ndarray], tol: float) -> list[list[int]]:
    """Single-linkage grouping of coefficient vectors under sup distance."""
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    ambiguous = []
    for i, j in itertools.combinations(range(n), 2):
        dist = float(np.max(np.abs(points[i] - points[j]), initial=0.0))
        if dist <= tol:
            parent[find(i)] = find(j)
        elif dist <= 2 * tol:
            ambiguous.append((i, j, dist))
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    for i, j, dist in ambiguous:
        if find(i) != find(j):
            merged = sorted(groups.values())
            raise ToleranceAmbiguity(
                f"joint exponents {points[i]} and {points[j]} differ by {dist:.3e}, "
                f"within [tol, 2 tol] for tol={tol:g}",
                groupings={"separate": merged, "merged": (i, j)},
            )
    return list(groups.values())


def _sort_key(c: np.ndarray, tol: float):
    nz = np.flatnonzero(np.abs(c) > tol)
    if len(nz) == 0:
        return (len(c), 0.0)
    lead = int(nz[0])
    return (lead, -float(c[lead]))


def compute_spectrum(action: IntegerMatrixAction, tol: float = 1e-8, seed: int = 0) -> LyapunovSpectrum:
    """Distinct joint Lyapunov functionals of a validated action.

    A random real combination of the generators separates their joint
    eigenvalues; each of its eigenvalue clusters spans a subspace invariant
    under the whole family, on which every generator has a single
    eigenvalue (read off as trace / size). Jordan structure is ignored.
    Functionals are ordered by their leading nonzero coordinate, then by
    decreasing value of that coordinate.
    """
    mats = action.float_generators()
    rng = np.random.default_rng(seed)
    clusters = None
    for _ in range(_MAX_TRIES):
        clusters = _joint_clusters(mats, rng)
        if clusters is not None:
            break
    if clusters is None:
        raise EigenFailure(f"no separating combination found in {_MAX_TRIES} attempts")

    coeffs = [np.log(np.abs(joint)) for joint, _, _ in clusters]
    # rounding noise around exact zero exponents
    coeffs = [np.where(np.abs(c) < 1e-14, 0.0, c) for c in coeffs]
    groups = _group(coeffs, tol)

    entries = []
    for members in groups:
        mult = sum(clusters[i][1] for i in members)
        c = sum(coeffs[i] * clusters[i][1] for i in members) / mult
        blocks = []
        for i in members:
            joint, _, u = clusters[i]
            imag = float(np.max(np.abs(joint.imag)))
            scale = max(1.0, float(np.max(np.abs(joint))))
            if imag <= 1e-9 * scale:
                blocks.append(_real_basis(u, complex_pair=False))
            elif joint[int(np.argmax(np.abs(joint.imag)))].imag > 0:
                blocks.append(_real_basis(u, complex_pair=True))
        basis = np.hstack(blocks)
        if basis.shape[1] != mult:
            raise EigenFailure("complex eigenvalues did not pair with their conjugates")
        basis = basis / np.linalg.norm(basis, 2)
        entries.append((c, mult, basis))

    entries.sort(key=lambda e: _sort_key(e[0], tol))
    functionals = tuple(LyapunovFunctional(tuple(float(x) for x in c), m) for c, m, _ in entries)
    return LyapunovSpectrum(
        functionals=functionals,
        dim=action.dim,
        rank=action.rank,
        grouping_tolerance=tol,
        subspaces=tuple(b for _, _, b in entries),
    )


def evaluate_exponent(spec: LyapunovSpectrum, t) -> np.ndarray:
    """chi_i(t) for every functional, in spectrum order."""
    t = np.asarray(t, dtype=float).reshape(-1)
    if t.shape[0] != spec.rank:
        raise DimensionMismatch(f"t has length {t.shape[0]}, expected {spec.rank}")
    return spec.coeff_matrix(include_orbit=True) @ t


def suspend(spec: LyapunovSpectrum) -> LyapunovSpectrum:
    """Append the k zero exponents of the R^k suspension's orbit direction."""
    if spec.suspended:
        raise AlreadySuspended("spectrum already contains the orbit direction")
    orbit = LyapunovFunctional((0.0,) * spec.rank, spec.rank, orbit_direction=True)
    subspaces = None if spec.subspaces is None else spec.subspaces + (None,)
    return LyapunovSpectrum(
        functionals=spec.functionals + (orbit,),
        dim=spec.dim,
        rank=spec.rank,
        grouping_tolerance=spec.grouping_tolerance,
        subspaces=subspaces,
    )
