"""Convex polygon clipping by half-planes."""

from __future__ import annotations

import numpy as np


def clip_halfplane(poly: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Intersect a convex polygon (counter-clockwise vertex array) with
    {v : normal . v <= offset}."""
    if len(poly) == 0:
        return poly
    vals = poly @ normal - offset
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp, fq = vals[i], vals[(i + 1) % n]
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            out.append(p + (q - p) * (fp / (fp - fq)))
    return np.array(out).reshape(-1, 2)


def area(poly: np.ndarray) -> float:
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return float(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def strip_intersection(rows: np.ndarray, bound: float) -> np.ndarray:
    """Polygon {v in R^2 : |r . v| <= bound for every row r}.

    The rows must include two independent ones so that the result is
    bounded; the starting square is taken from the first two rows' box.
    """
    norms = np.linalg.norm(rows, axis=1)
    units = rows / norms[:, None]
    offsets = bound / norms
    # a bounding square: any two independent rows pin |v|
    inv = np.linalg.inv(rows[:2])
    half = bound * np.abs(inv).sum(axis=1).max()
    poly = np.array([[-half, -half], [half, -half], [half, half], [-half, half]], dtype=float)
    for u, b in sorted(zip(units, offsets), key=lambda z: z[1]):
        poly = clip_halfplane(poly, u, b)
        poly = clip_halfplane(poly, -u, b)
        if len(poly) == 0:
            break
    return poly
