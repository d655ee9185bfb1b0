"""Deterministic direction samples."""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc


def halton_sphere(n: int, k: int) -> np.ndarray:
    """n unit vectors in R^k from an unscrambled Halton sequence.

    Halton points are pushed through the inverse normal CDF and
    normalized, which is uniform on the sphere in the limit. For k=1 the
    directions are +-1.
    """
    if n < 1:
        return np.zeros((0, k))
    sampler = qmc.Halton(d=k, scramble=False)
    sampler.fast_forward(1)  # the first Halton point is the origin
    pts = sampler.random(n)
    gauss = ndtri(pts)
    norms = np.linalg.norm(gauss, axis=1, keepdims=True)
    # exact zeros only occur at Halton points equal to 1/2 in every coordinate
    norms[norms == 0] = 1.0
    out = gauss / norms
    out[np.all(gauss == 0, axis=1)] = np.eye(k)[0]
    return out
