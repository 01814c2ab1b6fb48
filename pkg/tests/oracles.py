"""Independent reference computations used by several test modules.

None of these share code with the package: they recompute the quantity from
its definition by a different route (quadrature, pair counting, sorting).
"""
from __future__ import annotations

import numpy as np


def mixture_moments_by_quadrature(mus: np.ndarray, vars_: np.ndarray, points: int = 4001) -> tuple[np.ndarray, np.ndarray]:
    """Mean and variance of the equal-weight Gaussian mixture, per pixel.

    ``mus``/``vars_`` are ``(M, P)``. The density is tabulated on a grid
    covering +-12 sd of every component and integrated with the trapezoid
    rule, so nothing here relies on the law of total variance.
    """
    mus = np.asarray(mus, np.float64)
    sd = np.sqrt(np.asarray(vars_, np.float64))
    lo = (mus - 12 * sd).min(axis=0)
    hi = (mus + 12 * sd).max(axis=0)
    t = np.linspace(0.0, 1.0, points)
    z = lo[:, None] + (hi - lo)[:, None] * t[None, :]  # (P, G)
    dens = np.exp(-0.5 * ((z[None] - mus[..., None]) / sd[..., None]) ** 2) / (sd[..., None] * np.sqrt(2 * np.pi))
    p = dens.mean(axis=0)  # (P, G)
    mass = np.trapezoid(p, z, axis=1)
    mean = np.trapezoid(z * p, z, axis=1) / mass
    var = np.trapezoid((z - mean[:, None]) ** 2 * p, z, axis=1) / mass
    return mean, var


def mann_whitney_auc(id_scores, ood_scores) -> float:
    """P(score_ood > score_id) + 0.5 P(tie), by explicit O(n^2) pair counting."""
    wins = 0.0
    for o in ood_scores:
        for i in id_scores:
            if o > i:
                wins += 1.0
            elif o == i:
                wins += 0.5
    return wins / (len(id_scores) * len(ood_scores))


def percentile_by_sorting(values, q: float) -> float:
    """Linear-interpolation percentile (rank ``q/100 * (n-1)``) from a sort."""
    v = sorted(float(x) for x in np.ravel(values))
    rank = q / 100.0 * (len(v) - 1)
    lo = int(np.floor(rank))
    hi = min(lo + 1, len(v) - 1)
    return v[lo] + (v[hi] - v[lo]) * (rank - lo)
