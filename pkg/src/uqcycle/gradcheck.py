"""Central finite-difference gradient checks against the tape.

Run in float64: with float32 storage the truncation/round-off trade-off of a
central difference bottoms out near 1e-3 relative error, far above what is
needed to tell a right backward rule from a subtly wrong one.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor, backward


@dataclass
class GradCheck:
    name: str
    max_rel_err: float
    max_abs_err: float
    checked: int

    def ok(self, tol: float) -> bool:
        return self.max_rel_err < tol


def rel_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> np.ndarray:
    """``|a - n| / max(|a|, |n|)`` elementwise; 0 where ``|a| + |n| < floor``."""
    a, n = np.abs(analytic), np.abs(numeric)
    exempt = a + n < floor
    denom = np.where(exempt, 1.0, np.maximum(a, n))
    return np.where(exempt, 0.0, np.abs(analytic - numeric) / denom)


def numeric_grad(f: Callable[[], Tensor], p: Tensor, eps: float = 1e-6, index=None) -> np.ndarray:
    """Central differences of scalar ``f()`` w.r.t. ``p.data`` (optionally a subset of flat indices)."""
    p.data = np.ascontiguousarray(p.data)
    flat = p.data.reshape(-1)  # a view, so writes perturb p in place
    idx = range(flat.size) if index is None else index
    out = np.zeros(flat.size)
    for i in idx:
        old = flat[i]
        flat[i] = old + eps
        up = float(f().data)
        flat[i] = old - eps
        down = float(f().data)
        flat[i] = old
        out[i] = (up - down) / (2 * eps)
    return out.reshape(p.shape)


def check_gradients(
    f: Callable[[], Tensor],
    params: Sequence[Tensor],
    eps: float = 1e-6,
    max_per_param: int | None = None,
    rng: np.random.Generator | None = None,
    name: str = "",
    abs_floor: float = 1e-6,
) -> GradCheck:
    """Compare tape gradients of scalar ``f()`` with central differences.

    ``f`` must be deterministic (fix any rng inside it). With
    ``max_per_param`` only a random subset of coordinates is perturbed.
    """
    for p in params:
        if p.dtype != np.float64:
            raise TypeError("check_gradients needs float64 parameters")
        p.grad = None
    backward(f())
    worst_rel = worst_abs = 0.0
    n = 0
    rng = rng or np.random.default_rng(0)
    for p in params:
        analytic = np.zeros(p.shape) if p.grad is None else p.grad.astype(np.float64)
        index = None
        if max_per_param is not None and p.size > max_per_param:
            index = rng.choice(p.size, max_per_param, replace=False)
        numeric = numeric_grad(f, p, eps, index)
        sel = np.arange(p.size) if index is None else index
        a, m = analytic.reshape(-1)[sel], numeric.reshape(-1)[sel]
        worst_rel = max(worst_rel, float(rel_error(a, m, abs_floor).max()))
        worst_abs = max(worst_abs, float(np.abs(a - m).max()))
        n += len(sel)
    return GradCheck(name, worst_rel, worst_abs, n)
