"""Adam, as a pure update function plus a small stateful wrapper."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .tensor import ShapeError, Tensor


@dataclass
class AdamState:
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray | None],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> dict[str, np.ndarray]:
    """Return updated copies of ``params``; ``state`` is advanced in place.

    Moments start at zero the first time a name is seen. A missing (``None``)
    gradient counts as zero.
    """
    state.t += 1
    t = state.t
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    out = {}
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(p)
        if g.shape != p.shape:
            raise ShapeError(f"adam_step: grad shape {g.shape} != param shape {p.shape} for {name!r}")
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros(p.shape, dtype=np.float64)
            v = np.zeros(p.shape, dtype=np.float64)
        g64 = g.astype(np.float64)
        m = beta1 * m + (1 - beta1) * g64
        v = beta2 * v + (1 - beta2) * g64 * g64
        state.m[name] = m
        state.v[name] = v
        update = lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
        out[name] = (p - update).astype(p.dtype)
    return out


class Adam:
    """Stateful Adam over a named set of parameter tensors."""

    def __init__(self, params: Mapping[str, Tensor], lr: float = 2e-4, betas=(0.5, 0.999), eps: float = 1e-8):
        self.params = dict(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.state = AdamState()

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def step(self) -> None:
        new = adam_step(
            {k: p.data for k, p in self.params.items()},
            {k: p.grad for k, p in self.params.items()},
            self.state,
            self.lr,
            self.beta1,
            self.beta2,
            self.eps,
        )
        # leaves get fresh arrays; nothing recorded on a tape is mutated
        for k, p in self.params.items():
            p.data = new[k]
