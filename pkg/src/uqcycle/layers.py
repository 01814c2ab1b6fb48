"""Stochastic layers used to sample an approximate weight posterior.

All four methods share one calling convention: a layer is called with an
input tensor and a ``numpy.random.Generator``; the generator supplies every
random draw (masks, Gaussian weight noise, sign vectors), so a
(method, seed, input) triple fixes the output. Stochasticity stays on at
inference time, which is what makes repeated forward passes samples.
"""
from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

import numpy as np

from . import tensor as T
from .tensor import ShapeError, Tensor


class Method(str, enum.Enum):
    MC_DROPOUT = "MC_DROPOUT"
    MC_DROPCONNECT = "MC_DROPCONNECT"
    FLIPOUT = "FLIPOUT"
    ENSEMBLE = "ENSEMBLE"


DEFAULT_DROP_PROB = {Method.MC_DROPOUT: 0.5, Method.MC_DROPCONNECT: 0.05}
DEFAULT_SAMPLES = 16
DEFAULT_ENSEMBLE_SIZE = 5
DEFAULT_FLIPOUT_LOGVAR = -6.0


@dataclass(frozen=True)
class StochasticConfig:
    method: Method = Method.MC_DROPOUT
    drop_prob: float | None = None
    ensemble_size: int = DEFAULT_ENSEMBLE_SIZE
    flipout_init_logvar: float = DEFAULT_FLIPOUT_LOGVAR
    samples: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.drop_prob is None:
            object.__setattr__(self, "drop_prob", DEFAULT_DROP_PROB.get(self.method, 0.0))
        if self.samples is None:
            n = self.ensemble_size if self.method is Method.ENSEMBLE else DEFAULT_SAMPLES
            object.__setattr__(self, "samples", n)
        _check_prob(self.drop_prob)
        if self.ensemble_size < 1:
            raise ValueError(f"ensemble_size must be >= 1, got {self.ensemble_size}")
        if self.samples < 1:
            raise ValueError(f"sample count M must be >= 1, got {self.samples}")
        if self.method is Method.ENSEMBLE and self.samples != self.ensemble_size:
            raise ValueError(
                f"ENSEMBLE needs M == ensemble_size, got M={self.samples}, ensemble_size={self.ensemble_size}"
            )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = self.method.value
        return d


def _check_prob(p: float) -> None:
    if not (0.0 <= p < 1.0):
        raise ValueError(f"drop probability must lie in [0, 1), got {p}")


def dropout_forward(x: Tensor, p: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout: zero each activation w.p. ``p``, scale survivors by 1/(1-p)."""
    _check_prob(p)
    if p == 0.0:
        return x
    keep = rng.random(x.shape) >= p
    mask = keep.astype(x.dtype) * x.dtype.type(1.0 / (1.0 - p))
    return x * Tensor._wrap(mask)


def dropconnect_mask(weight: Tensor, p: float, rng: np.random.Generator) -> Tensor:
    _check_prob(p)
    keep = rng.random(weight.shape) >= p
    return Tensor._wrap(keep.astype(weight.dtype) * weight.dtype.type(1.0 / (1.0 - p)))


def dropconnect_forward(
    x: Tensor,
    weight: Tensor,
    p: float,
    rng: np.random.Generator,
    bias: Tensor | None = None,
    stride: int = 1,
    pad: int = 0,
) -> Tensor:
    """Convolution with each weight dropped w.p. ``p`` (survivors scaled by 1/(1-p))."""
    _check_prob(p)
    w = weight if p == 0.0 else weight * dropconnect_mask(weight, p, rng)
    if x.ndim == 2:
        out = T.matmul(x, _dense(w))
        return out if bias is None else out + bias
    return T.conv2d(x, w, bias, stride=stride, pad=pad)


def _dense(w: Tensor) -> Tensor:
    # (O, C[, 1, 1]) -> (C, O) for a row-vector matmul
    if w.ndim == 4:
        if w.shape[2:] != (1, 1):
            raise ShapeError(f"dense weight must be 1x1, got {w.shape}")
        w = T.reshape(w, w.shape[:2])
    return T.transpose(w)


class VariationalWeight:
    """Gaussian weight posterior ``N(mean, exp(log_var))`` with trainable moments."""

    def __init__(self, mean: np.ndarray, log_var: np.ndarray | float):
        self.mean = Tensor(mean, requires_grad=True, dtype=mean.dtype)
        lv = np.broadcast_to(np.asarray(log_var, dtype=mean.dtype), mean.shape)
        self.log_var = Tensor(lv, requires_grad=True, dtype=mean.dtype)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.mean.shape

    def std(self) -> Tensor:
        return T.exp(self.log_var * 0.5)

    def perturbation(self, rng: np.random.Generator) -> Tensor:
        """One draw of ``exp(log_var/2) * xi``, xi ~ N(0, I)."""
        xi = rng.standard_normal(self.shape).astype(self.mean.dtype)
        return self.std() * Tensor._wrap(xi)

    def sample(self, rng: np.random.Generator) -> Tensor:
        return self.mean + self.perturbation(rng)


def rademacher(rng: np.random.Generator, shape, dtype=np.float32) -> np.ndarray:
    return (rng.integers(0, 2, size=shape) * 2 - 1).astype(dtype)


def flipout_forward(
    x: Tensor, vw: VariationalWeight, rng: np.random.Generator, bias: Tensor | None = None
) -> Tensor:
    """Dense / 1x1-conv layer with Flipout weight noise.

    ``out = x W_mean + ((x * s) dW) * r`` with one shared draw ``dW`` and
    per-example Rademacher sign vectors ``s`` (inputs) and ``r`` (outputs).
    No KL term is produced anywhere: the prior is disabled.
    """
    w = vw.mean
    if w.ndim == 4 and w.shape[2:] != (1, 1):
        raise ShapeError(f"flipout_forward: weight must be dense or 1x1, got {w.shape}")
    o, c = w.shape[:2]
    if x.ndim not in (2, 4) or x.shape[1] != c:
        raise ShapeError(f"flipout_forward: input {x.shape} incompatible with weight {w.shape}")
    n = x.shape[0]
    if n < 1:
        raise ShapeError("flipout_forward: empty batch")
    dw = vw.perturbation(rng)
    extra = (1, 1) if x.ndim == 4 else ()
    s = Tensor._wrap(rademacher(rng, (n, c) + extra, x.dtype))
    r = Tensor._wrap(rademacher(rng, (n, o) + extra, x.dtype))
    if x.ndim == 4:
        w4 = w if w.ndim == 4 else T.reshape(w, (o, c, 1, 1))
        dw4 = dw if dw.ndim == 4 else T.reshape(dw, (o, c, 1, 1))
        base = T.conv2d(x, w4, bias)
        pert = T.conv2d(x * s, dw4) * r
    else:
        w2 = T.reshape(w, (o, c))
        dw2 = T.reshape(dw, (o, c))
        base = T.matmul(x, T.transpose(w2))
        if bias is not None:
            base = base + bias
        pert = T.matmul(x * s, T.transpose(dw2)) * r
    return base + pert


class Conv2d:
    """Convolution layer whose weight handling depends on ``kind``.

    ``plain``        deterministic weights
    ``dropconnect``  weights masked with probability ``p`` on every call
    ``variational``  Gaussian weights; 1x1 kernels use Flipout, larger
                     kernels one shared reparameterized draw per call
    """

    def __init__(
        self,
        cin: int,
        cout: int,
        k: int,
        rng: np.random.Generator,
        *,
        stride: int = 1,
        pad: int | None = None,
        kind: str = "plain",
        p: float = 0.0,
        init_logvar: float = DEFAULT_FLIPOUT_LOGVAR,
        dtype=np.float32,
    ):
        if kind not in ("plain", "dropconnect", "variational"):
            raise ValueError(f"unknown conv kind {kind!r}")
        self.stride = stride
        self.pad = k // 2 if pad is None else pad
        self.kind = kind
        self.p = p
        fan_in = cin * k * k
        w = (rng.standard_normal((cout, cin, k, k)) * np.sqrt(2.0 / fan_in)).astype(dtype)
        self.bias = Tensor(np.zeros(cout), requires_grad=True, dtype=dtype)
        if kind == "variational":
            self.vw = VariationalWeight(w, init_logvar)
            self.weight = self.vw.mean
        else:
            self.vw = None
            self.weight = Tensor(w, requires_grad=True, dtype=dtype)

    def parameters(self, prefix: str = "") -> dict[str, Tensor]:
        out = {f"{prefix}weight": self.weight, f"{prefix}bias": self.bias}
        if self.vw is not None:
            out[f"{prefix}weight_logvar"] = self.vw.log_var
        return out

    def __call__(self, x: Tensor, rng: np.random.Generator | None = None) -> Tensor:
        if self.kind == "plain":
            return T.conv2d(x, self.weight, self.bias, stride=self.stride, pad=self.pad)
        if rng is None:
            raise ValueError(f"{self.kind} layer needs an rng")
        if self.kind == "dropconnect":
            return dropconnect_forward(x, self.weight, self.p, rng, self.bias, self.stride, self.pad)
        if self.weight.shape[2:] == (1, 1) and self.stride == 1 and self.pad == 0:
            return flipout_forward(x, self.vw, rng, self.bias)
        return T.conv2d(x, self.vw.sample(rng), self.bias, stride=self.stride, pad=self.pad)
