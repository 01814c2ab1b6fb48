"""Dense n-d tensors with tape-based reverse-mode differentiation.

Every op that touches a tensor with ``requires_grad`` records a :class:`Node`
holding its inputs and a backward rule. Nodes carry a global sequence number,
so the recorded order is a valid topological order; :func:`backward` replays
the nodes reachable from the loss in reverse of that order, visiting each one
exactly once.

Tensors are float32 by default. Float64 is accepted end to end (finite
difference checks need it) and ops keep the dtype of their inputs.
"""
from __future__ import annotations

import builtins
import itertools
import threading
from contextlib import contextmanager
from typing import Callable, Sequence

import numpy as np

from . import _kernels

__all__ = [
    "Tensor",
    "Tape",
    "ShapeError",
    "NonFiniteError",
    "backward",
    "no_grad",
    "grad_enabled",
    "add",
    "sub",
    "mul",
    "div",
    "neg",
    "matmul",
    "conv2d",
    "conv_transpose2d",
    "upsample_nearest",
    "leaky_relu",
    "relu",
    "tanh",
    "sigmoid",
    "softplus",
    "exp",
    "log",
    "abs",
    "clamp",
    "mean",
    "sum",
    "reshape",
    "transpose",
    "slice",
    "concat",
    "broadcast_to",
    "instance_norm",
]


class ShapeError(ValueError):
    """Operands have incompatible shapes."""


class NonFiniteError(ArithmeticError):
    """An op produced NaN or inf."""

    def __init__(self, op: str):
        super().__init__(f"{op}: non-finite value in output")
        self.op = op


_seq = itertools.count()
_state = threading.local()


def grad_enabled() -> bool:
    return getattr(_state, "enabled", True)


@contextmanager
def no_grad():
    """Disable recording inside the block (inference, optimizer updates)."""
    prev = grad_enabled()
    _state.enabled = False
    try:
        yield
    finally:
        _state.enabled = prev


class Node:
    __slots__ = ("seq", "op", "inputs", "output", "backward_fn")

    def __init__(self, op: str, inputs: tuple, output: "Tensor", backward_fn: Callable):
        self.seq = next(_seq)
        self.op = op
        self.inputs = inputs
        self.output = output
        self.backward_fn = backward_fn


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_node", "name", "__weakref__")

    # numpy must defer to our reflected operators
    __array_ufunc__ = None

    def __init__(self, data, requires_grad: bool = False, dtype=None, name: str | None = None):
        if isinstance(data, Tensor):
            data = data.data
        if dtype is None:
            dtype = np.float32
        arr = np.array(data, dtype=dtype, copy=True)
        if arr.dtype not in (np.float32, np.float64):
            raise TypeError(f"unsupported tensor dtype {arr.dtype}")
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._node: Node | None = None
        self.name = name

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "Tensor":
        t = cls.__new__(cls)
        t.data = arr
        t.requires_grad = False
        t.grad = None
        t._node = None
        t.name = None
        return t

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item: tensor of shape {self.shape} is not a scalar")
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor._wrap(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        rg = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{rg})"

    def __len__(self) -> int:
        return self.shape[0]

    __add__ = lambda a, b: add(a, b)
    __radd__ = lambda a, b: add(b, a)
    __sub__ = lambda a, b: sub(a, b)
    __rsub__ = lambda a, b: sub(b, a)
    __mul__ = lambda a, b: mul(a, b)
    __rmul__ = lambda a, b: mul(b, a)
    __truediv__ = lambda a, b: div(a, b)
    __rtruediv__ = lambda a, b: div(b, a)
    __matmul__ = lambda a, b: matmul(a, b)
    __neg__ = lambda a: neg(a)
    __getitem__ = lambda a, idx: slice(a, idx)

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        return sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        return mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)


def _as_tensor(x, like: Tensor | None = None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    dtype = like.dtype if like is not None else np.float32
    return Tensor._wrap(np.asarray(x, dtype=dtype))


def _check_finite(op: str, arr: np.ndarray) -> None:
    if not np.isfinite(arr).all():
        raise NonFiniteError(op)


def _record(op: str, out: np.ndarray, inputs: Sequence[Tensor], backward_fn: Callable) -> Tensor:
    _check_finite(op, out)
    t = Tensor._wrap(out)
    if grad_enabled() and any(x.requires_grad for x in inputs):
        t.requires_grad = True
        t._node = Node(op, tuple(inputs), t, backward_fn)
    return t


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: incompatible shapes {a.shape} and {b.shape}") from None


# ---------------------------------------------------------------------------
# tape


class Tape:
    """Nodes reachable from a scalar loss, in recorded (topological) order."""

    def __init__(self, loss: Tensor):
        seen: set[int] = set()
        nodes: list[Node] = []
        stack = [loss]
        while stack:
            t = stack.pop()
            node = t._node
            if node is None or id(node) in seen:
                continue
            seen.add(id(node))
            nodes.append(node)
            stack.extend(node.inputs)
        nodes.sort(key=lambda n: n.seq)
        self.nodes = nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def ops(self) -> list[str]:
        return [n.op for n in self.nodes]

    def backward(self, loss: Tensor) -> None:
        grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        for node in reversed(self.nodes):
            g = grads.pop(id(node.output), None)
            if g is None:
                continue
            in_grads = node.backward_fn(g)
            for x, gx in zip(node.inputs, in_grads):
                if gx is None or not x.requires_grad:
                    continue
                if x._node is None:
                    x.grad = gx.astype(x.dtype, copy=False) if x.grad is None else x.grad + gx
                else:
                    prev = grads.get(id(x))
                    grads[id(x)] = gx if prev is None else prev + gx


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into ``.grad`` of every requires_grad leaf."""
    if loss.data.size != 1:
        raise ShapeError(f"backward: loss must be a scalar, got shape {loss.shape}")
    if loss._node is None:
        raise ValueError("backward: loss was not produced by any recorded op")
    Tape(loss).backward(loss)


# ---------------------------------------------------------------------------
# elementwise


def add(a, b) -> Tensor:
    a, b = _as_tensor(a, b if isinstance(b, Tensor) else None), _as_tensor(b, a if isinstance(a, Tensor) else None)
    _broadcast_shape("add", a, b)
    return _record("add", a.data + b.data, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a, b if isinstance(b, Tensor) else None), _as_tensor(b, a if isinstance(a, Tensor) else None)
    _broadcast_shape("sub", a, b)
    return _record("sub", a.data - b.data, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a, b if isinstance(b, Tensor) else None), _as_tensor(b, a if isinstance(a, Tensor) else None)
    _broadcast_shape("mul", a, b)

    def bw(g):
        return (
            _unbroadcast(g * b.data, a.shape) if a.requires_grad else None,
            _unbroadcast(g * a.data, b.shape) if b.requires_grad else None,
        )

    return _record("mul", a.data * b.data, (a, b), bw)


def div(a, b) -> Tensor:
    a, b = _as_tensor(a, b if isinstance(b, Tensor) else None), _as_tensor(b, a if isinstance(a, Tensor) else None)
    _broadcast_shape("div", a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a.data / b.data

    def bw(g):
        return (
            _unbroadcast(g / b.data, a.shape) if a.requires_grad else None,
            _unbroadcast(-g * a.data / (b.data * b.data), b.shape) if b.requires_grad else None,
        )

    return _record("div", out, (a, b), bw)


def neg(a: Tensor) -> Tensor:
    return _record("neg", -a.data, (a,), lambda g: (-g,))


def exp(a: Tensor) -> Tensor:
    with np.errstate(over="ignore"):
        out = np.exp(a.data)
    return _record("exp", out, (a,), lambda g: (g * out,))


def log(a: Tensor) -> Tensor:
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(a.data)
    return _record("log", out, (a,), lambda g: (g / a.data,))


def abs(a: Tensor) -> Tensor:  # noqa: A001 - mirrors numpy naming
    return _record("abs", np.abs(a.data), (a,), lambda g: (g * np.sign(a.data),))


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.data)
    return _record("tanh", out, (a,), lambda g: (g * (1 - out * out),))


def sigmoid(a: Tensor) -> Tensor:
    out = _sigmoid(a.data)
    return _record("sigmoid", out, (a,), lambda g: (g * out * (1 - out),))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1 / (1 + e), e / (1 + e)).astype(x.dtype, copy=False)


def softplus(a: Tensor) -> Tensor:
    x = a.data
    out = np.log1p(np.exp(-np.abs(x))) + np.maximum(x, 0)
    return _record("softplus", out, (a,), lambda g: (g * _sigmoid(x),))


def relu(a: Tensor) -> Tensor:
    return leaky_relu(a, 0.0)


def leaky_relu(a: Tensor, slope: float = 0.2) -> Tensor:
    x = a.data
    pos = x > 0
    out = np.where(pos, x, x * x.dtype.type(slope))
    return _record("leaky_relu", out, (a,), lambda g: (np.where(pos, g, g * g.dtype.type(slope)),))


def clamp(a: Tensor, lo: float, hi: float) -> Tensor:
    """Clip to ``[lo, hi]``; gradient is zero where the input was clipped."""
    x = a.data
    out = np.clip(x, lo, hi)
    inside = (x >= lo) & (x <= hi)
    return _record("clamp", out, (a,), lambda g: (np.where(inside, g, 0).astype(g.dtype, copy=False),))


# ---------------------------------------------------------------------------
# reductions and shape ops


def _norm_axis(axis, ndim: int) -> tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(ax % ndim for ax in axis)


def sum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:  # noqa: A001
    axes = _norm_axis(axis, a.ndim)
    # accumulate in float64 to limit drift in losses
    out = a.data.sum(axis=axes, keepdims=keepdims, dtype=np.float64).astype(a.dtype)

    def bw(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g, a.shape).astype(a.dtype),)

    return _record("sum", out, (a,), bw)


def mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _norm_axis(axis, a.ndim)
    count = int(np.prod([a.shape[ax] for ax in axes])) if axes else 1
    if count == 0:
        raise ShapeError(f"mean: empty reduction over shape {a.shape}")
    out = (a.data.sum(axis=axes, keepdims=keepdims, dtype=np.float64) / count).astype(a.dtype)

    def bw(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g / count, a.shape).astype(a.dtype),)

    return _record("mean", out, (a,), bw)


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        out = a.data.reshape(shape)
    except ValueError:
        raise ShapeError(f"reshape: cannot reshape {a.shape} into {tuple(shape)}") from None
    return _record("reshape", out, (a,), lambda g: (g.reshape(a.shape),))


def transpose(a: Tensor) -> Tensor:
    """Reverse the axes (matrix transpose for 2-D)."""
    return _record("transpose", np.ascontiguousarray(a.data.T), (a,), lambda g: (g.T,))


def slice(a: Tensor, index) -> Tensor:  # noqa: A001
    """Basic indexing (ints, slices, Ellipsis). Fancy indexing is rejected."""
    idx = index if isinstance(index, tuple) else (index,)
    for part in idx:
        if not (part is Ellipsis or part is None or isinstance(part, (int, np.integer, builtins.slice))):
            raise TypeError(f"slice: unsupported index component {part!r}")
    try:
        out = a.data[index]
    except IndexError as e:
        raise ShapeError(f"slice: {e} for shape {a.shape}") from None

    def bw(g):
        full = np.zeros_like(a.data)
        full[index] = g
        return (full,)

    return _record("slice", np.array(out, copy=True), (a,), bw)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = list(tensors)
    if not tensors:
        raise ShapeError("concat: no tensors given")
    ref = tensors[0].shape
    ax = axis % len(ref)
    for t in tensors[1:]:
        if len(t.shape) != len(ref) or any(s != r for i, (s, r) in enumerate(zip(t.shape, ref)) if i != ax):
            raise ShapeError(f"concat: shape {t.shape} incompatible with {ref} along axis {axis}")
    out = np.concatenate([t.data for t in tensors], axis=ax)
    bounds = np.cumsum([0] + [t.shape[ax] for t in tensors])

    def bw(g):
        return tuple(
            np.take(g, np.arange(bounds[i], bounds[i + 1]), axis=ax) for i in range(len(tensors))
        )

    return _record("concat", out, tensors, bw)


def broadcast_to(a: Tensor, shape: Sequence[int]) -> Tensor:
    shape = tuple(shape)
    try:
        out = np.broadcast_to(a.data, shape).copy()
    except ValueError:
        raise ShapeError(f"broadcast: cannot broadcast {a.shape} to {shape}") from None
    return _record("broadcast", out, (a,), lambda g: (_unbroadcast(g, a.shape),))


# ---------------------------------------------------------------------------
# linear algebra and convolution


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    out = np.matmul(a.data, b.data)

    def bw(g):
        ga = _unbroadcast(np.matmul(g, np.swapaxes(b.data, -1, -2)), a.shape) if a.requires_grad else None
        gb = _unbroadcast(np.matmul(np.swapaxes(a.data, -1, -2), g), b.shape) if b.requires_grad else None
        return ga, gb

    return _record("matmul", out, (a, b), bw)


def _pad(x: np.ndarray, pad: int) -> np.ndarray:
    if pad == 0:
        return x
    n, c, h, w = x.shape
    out = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype=x.dtype)
    out[:, :, pad : pad + h, pad : pad + w] = x
    return out


def conv2d(x: Tensor, w: Tensor, b: Tensor | None = None, stride: int = 1, pad: int = 0) -> Tensor:
    """Cross-correlation of ``x (N,C,H,W)`` with ``w (O,C,kh,kw)``."""
    if x.ndim != 4 or w.ndim != 4 or x.shape[1] != w.shape[1]:
        raise ShapeError(f"conv2d: incompatible shapes {x.shape} and {w.shape}")
    n, c, h, wd = x.shape
    o, _, kh, kw = w.shape
    hp, wp = h + 2 * pad, wd + 2 * pad
    if kh > hp or kw > wp:
        raise ShapeError(f"conv2d: kernel {w.shape} larger than padded input {x.shape} (pad={pad})")
    if b is not None and b.shape != (o,):
        raise ShapeError(f"conv2d: bias shape {b.shape} does not match {o} output channels")
    ho, wo = (hp - kh) // stride + 1, (wp - kw) // stride + 1
    cols = _kernels.im2col(_pad(x.data, pad), kh, kw, stride, ho, wo)
    wm = w.data.reshape(o, -1)
    out = np.matmul(wm, cols).reshape(n, o, ho, wo)
    if b is not None:
        out += b.data[None, :, None, None]

    def bw(g):
        gm = g.reshape(n, o, ho * wo)
        gx = gw = gb = None
        if x.requires_grad:
            dcols = np.matmul(wm.T, gm)
            gx = _kernels.col2im(dcols, c, hp, wp, kh, kw, stride, ho, wo)[:, :, pad : pad + h, pad : pad + wd]
        if w.requires_grad:
            gw = np.tensordot(gm, cols, axes=([0, 2], [0, 2])).reshape(w.shape)
        if b is not None and b.requires_grad:
            gb = g.sum(axis=(0, 2, 3))
        return gx, gw, gb

    inputs = (x, w) if b is None else (x, w, b)
    return _record("conv2d", out, inputs, bw)


def conv_transpose2d(x: Tensor, w: Tensor, b: Tensor | None = None, stride: int = 1, pad: int = 0) -> Tensor:
    """Transposed convolution; ``w`` is ``(C_in, C_out, kh, kw)``."""
    if x.ndim != 4 or w.ndim != 4 or x.shape[1] != w.shape[0]:
        raise ShapeError(f"conv_transpose2d: incompatible shapes {x.shape} and {w.shape}")
    n, cin, h, wd = x.shape
    _, cout, kh, kw = w.shape
    hp, wp = (h - 1) * stride + kh, (wd - 1) * stride + kw
    ho, wo = hp - 2 * pad, wp - 2 * pad
    if ho < 1 or wo < 1:
        raise ShapeError(f"conv_transpose2d: padding {pad} too large for output {hp}x{wp}")
    wm = w.data.reshape(cin, -1)
    xm = x.data.reshape(n, cin, h * wd)
    cols = np.matmul(wm.T, xm)
    out = _kernels.col2im(cols, cout, hp, wp, kh, kw, stride, h, wd)[:, :, pad : pad + ho, pad : pad + wo]
    out = np.ascontiguousarray(out)
    if b is not None:
        out += b.data[None, :, None, None]

    def bw(g):
        gp = _pad(g, pad)
        gcols = _kernels.im2col(gp, kh, kw, stride, h, wd)
        gx = gw = gb = None
        if x.requires_grad:
            gx = np.matmul(wm, gcols).reshape(x.shape)
        if w.requires_grad:
            gw = np.tensordot(xm, gcols, axes=([0, 2], [0, 2])).reshape(w.shape)
        if b is not None and b.requires_grad:
            gb = g.sum(axis=(0, 2, 3))
        return gx, gw, gb

    inputs = (x, w) if b is None else (x, w, b)
    return _record("conv_transpose2d", out, inputs, bw)


def upsample_nearest(x: Tensor, factor: int = 2) -> Tensor:
    if x.ndim != 4:
        raise ShapeError(f"upsample_nearest: expected NCHW input, got {x.shape}")
    n, c, h, w = x.shape
    out = np.repeat(np.repeat(x.data, factor, axis=2), factor, axis=3)
    return _record(
        "upsample_nearest",
        out,
        (x,),
        lambda g: (g.reshape(n, c, h, factor, w, factor).sum(axis=(3, 5)),),
    )


def instance_norm(x: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize each (sample, channel) plane to zero mean, unit variance."""
    if x.ndim != 4:
        raise ShapeError(f"instance_norm: expected NCHW input, got {x.shape}")
    xd = x.data
    mu = xd.mean(axis=(2, 3), keepdims=True)
    var = xd.var(axis=(2, 3), keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (xd - mu) * inv

    def bw(g):
        gm = g.mean(axis=(2, 3), keepdims=True)
        gxm = (g * xhat).mean(axis=(2, 3), keepdims=True)
        return (inv * (g - gm - xhat * gxm),)

    return _record("instance_norm", xhat.astype(xd.dtype, copy=False), (x,), bw)
