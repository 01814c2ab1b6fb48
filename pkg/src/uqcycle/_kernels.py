"""Hot loops behind conv2d: im2col / col2im.

Two interchangeable implementations are kept side by side. The numba path is
used when numba imports and ``UQT_NUMBA`` is not ``"0"``; otherwise the
pure-numpy path (strided slice copies) runs. Both produce bit-identical
results, so switching backends never changes a checkpoint.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False


def _env_wants_numba() -> bool:
    return os.environ.get("UQT_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")


_backend = "numba" if (HAVE_NUMBA and _env_wants_numba()) else "numpy"


def backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    """Switch kernel backend at runtime (``"numba"`` or ``"numpy"``)."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown kernel backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    _backend = name


# ---------------------------------------------------------------------------
# pure numpy


def im2col_numpy(xp: np.ndarray, kh: int, kw: int, stride: int, ho: int, wo: int) -> np.ndarray:
    n, c = xp.shape[:2]
    cols = np.empty((n, c, kh, kw, ho, wo), dtype=xp.dtype)
    for i in range(kh):
        for j in range(kw):
            cols[:, :, i, j] = xp[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride]
    return cols.reshape(n, c * kh * kw, ho * wo)


def col2im_numpy(
    cols: np.ndarray, c: int, hp: int, wp: int, kh: int, kw: int, stride: int, ho: int, wo: int
) -> np.ndarray:
    n = cols.shape[0]
    cols6 = cols.reshape(n, c, kh, kw, ho, wo)
    out = np.zeros((n, c, hp, wp), dtype=cols.dtype)
    for i in range(kh):
        for j in range(kw):
            out[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride] += cols6[:, :, i, j]
    return out


# ---------------------------------------------------------------------------
# numba

if HAVE_NUMBA:

    @njit(cache=True)
    def _im2col_nb(xp, kh, kw, stride, ho, wo):
        n, c = xp.shape[0], xp.shape[1]
        cols = np.empty((n, c * kh * kw, ho * wo), dtype=xp.dtype)
        for b in range(n):
            for ch in range(c):
                for i in range(kh):
                    for j in range(kw):
                        row = (ch * kh + i) * kw + j
                        for y in range(ho):
                            yy = y * stride + i
                            base = y * wo
                            for x in range(wo):
                                cols[b, row, base + x] = xp[b, ch, yy, x * stride + j]
        return cols

    @njit(cache=True)
    def _col2im_nb(cols, c, hp, wp, kh, kw, stride, ho, wo):
        n = cols.shape[0]
        out = np.zeros((n, c, hp, wp), dtype=cols.dtype)
        # (i, j) outermost per channel: same summation order as the numpy path
        for b in range(n):
            for ch in range(c):
                for i in range(kh):
                    for j in range(kw):
                        row = (ch * kh + i) * kw + j
                        for y in range(ho):
                            yy = y * stride + i
                            base = y * wo
                            for x in range(wo):
                                out[b, ch, yy, x * stride + j] += cols[b, row, base + x]
        return out


def im2col_numba(xp: np.ndarray, kh: int, kw: int, stride: int, ho: int, wo: int) -> np.ndarray:
    return _im2col_nb(np.ascontiguousarray(xp), kh, kw, stride, ho, wo)


def col2im_numba(
    cols: np.ndarray, c: int, hp: int, wp: int, kh: int, kw: int, stride: int, ho: int, wo: int
) -> np.ndarray:
    return _col2im_nb(np.ascontiguousarray(cols), c, hp, wp, kh, kw, stride, ho, wo)


def im2col(xp: np.ndarray, kh: int, kw: int, stride: int, ho: int, wo: int) -> np.ndarray:
    """Unfold ``(N, C, Hp, Wp)`` into ``(N, C*kh*kw, ho*wo)`` patch columns."""
    if _backend == "numba":
        return im2col_numba(xp, kh, kw, stride, ho, wo)
    return im2col_numpy(xp, kh, kw, stride, ho, wo)


def col2im(
    cols: np.ndarray, c: int, hp: int, wp: int, kh: int, kw: int, stride: int, ho: int, wo: int
) -> np.ndarray:
    """Adjoint of :func:`im2col`: scatter-add columns back to ``(N, C, hp, wp)``."""
    if _backend == "numba":
        return col2im_numba(cols, c, hp, wp, kh, kw, stride, ho, wo)
    return col2im_numpy(cols, c, hp, wp, kh, kw, stride, ho, wo)
