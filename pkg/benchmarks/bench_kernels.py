"""Time the numba and pure-numpy conv kernels on the shapes training uses.

    python benchmarks/bench_kernels.py [--repeat 50]

Reports per-call time for im2col / col2im on each backend, checks that both
backends agree bit for bit, then times a full generator training step under
each backend.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from uqcycle import _kernels as K
from uqcycle.layers import StochasticConfig
from uqcycle.model import ModelConfig, TrainConfig, train

# (N, C, H, W, k, stride) for the layers of the default 32x32 generator
SHAPES = [
    (1, 1, 34, 34, 3, 2),
    (1, 8, 18, 18, 3, 2),
    (1, 16, 10, 10, 3, 1),
    (1, 8, 34, 34, 3, 1),
    (16, 8, 34, 34, 3, 1),
]


def _time(fn, repeat: int) -> float:
    fn()  # warm-up (and JIT compile)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def bench_kernels(repeat: int) -> None:
    rng = np.random.default_rng(0)
    print(f"{'shape':<28}{'op':<8}{'numpy us':>10}{'numba us':>10}{'speedup':>9}")
    for n, c, hp, wp, k, s in SHAPES:
        ho, wo = (hp - k) // s + 1, (wp - k) // s + 1
        xp = rng.standard_normal((n, c, hp, wp)).astype(np.float32)
        cols = K.im2col_numpy(xp, k, k, s, ho, wo)
        fwd = {
            "numpy": lambda: K.im2col_numpy(xp, k, k, s, ho, wo),
            "numba": lambda: K.im2col_numba(xp, k, k, s, ho, wo),
        }
        bwd = {
            "numpy": lambda: K.col2im_numpy(cols, c, hp, wp, k, k, s, ho, wo),
            "numba": lambda: K.col2im_numba(cols, c, hp, wp, k, k, s, ho, wo),
        }
        for op, impls in (("im2col", fwd), ("col2im", bwd)):
            same = impls["numpy"]().tobytes() == impls["numba"]().tobytes()
            t_np = _time(impls["numpy"], repeat) * 1e6
            t_nb = _time(impls["numba"], repeat) * 1e6
            label = f"{n}x{c}x{hp}x{wp} k{k} s{s}"
            print(f"{label:<28}{op:<8}{t_np:>10.1f}{t_nb:>10.1f}{t_np / t_nb:>8.2f}x" + ("" if same else "  MISMATCH"))


def bench_training(steps: int) -> None:
    rng = np.random.default_rng(1)
    p = rng.uniform(-1, 1, (8, 1, 32, 32)).astype(np.float32)
    q = rng.uniform(-1, 1, (8, 1, 32, 32)).astype(np.float32)
    for name in ("numpy", "numba"):
        K.set_backend(name)
        train(p, q, ModelConfig(), StochasticConfig("MC_DROPOUT"), TrainConfig(steps=1))
        t0 = time.perf_counter()
        train(p, q, ModelConfig(), StochasticConfig("MC_DROPOUT"), TrainConfig(steps=steps))
        print(f"training step ({name}): {(time.perf_counter() - t0) / steps * 1e3:.1f} ms")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--steps", type=int, default=20)
    args = ap.parse_args()
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed; pip install 'uqcycle[fast]'")
    bench_kernels(args.repeat)
    bench_training(args.steps)


if __name__ == "__main__":
    main()
