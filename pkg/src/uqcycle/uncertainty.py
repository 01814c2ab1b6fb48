"""Gaussian-mixture combination of sampled predictions and its variance split.

Given M sampled heads ``(mu_i, var_i)`` for one input, the equal-weight
mixture has mean ``mean_i mu_i`` and variance

    mean_i var_i  +  mean_i mu_i**2 - (mean_i mu_i)**2
    \\__________/     \\_____________________________/
     aleatoric                 epistemic

so the total splits exactly into the two parts.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

TWO_PASS_MAX_M = 64


@dataclass
class SampleSet:
    """M sampled (mean, variance) prediction pairs for the same input batch."""

    mus: np.ndarray
    vars: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.mus = np.asarray(self.mus)
        self.vars = np.asarray(self.vars)
        if self.mus.ndim < 1 or self.mus.shape[0] < 1:
            raise ValueError("SampleSet needs at least one sample")
        if self.mus.shape != self.vars.shape:
            raise ValueError(f"SampleSet: mus {self.mus.shape} and vars {self.vars.shape} differ in shape")
        if not np.all(self.vars > 0):
            raise ValueError("SampleSet: variances must be strictly positive")

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[np.ndarray, np.ndarray]], provenance: dict | None = None) -> "SampleSet":
        if not pairs:
            raise ValueError("SampleSet needs at least one sample")
        return cls(np.stack([p[0] for p in pairs]), np.stack([p[1] for p in pairs]), provenance or {})

    @property
    def m(self) -> int:
        return self.mus.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.mus.shape[1:]


@dataclass
class UncertaintyMaps:
    mu_star: np.ndarray
    aleatoric: np.ndarray
    epistemic: np.ndarray
    total: np.ndarray

    def kind(self, name: str) -> np.ndarray:
        return getattr(self, name.lower())


def combine(samples: SampleSet) -> UncertaintyMaps:
    """Collapse a SampleSet into mixture mean plus aleatoric/epistemic/total maps."""
    if samples is None or samples.m < 1:
        raise ValueError("combine: empty SampleSet")
    mus = samples.mus.astype(np.float64)
    vars_ = samples.vars.astype(np.float64)
    m = mus.shape[0]
    # moments of offsets from the first sample: exact zeros when all samples agree
    d = mus - mus[0]
    d_mean = d.mean(axis=0)
    mu_star = mus[0] + d_mean
    aleatoric = vars_.mean(axis=0)
    if m <= TWO_PASS_MAX_M:
        epistemic = ((d - d_mean) ** 2).mean(axis=0)
    else:
        epistemic = np.maximum((d**2).mean(axis=0) - d_mean**2, 0.0)
    return UncertaintyMaps(mu_star, aleatoric, epistemic, aleatoric + epistemic)


class AggMode(str, enum.Enum):
    PIXEL_MEAN = "PIXEL_MEAN"
    PIXEL_P95 = "PIXEL_P95"


def aggregate_score(values: np.ndarray, mode: AggMode | str = AggMode.PIXEL_MEAN) -> float:
    """Reduce one uncertainty map to a scalar OOD score."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("aggregate_score: empty map")
    mode = AggMode(mode)
    if mode is AggMode.PIXEL_MEAN:
        return float(arr.mean())
    return float(np.percentile(arr, 95.0, method="linear"))


@dataclass
class Normalized:
    values: np.ndarray
    lo: float
    hi: float
    degenerate: bool


def minmax_normalize(values: np.ndarray, lo: float | None = None, hi: float | None = None) -> Normalized:
    """Rescale to [0, 1] with ``(v - lo) / (hi - lo)``.

    ``lo``/``hi`` default to the extremes of ``values`` (per-map scope); pass
    pool-wide extremes to put several maps on one axis. A constant input
    returns zeros with ``degenerate=True``.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("minmax_normalize: empty input")
    lo = float(arr.min()) if lo is None else float(lo)
    hi = float(arr.max()) if hi is None else float(hi)
    if not hi > lo:
        return Normalized(np.zeros_like(arr), lo, hi, True)
    out = np.clip((arr - lo) / (hi - lo), 0.0, 1.0)
    return Normalized(out, lo, hi, False)


def pool_bounds(maps: Sequence[np.ndarray]) -> tuple[float, float]:
    return float(min(np.min(m) for m in maps)), float(max(np.max(m) for m in maps))
