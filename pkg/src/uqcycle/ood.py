"""ID-vs-OOD evaluation: histograms, ROC curves and AUC per uncertainty kind.

OOD is the positive class and a higher uncertainty score means "more likely
OOD". AUC is reported raw (values below 0.5 stay visible) together with a
``separability = max(auc, 1 - auc)`` column.
"""
from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import svg
from .datasets import ImageBatch
from .layers import StochasticConfig
from .model import TranslationModel, sample_predictions
from .uncertainty import AggMode, aggregate_score, combine, minmax_normalize, pool_bounds

SCORES_HEADER = ("image_id", "dataset", "label", "kind", "score")
ROC_HEADER = ("threshold", "fpr", "tpr")
SUMMARY_HEADER = ("method", "kind", "dataset_pair", "auc", "separability")
HIST_HEADER = ("bin_lo", "bin_hi", "count")
DEFAULT_BINS = 50


class Kind(str, enum.Enum):
    ALEATORIC = "ALEATORIC"
    EPISTEMIC = "EPISTEMIC"
    TOTAL = "TOTAL"


class Label(str, enum.Enum):
    ID = "ID"
    OOD = "OOD"


@dataclass
class ScoredSet:
    scores: np.ndarray
    label: Label
    dataset_name: str
    method: str
    kind: Kind
    ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if self.scores.size == 0:
            raise ValueError(f"ScoredSet {self.dataset_name}/{self.kind}: no scores")
        if not np.isfinite(self.scores).all():
            raise ValueError(f"ScoredSet {self.dataset_name}/{self.kind}: non-finite scores")


@dataclass
class Histogram:
    counts: np.ndarray
    edges: np.ndarray
    overflow: int

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.overflow


def histogram(scores: Sequence[float], bins: int = DEFAULT_BINS, range: tuple[float, float] = (0.0, 1.0)) -> Histogram:  # noqa: A002
    """Equal-width bin counts over ``range`` (right edge inclusive).

    Scores outside ``range`` are not binned; they are counted in ``overflow``.
    """
    if int(bins) != bins or bins < 1:
        raise ValueError(f"histogram: bins must be a positive integer, got {bins}")
    lo, hi = float(range[0]), float(range[1])
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ValueError(f"histogram: invalid range ({lo}, {hi})")
    s = np.asarray(scores, dtype=np.float64).ravel()
    inside = (s >= lo) & (s <= hi)
    counts, edges = np.histogram(s[inside], bins=int(bins), range=(lo, hi))
    return Histogram(counts.astype(np.int64), edges, int((~inside).sum()))


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    @property
    def separability(self) -> float:
        return max(self.auc, 1.0 - self.auc)


def roc_auc(id_scores: Sequence[float], ood_scores: Sequence[float]) -> RocCurve:
    """ROC over every distinct threshold, OOD positive, score >= t predicts OOD.

    The trapezoid area is accumulated in integer counts, so a tie block
    contributes exactly half, and the result equals the Mann-Whitney U
    statistic divided by ``n_id * n_ood``.
    """
    neg = np.sort(np.asarray(id_scores, dtype=np.float64).ravel())
    pos = np.sort(np.asarray(ood_scores, dtype=np.float64).ravel())
    if neg.size == 0 or pos.size == 0:
        raise ValueError("roc_auc: both ID and OOD score sets must be non-empty")
    if not (np.isfinite(neg).all() and np.isfinite(pos).all()):
        raise ValueError("roc_auc: scores must be finite")
    thr = np.unique(np.concatenate([neg, pos]))[::-1]
    tp = np.concatenate([[0], pos.size - np.searchsorted(pos, thr, side="left")]).astype(np.int64)
    fp = np.concatenate([[0], neg.size - np.searchsorted(neg, thr, side="left")]).astype(np.int64)
    area2 = int(np.sum((fp[1:] - fp[:-1]) * (tp[1:] + tp[:-1])))
    auc = area2 / (2 * neg.size * pos.size)
    return RocCurve(fp / neg.size, tp / pos.size, np.concatenate([[np.inf], thr]), auc)


# ---------------------------------------------------------------------------
# full report


@dataclass
class OodReport:
    method: str
    id_name: str
    ood_names: list[str]
    sets: dict[tuple[str, Kind], ScoredSet]
    curves: dict[tuple[Kind, str], RocCurve]
    histograms: dict[tuple[str, Kind], Histogram]
    bounds: dict[Kind, tuple[float, float]]
    degenerate: list[str]

    def auc(self, kind: Kind | str, ood_name: str) -> float:
        return self.curves[(Kind(kind), ood_name)].auc

    def mean_score(self, dataset: str, kind: Kind | str) -> float:
        return float(self.sets[(dataset, Kind(kind))].scores.mean())

    def pair_name(self, ood_name: str) -> str:
        return f"{self.id_name}-{ood_name}"

    def summary_rows(self) -> list[tuple[str, str, str, float, float]]:
        rows = []
        for ood_name in self.ood_names:
            for kind in Kind:
                c = self.curves[(kind, ood_name)]
                rows.append((self.method, kind.value, self.pair_name(ood_name), c.auc, c.separability))
        return rows


def score_maps(
    model: TranslationModel | Sequence[TranslationModel],
    config: StochasticConfig,
    batch: ImageBatch,
    seed: int,
) -> dict[Kind, np.ndarray]:
    """Per-pixel aleatoric/epistemic/total maps, shape (N, H, W) each."""
    maps = combine(sample_predictions(model, batch.data, config, seed=seed))
    return {k: getattr(maps, k.value.lower())[:, 0] for k in Kind}


def _fmt(v: float) -> str:
    return repr(float(v))


def ood_report(
    model: TranslationModel | Sequence[TranslationModel],
    config: StochasticConfig,
    id_dataset: tuple[str, ImageBatch],
    ood_datasets: Mapping[str, ImageBatch],
    agg_mode: AggMode | str = AggMode.PIXEL_MEAN,
    bins: int = DEFAULT_BINS,
    normalization: str = "pool",
    seed: int = 0,
    out_dir: str | Path | None = None,
    plots: bool = False,
) -> OodReport:
    """Score ID and OOD images per uncertainty kind and compare them.

    ``normalization="pool"`` min-max scales every map of one kind with the
    extremes over ID and all OOD sets together; ``"per_map"`` scales each
    image on its own. Scores are the aggregated normalized maps.
    """
    if not ood_datasets:
        raise ValueError("ood_report needs at least one OOD dataset")
    if normalization not in ("pool", "per_map"):
        raise ValueError(f"unknown normalization scope {normalization!r}")
    id_name, id_batch = id_dataset
    if id_name in ood_datasets:
        raise ValueError(f"OOD dataset name {id_name!r} clashes with the ID dataset")
    datasets = {id_name: id_batch, **ood_datasets}
    labels = {name: (Label.ID if name == id_name else Label.OOD) for name in datasets}

    # one sampling seed for every dataset (common random numbers): identical
    # inputs get identical scores, so dataset differences are not masked by MC noise
    raw = {name: score_maps(model, config, batch, seed) for name, batch in datasets.items()}
    method = config.method.value
    sets: dict[tuple[str, Kind], ScoredSet] = {}
    bounds: dict[Kind, tuple[float, float]] = {}
    degenerate: list[str] = []
    for kind in Kind:
        lo, hi = pool_bounds([raw[n][kind] for n in datasets])
        bounds[kind] = (lo, hi)
        for name, batch in datasets.items():
            scores = []
            for img_id, m in zip(batch.ids, raw[name][kind]):
                if normalization == "pool":
                    nm = minmax_normalize(m, lo, hi)
                else:
                    nm = minmax_normalize(m)
                if nm.degenerate:
                    degenerate.append(f"{name}/{img_id}/{kind.value}" if normalization == "per_map" else f"pool/{kind.value}")
                scores.append(aggregate_score(nm.values, agg_mode))
            sets[(name, kind)] = ScoredSet(np.array(scores), labels[name], name, method, kind, list(batch.ids))
    degenerate = sorted(set(degenerate))

    curves = {}
    for kind in Kind:
        for name in ood_datasets:
            curves[(kind, name)] = roc_auc(sets[(id_name, kind)].scores, sets[(name, kind)].scores)
    hists = {key: histogram(s.scores, bins, (0.0, 1.0)) for key, s in sets.items()}

    report = OodReport(method, id_name, list(ood_datasets), sets, curves, hists, bounds, degenerate)
    if out_dir is not None:
        write_report(report, Path(out_dir), plots=plots, agg_mode=AggMode(agg_mode), normalization=normalization)
    return report


def write_report(report: OodReport, out: Path, plots: bool = False, agg_mode=AggMode.PIXEL_MEAN, normalization="pool") -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "scores.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCORES_HEADER)
        for (name, kind), s in report.sets.items():
            for img_id, v in zip(s.ids, s.scores):
                w.writerow((img_id, name, s.label.value, kind.value, _fmt(v)))
    for (kind, name), c in report.curves.items():
        with open(out / f"roc_{kind.value.lower()}_{report.pair_name(name)}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(ROC_HEADER)
            for t, f, tp in zip(c.thresholds, c.fpr, c.tpr):
                w.writerow(("inf" if np.isinf(t) else _fmt(t), _fmt(f), _fmt(tp)))
    for (name, kind), h in report.histograms.items():
        with open(out / f"hist_{name}_{kind.value.lower()}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(HIST_HEADER)
            for lo, hi, n in zip(h.edges[:-1], h.edges[1:], h.counts):
                w.writerow((_fmt(lo), _fmt(hi), int(n)))
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for method, kind, pair, auc, sep in report.summary_rows():
            w.writerow((method, kind, pair, _fmt(auc), _fmt(sep)))
    meta = {
        "method": report.method,
        "id_dataset": report.id_name,
        "ood_datasets": report.ood_names,
        "agg_mode": agg_mode.value,
        "normalization": normalization,
        "pool_bounds": {k.value: list(v) for k, v in report.bounds.items()},
        "overflow": {f"{n}/{k.value}": h.overflow for (n, k), h in report.histograms.items()},
        "degenerate_normalization": report.degenerate,
        "auc": {f"{k.value}/{report.pair_name(n)}": c.auc for (k, n), c in report.curves.items()},
    }
    (out / "report.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    if plots:
        _write_plots(report, out)


def _write_plots(report: OodReport, out: Path) -> None:
    for (kind, name), c in report.curves.items():
        doc = svg.line_plot(
            [svg.Series(c.fpr, c.tpr, f"AUC {c.auc:.3f}"), svg.Series([0, 1], [0, 1], "chance", dashed=True)],
            title=f"{report.method} {kind.value.lower()} {report.pair_name(name)}",
            xlabel="false positive rate",
            ylabel="true positive rate",
        )
        (out / f"roc_{kind.value.lower()}_{report.pair_name(name)}.svg").write_text(doc)
    for kind in Kind:
        for name in report.ood_names:
            series = []
            for ds in (report.id_name, name):
                h = report.histograms[(ds, kind)]
                series.append(svg.Series(*svg.step_xy(h.edges, h.counts), ds))
            doc = svg.line_plot(
                series,
                title=f"{report.method} {kind.value.lower()} uncertainty",
                xlabel="normalized score",
                ylabel="count",
            )
            (out / f"hist_{kind.value.lower()}_{report.pair_name(name)}.svg").write_text(doc)
