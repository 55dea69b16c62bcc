"""Benchmark metrics: PR sweeps, F-measure, MAE and dataset complexity."""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .imgproc import quantize, to_cielab
from .inference import DegenerateInputError

__all__ = [
    "EvalRecord",
    "DatasetSummary",
    "precision_recall",
    "f_measure",
    "mae",
    "pr_sweep",
    "dataset_complexity",
    "aggregate",
    "write_outputs",
]

BETA_SQ = 0.3
N_THRESHOLDS = 256


def _same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def precision_recall(pred: np.ndarray, gt: np.ndarray) -> tuple[float, float]:
    """Precision and recall of a binary prediction; ``0/0`` counts as 1."""
    pred = np.asarray(pred, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    _same_shape(pred, gt)
    tp = np.count_nonzero(pred & gt)
    n_pred = np.count_nonzero(pred)
    n_gt = np.count_nonzero(gt)
    precision = tp / n_pred if n_pred else 1.0
    recall = tp / n_gt if n_gt else 1.0
    return float(precision), float(recall)


def f_measure(p, r, beta_sq: float = BETA_SQ):
    """Weighted harmonic mean of precision and recall, 0 when both are 0."""
    p = np.asarray(p, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    num = (1.0 + beta_sq) * p * r
    den = beta_sq * p + r
    out = np.divide(num, den, out=np.zeros(np.broadcast(p, r).shape), where=den > 0)
    return float(out) if out.ndim == 0 else out


def mae(saliency: np.ndarray, gt: np.ndarray) -> float:
    """Mean absolute difference between a saliency map and a mask."""
    saliency = np.asarray(saliency, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    _same_shape(saliency, gt)
    return float(np.mean(np.abs(saliency - gt)))


@dataclass
class EvalRecord:
    image_id: str
    precision: np.ndarray
    recall: np.ndarray
    f_sweep: np.ndarray
    mae: float

    @property
    def best_threshold(self) -> int:
        return int(np.argmax(self.f_sweep))

    @property
    def best_f(self) -> float:
        return float(self.f_sweep[self.best_threshold])


def pr_sweep(saliency: np.ndarray, gt: np.ndarray, image_id: str = "", beta_sq: float = BETA_SQ) -> EvalRecord:
    """Precision/recall/F at every 8-bit threshold.

    Threshold ``theta`` keeps the pixels with ``round(255 * s) >= theta``.
    """
    saliency = np.asarray(saliency, dtype=np.float64)
    gt = np.asarray(gt, dtype=bool)
    _same_shape(saliency, gt)
    levels = quantize(saliency).ravel()
    fg = np.bincount(levels[gt.ravel()], minlength=N_THRESHOLDS)
    bg = np.bincount(levels[~gt.ravel()], minlength=N_THRESHOLDS)
    # predicted set at theta = levels >= theta: reverse cumulative counts
    tp = np.cumsum(fg[::-1])[::-1].astype(np.float64)
    fp = np.cumsum(bg[::-1])[::-1].astype(np.float64)
    n_pred = tp + fp
    n_gt = float(gt.sum())
    precision = np.divide(tp, n_pred, out=np.ones(N_THRESHOLDS), where=n_pred > 0)
    recall = tp / n_gt if n_gt else np.ones(N_THRESHOLDS)
    return EvalRecord(
        image_id=image_id,
        precision=precision,
        recall=recall,
        f_sweep=f_measure(precision, recall, beta_sq),
        mae=mae(saliency, gt),
    )


def _chi_square(h1: np.ndarray, h2: np.ndarray, eps: float) -> float:
    return float(0.5 * np.sum((h1 - h2) ** 2 / (h1 + h2 + eps)))


_LAB_RANGES = ((0.0, 100.0), (-128.0, 128.0), (-128.0, 128.0))


def dataset_complexity(image: np.ndarray, gt: np.ndarray, bins: int = 32, eps: float = 1e-12) -> float:
    """Chi-square distance of foreground vs background CIELab histograms.

    Each channel contributes at most 1 (disjoint supports), so the score
    lies in ``[0, 3]``; larger means easier to separate.
    """
    gt = np.asarray(gt, dtype=bool)
    if gt.shape != image.shape[:2]:
        raise ValueError("mask and image sizes differ")
    if gt.all() or not gt.any():
        raise DegenerateInputError("mask must contain both foreground and background")
    lab = to_cielab(image)
    total = 0.0
    for c, rng in enumerate(_LAB_RANGES):
        ch = np.clip(lab[..., c], rng[0], rng[1])
        h_fg, _ = np.histogram(ch[gt], bins=bins, range=rng)
        h_bg, _ = np.histogram(ch[~gt], bins=bins, range=rng)
        total += _chi_square(h_fg / h_fg.sum(), h_bg / h_bg.sum(), eps)
    return total


@dataclass
class DatasetSummary:
    mean_precision: np.ndarray
    mean_recall: np.ndarray
    mean_f: np.ndarray
    mean_mae: float
    n_images: int
    complexity_histogram: tuple[np.ndarray, np.ndarray] | None = None
    complexity: list[float] = field(default_factory=list)

    @property
    def best_threshold(self) -> int:
        return int(np.argmax(self.mean_f))

    @property
    def best_f(self) -> float:
        """Best-threshold F: maximum of the image-averaged F curve."""
        return float(self.mean_f[self.best_threshold])

    def to_dict(self) -> dict:
        d = {
            "nImages": self.n_images,
            "meanMae": self.mean_mae,
            "bestF": self.best_f,
            "bestThreshold": self.best_threshold,
            "bestPrecision": float(self.mean_precision[self.best_threshold]),
            "bestRecall": float(self.mean_recall[self.best_threshold]),
        }
        if self.complexity_histogram is not None:
            counts, edges = self.complexity_histogram
            d["complexityHistogram"] = {"counts": counts.tolist(), "edges": edges.tolist()}
        return d


def aggregate(records: list[EvalRecord], complexity: list[float] | None = None, bins: int = 10) -> DatasetSummary:
    """Threshold-wise means over images (F is averaged per image)."""
    if not records:
        raise ValueError("cannot aggregate an empty record list")
    hist = None
    if complexity:
        counts, edges = np.histogram(np.asarray(complexity, dtype=np.float64), bins=bins)
        hist = (counts, edges)
    return DatasetSummary(
        mean_precision=np.mean([r.precision for r in records], axis=0),
        mean_recall=np.mean([r.recall for r in records], axis=0),
        mean_f=np.mean([r.f_sweep for r in records], axis=0),
        mean_mae=float(np.mean([r.mae for r in records])),
        n_images=len(records),
        complexity_histogram=hist,
        complexity=list(complexity or []),
    )


def write_outputs(records: list[EvalRecord], summary: DatasetSummary, prefix: str | os.PathLike) -> list[str]:
    """Write ``<prefix>_curve.csv``, ``<prefix>_images.csv`` and ``<prefix>_summary.json``."""
    prefix = os.fspath(prefix)
    curve = prefix + "_curve.csv"
    per_image = prefix + "_images.csv"
    summary_path = prefix + "_summary.json"
    with open(curve, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["threshold", "meanPrecision", "meanRecall", "meanF"])
        for t in range(N_THRESHOLDS):
            w.writerow([t, repr(float(summary.mean_precision[t])),
                        repr(float(summary.mean_recall[t])), repr(float(summary.mean_f[t]))])
    with open(per_image, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["imageId", "mae", "bestF", "bestThreshold"])
        for r in records:
            w.writerow([r.image_id, repr(r.mae), repr(r.best_f), r.best_threshold])
    with open(summary_path, "w") as fh:
        json.dump(summary.to_dict(), fh, indent=2)
    return [curve, per_image, summary_path]
