"""Per-layer saliency cues: local contrast, center bias and their product."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .segmentation import Region

__all__ = [
    "CueParams",
    "LayerCues",
    "normalize",
    "raw_local_contrast",
    "local_contrast",
    "raw_location",
    "location_heuristic",
    "combine_cues",
    "layer_cues",
]


@dataclass
class CueParams:
    sigma_sq_factor: float = 0.04
    lambda_loc: float = 9.0
    normalization_epsilon: float = 1e-12

    def __post_init__(self):
        if min(self.sigma_sq_factor, self.lambda_loc, self.normalization_epsilon) <= 0:
            raise ValueError("cue parameters must be positive")


@dataclass
class LayerCues:
    contrast: np.ndarray
    location: np.ndarray
    combined: np.ndarray

    def __len__(self):
        return len(self.combined)


def normalize(values: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    """Min-max map into ``[0, 1)``: ``(v - min) / (max - min + eps)``."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return values.copy()
    lo = values.min()
    return (values - lo) / (values.max() - lo + eps)


def raw_local_contrast(regions: list[Region], sigma_sq: float) -> np.ndarray:
    """Size- and proximity-weighted color difference to every other region."""
    counts = np.array([r.pixel_count for r in regions], dtype=np.float64)
    colors = np.array([r.mean_color for r in regions], dtype=np.float64).reshape(-1, 3)
    centers = np.array([r.centroid for r in regions], dtype=np.float64).reshape(-1, 2)

    phi = np.exp(-cdist(centers, centers, "sqeuclidean") / sigma_sq)
    return (phi * cdist(colors, colors)) @ counts


def local_contrast(regions: list[Region], t: float, params: CueParams | None = None) -> np.ndarray:
    """Normalized local contrast for one layer with threshold ``t``.

    The spatial bandwidth is ``sigma_sq_factor * t`` in normalized
    coordinates, so coarse layers compare regions almost globally.
    """
    params = params or CueParams()
    raw = raw_local_contrast(regions, params.sigma_sq_factor * t)
    return normalize(raw, params.normalization_epsilon)


def raw_location(labels: np.ndarray, lambda_loc: float = 9.0) -> np.ndarray:
    """Mean over each region's pixels of ``exp(-lambda * |x - center|^2)``.

    Pixel ``(row y, column x)`` sits at ``(x / W, y / H)``; the center is
    ``(0.5, 0.5)``.
    """
    labels = np.asarray(labels)
    h, w = labels.shape
    gx = np.exp(-lambda_loc * (np.arange(w) / w - 0.5) ** 2)
    gy = np.exp(-lambda_loc * (np.arange(h) / h - 0.5) ** 2)
    weight = gy[:, None] * gx[None, :]
    n = int(labels.max()) + 1
    flat = labels.ravel()
    return np.bincount(flat, weights=weight.ravel(), minlength=n) / np.bincount(flat, minlength=n)


def location_heuristic(labels: np.ndarray, params: CueParams | None = None) -> np.ndarray:
    params = params or CueParams()
    return normalize(raw_location(labels, params.lambda_loc), params.normalization_epsilon)


def combine_cues(contrast: np.ndarray, location: np.ndarray) -> np.ndarray:
    contrast = np.asarray(contrast, dtype=np.float64)
    location = np.asarray(location, dtype=np.float64)
    if contrast.shape != location.shape:
        raise ValueError(f"cue length mismatch: {contrast.shape} vs {location.shape}")
    return contrast * location


def layer_cues(
    labels: np.ndarray, regions: list[Region], t: float, params: CueParams | None = None
) -> LayerCues:
    """All three cues for one layer."""
    params = params or CueParams()
    c = local_contrast(regions, t, params)
    h = location_heuristic(labels, params)
    return LayerCues(c, h, combine_cues(c, h))
