"""Encompassment scale, scale-driven region merging and layer extraction.

The scale of a region is the side of the largest axis-aligned square that
fits entirely inside it (squares may not cross the image border).  Region
merging repeatedly folds every region whose scale is below a threshold
into its most similar neighbor, and stacking merges at increasing
thresholds yields a nested hierarchy of image layers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import max_square_sizes
from .segmentation import Region

__all__ = [
    "ScaleThresholds",
    "LayerHierarchy",
    "DEFAULT_THRESHOLDS",
    "uniform_windows",
    "scale_below",
    "region_scale",
    "region_scales",
    "pixel_count_scale",
    "merge_regions",
    "extract_layers",
]

ENCOMPASS = "encompass"
PIXELS = "pixels"

DEFAULT_THRESHOLDS = {
    2: [5, 33],
    3: [5, 17, 33],
    4: [5, 13, 21, 33],
    5: [5, 11, 17, 25, 33],
}


@dataclass
class ScaleThresholds:
    """Per-layer square side lengths, nominal for a 400x300 image."""

    per_layer: list[int] = field(default_factory=lambda: [5, 17, 33])
    reference_area: tuple[int, int] = (400, 300)

    def __post_init__(self):
        self.per_layer = [int(t) for t in self.per_layer]
        if not 2 <= len(self.per_layer) <= 5:
            raise ValueError("between 2 and 5 layers are supported")
        if any(t < 1 for t in self.per_layer):
            raise ValueError("thresholds must be positive")
        if any(b <= a for a, b in zip(self.per_layer, self.per_layer[1:])):
            raise ValueError("thresholds must be strictly increasing")

    @classmethod
    def for_layers(cls, n_layers: int) -> "ScaleThresholds":
        return cls(list(DEFAULT_THRESHOLDS[n_layers]))

    def rescaled(self, width: int, height: int) -> list[int]:
        """Thresholds adapted to an image of the given size.

        Side lengths scale with the square root of the area ratio and are
        rounded to the nearest odd integer, never below 3.  At the
        reference size they are returned unchanged.
        """
        rw, rh = self.reference_area
        factor = math.sqrt(width * height / float(rw * rh))
        if abs(factor - 1.0) < 1e-12:
            return list(self.per_layer)
        out = []
        for t in self.per_layer:
            odd = 2 * int(math.floor(t * factor / 2.0)) + 1
            out.append(max(3, odd))
        return out


@dataclass
class LayerHierarchy:
    """Label maps and regions from the finest layer (index 0) upward.

    ``parent_of[k][i]`` is the id of the region in layer ``k + 1`` that
    contains region ``i`` of layer ``k``.
    """

    labels: list[np.ndarray]
    regions: list[list[Region]]
    parent_of: list[np.ndarray]
    thresholds: list[int]

    @property
    def n_layers(self) -> int:
        return len(self.labels)

    def layer(self, k: int) -> tuple[np.ndarray, list[Region]]:
        return self.labels[k], self.regions[k]


def _window_sums(integral: np.ndarray, t: int) -> np.ndarray:
    return integral[t:, t:] - integral[:-t, t:] - integral[t:, :-t] + integral[:-t, :-t]


def _integral(a: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0] + 1, a.shape[1] + 1), dtype=np.int64)
    np.cumsum(np.cumsum(a, axis=0, dtype=np.int64), axis=1, out=out[1:, 1:])
    return out


def uniform_windows(labels: np.ndarray, t: int) -> np.ndarray:
    """Boolean map over top-left anchors of ``t x t`` windows with one label.

    A window holds a single label exactly when its label variance is zero,
    ``t^2 * sum(l^2) == sum(l)^2``, evaluated in integer arithmetic from
    box-filtered label and squared-label maps.
    """
    labels = np.asarray(labels, dtype=np.int64)
    h, w = labels.shape
    if t > h or t > w:
        return np.zeros((0, 0), dtype=bool)
    s1 = _window_sums(_integral(labels), t)
    s2 = _window_sums(_integral(labels * labels), t)
    return t * t * s2 == s1 * s1


def scale_below(labels: np.ndarray, t: int, regions: list[Region] | None = None) -> set[int]:
    """Ids of regions whose encompassment scale is smaller than ``t``."""
    if t < 1:
        raise ValueError("t must be >= 1")
    labels = np.asarray(labels)
    n = len(regions) if regions is not None else int(labels.max()) + 1
    return _below(labels, t, n)


def _below(labels: np.ndarray, t: int, n: int) -> set[int]:
    if t == 1:
        return set()
    ok = uniform_windows(labels, t)
    h_valid, w_valid = ok.shape
    owners = np.unique(labels[:h_valid, :w_valid][ok])
    has_square = np.zeros(n, dtype=bool)
    has_square[owners] = True
    return set(np.flatnonzero(~has_square).tolist())


def _fits(mask: np.ndarray, t: int) -> bool:
    h, w = mask.shape
    if t > h or t > w:
        return False
    return bool(np.any(_window_sums(_integral(mask.astype(np.int64)), t) == t * t))


def region_scale(labels: np.ndarray, region: Region | int) -> int:
    """Exact encompassment scale of one region by binary search on ``t``."""
    rid = region.id if isinstance(region, Region) else int(region)
    ys, xs = np.nonzero(labels == rid)
    if ys.size == 0:
        raise ValueError(f"region {rid} is empty")
    mask = labels[ys.min() : ys.max() + 1, xs.min() : xs.max() + 1] == rid
    lo, hi = 1, min(mask.shape)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _fits(mask, mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def region_scales(labels: np.ndarray) -> np.ndarray:
    """Encompassment scale of every region at once."""
    labels = np.ascontiguousarray(labels, dtype=np.int32)
    return max_square_sizes(labels, int(labels.max()) + 1)


def pixel_count_scale(labels: np.ndarray, region: Region | int) -> int:
    """Traditional region size: the number of pixels."""
    if isinstance(region, Region):
        return region.pixel_count
    return int(np.count_nonzero(labels == int(region)))


def _find(parent: np.ndarray, i: int) -> int:
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        parent[i], i = root, parent[i]
    return root


def merge_regions(
    labels: np.ndarray,
    regions: list[Region],
    t: int,
    measure: str = ENCOMPASS,
    weighted_color: bool = False,
) -> tuple[np.ndarray, list[Region]]:
    """Merge every region smaller than ``t`` into its closest-color neighbor.

    Each pass screens the current map for scale-deficient regions, visits
    them in ascending order of scale (ties by id) and merges each one into
    the adjacent region with the nearest mean color (ties toward the lower
    id).  A region that has absorbed others earlier in the pass is skipped
    once its scale has reached ``t``.  The survivor's color becomes the average of the two colors,
    area-weighted only if ``weighted_color`` is set.  Passes repeat until no
    mergeable region remains.

    With ``measure="pixels"`` region size is the pixel count and the
    threshold is ``t**2``.
    """
    if measure not in (ENCOMPASS, PIXELS):
        raise ValueError(f"unknown scale measure {measure!r}")
    labels = np.asarray(labels, dtype=np.int32)
    h, w = labels.shape

    n = len(regions)
    colors = np.array([r.mean_color for r in regions], dtype=np.float64).reshape(n, 3)
    counts = np.array([r.pixel_count for r in regions], dtype=np.int64)
    sum_x = np.array([r.centroid[0] for r in regions]) * counts
    sum_y = np.array([r.centroid[1] for r in regions]) * counts
    neighbors = [set(r.neighbors) for r in regions]

    def still_small(i: int, pixels: list[np.ndarray]) -> bool:
        if measure == PIXELS:
            return counts[i] < t * t
        idx = np.concatenate(pixels)
        ys, xs = np.divmod(idx, w)
        y0, x0 = ys.min(), xs.min()
        mask = np.zeros((ys.max() - y0 + 1, xs.max() - x0 + 1), dtype=bool)
        mask[ys - y0, xs - x0] = True
        return not _fits(mask, t)

    merged_any = False
    while True:
        if measure == ENCOMPASS:
            deficient = _below(labels, t, len(counts))
            sizes = region_scales(labels)
        else:
            sizes = counts
            deficient = set(np.flatnonzero(counts < t * t).tolist())
        todo = sorted((i for i in deficient if neighbors[i]), key=lambda i: (sizes[i], i))
        if not todo:
            break
        merged_any = True

        parent = np.arange(len(counts))
        # pixel lists are only needed to re-check regions that grew this pass
        order = np.argsort(labels, axis=None, kind="stable")
        bounds = np.searchsorted(labels.ravel()[order], np.arange(len(counts) + 1))
        pixels = [[order[bounds[i] : bounds[i + 1]]] for i in range(len(counts))]
        grown = np.zeros(len(counts), dtype=bool)
        for i in todo:
            if not neighbors[i]:
                continue
            if grown[i] and not still_small(i, pixels[i]):
                continue
            nbrs = sorted(neighbors[i])
            dist = np.linalg.norm(colors[nbrs] - colors[i], axis=1)
            j = nbrs[int(np.argmin(dist))]

            if weighted_color:
                colors[j] = (colors[i] * counts[i] + colors[j] * counts[j]) / (counts[i] + counts[j])
            else:
                colors[j] = 0.5 * (colors[i] + colors[j])
            counts[j] += counts[i]
            sum_x[j] += sum_x[i]
            sum_y[j] += sum_y[i]
            for k in neighbors[i]:
                neighbors[k].discard(i)
                if k != j:
                    neighbors[k].add(j)
                    neighbors[j].add(k)
            neighbors[i] = set()
            counts[i] = 0
            parent[i] = j
            pixels[j].extend(pixels[i])
            pixels[i] = []
            grown[j] = True

        roots = np.array([_find(parent, i) for i in range(len(counts))])
        alive = np.flatnonzero(counts > 0)
        new_id = np.full(len(counts), -1, dtype=np.int64)
        new_id[alive] = np.arange(alive.size)
        labels = new_id[roots][labels].astype(np.int32)
        colors = colors[alive]
        counts = counts[alive]
        sum_x = sum_x[alive]
        sum_y = sum_y[alive]
        neighbors = [{int(new_id[k]) for k in neighbors[i]} for i in alive]

    if not merged_any:
        return labels.copy(), [
            Region(r.id, r.pixel_count, r.mean_color.copy(), r.centroid, r.scale, set(r.neighbors))
            for r in regions
        ]

    scales = region_scales(labels)
    out = [
        Region(
            id=i,
            pixel_count=int(counts[i]),
            mean_color=colors[i].copy(),
            centroid=(float(sum_x[i] / counts[i]), float(sum_y[i] / counts[i])),
            scale=int(scales[i]),
            neighbors=neighbors[i],
        )
        for i in range(len(counts))
    ]
    return labels, out


def extract_layers(
    labels: np.ndarray,
    regions: list[Region],
    thresholds: ScaleThresholds | None = None,
    measure: str = ENCOMPASS,
    weighted_color: bool = False,
) -> LayerHierarchy:
    """Build the nested layer hierarchy from an initial over-segmentation."""
    thresholds = thresholds or ScaleThresholds()
    h, w = np.asarray(labels).shape
    ts = thresholds.rescaled(w, h)

    all_labels, all_regions = [], []
    cur_labels, cur_regions = labels, regions
    for t in ts:
        cur_labels, cur_regions = merge_regions(
            cur_labels, cur_regions, t, measure=measure, weighted_color=weighted_color
        )
        all_labels.append(cur_labels)
        all_regions.append(cur_regions)

    parent_of = []
    for k in range(len(ts) - 1):
        n_k = len(all_regions[k])
        parent = np.zeros(n_k, dtype=np.int64)
        # any pixel of a child identifies its parent; nesting is checked in tests
        parent[all_labels[k].ravel()] = all_labels[k + 1].ravel()
        parent_of.append(parent)
    return LayerHierarchy(all_labels, all_regions, parent_of, ts)
