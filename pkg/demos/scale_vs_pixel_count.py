"""
Encompassment scale versus pixel count
======================================

Two regions with nearly the same number of pixels: a compact square and a
thin snake.  Counting pixels calls them equally large.  The side of the
largest square that fits inside each one tells them apart.
"""

import numpy as np

from hsaliency.scale_merge import pixel_count_scale, region_scales, scale_below
from hsaliency.segmentation import build_regions

# a 12x12 square (144 px) and a 2 px wide snake of about the same area
labels = np.zeros((40, 60), dtype=np.int32)
labels[4:16, 4:16] = 1
snake = np.zeros_like(labels, dtype=bool)
snake[24:26, 2:58] = True
snake[26:36, 56:58] = True
snake[34:36, 40:58] = True
labels[snake] = 2

regions = build_regions(labels, np.zeros(labels.shape + (3,)))
for r in regions[1:]:
    print(f"region {r.id}: {r.pixel_count} px, "
          f"pixel-count size {pixel_count_scale(labels, r)}, encompassment scale {r.scale}")

###############################################################################
# ``scale_below`` answers the same question for one threshold at a time with
# a box filter over the label map.  Both paths agree.

print("all scales:", region_scales(labels).tolist())
for t in (2, 3, 13):
    print(f"below {t:2d}:", sorted(scale_below(labels, t)))
