import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import ndimage

from conftest import brute_below, brute_scale, random_label_map
from hsaliency.imgproc import to_cieluv
from hsaliency.scale_merge import (
    ScaleThresholds,
    extract_layers,
    merge_regions,
    pixel_count_scale,
    region_scale,
    region_scales,
    scale_below,
)
from hsaliency.segmentation import Region, build_regions, watershed_oversegment


def _regions_from(labels, values):
    """Regions whose single-channel color is ``values[label]``."""
    luv = np.zeros(labels.shape + (3,))
    luv[..., 0] = np.asarray(values, dtype=float)[labels]
    return build_regions(labels, luv)


def test_solid_square_is_not_below_its_side():
    labels = np.zeros((14, 14), dtype=np.int32)
    labels[2:12, 2:12] = 1
    assert 1 not in scale_below(labels, 5)
    assert region_scale(labels, 1) == 10


def test_thin_path_is_below_two():
    labels = np.zeros((10, 10), dtype=np.int32)
    path = [(0, x) for x in range(10)] + [(y, 9) for y in range(1, 10)] + [(9, 8)]
    for y, x in path:
        labels[y, x] = 1
    assert np.count_nonzero(labels == 1) == 20
    assert 1 in scale_below(labels, 2)
    assert region_scale(labels, 1) == 1


def test_region_touching_others_everywhere_is_below_three():
    # every 3x3 neighborhood of region 1 contains another label
    labels = np.array(
        [
            [0, 0, 0, 0, 0, 0],
            [0, 1, 1, 1, 1, 0],
            [0, 1, 2, 2, 1, 0],
            [0, 1, 1, 1, 1, 0],
            [0, 0, 0, 0, 0, 0],
        ]
    )
    assert 1 in scale_below(labels, 3)
    assert region_scale(labels, 1) == brute_scale(labels, 1) == 1


def test_rectangle_and_pixel_scales():
    labels = np.zeros((9, 11), dtype=np.int32)
    labels[2:5, 1:8] = 1  # 3 x 7
    labels[7, 9] = 2
    assert region_scale(labels, 1) == 3
    assert region_scale(labels, 2) == 1
    assert pixel_count_scale(labels, 1) == 21
    assert pixel_count_scale(labels, 2) == 1


def test_curve_pixel_count_vs_encompassment():
    labels = np.zeros((60, 60), dtype=np.int32)
    ys = np.arange(200) % 50 + 5
    xs = (np.arange(200) // 50) * 12 + 5
    labels[ys, xs] = 1
    labels[5, 5:42] = 1  # join the strokes into one curve-like region
    n = np.count_nonzero(labels == 1)
    assert pixel_count_scale(labels, 1) == n >= 200
    assert region_scale(labels, 1) == 1


def test_region_scale_matches_window_oracle_on_random_blob():
    rng = np.random.default_rng(7)
    field = ndimage.gaussian_filter(rng.normal(size=(32, 32)), 3)
    blob, _ = ndimage.label(field > 0)
    labels = (blob > 0).astype(np.int32) + (blob == 1)  # 0 background, 2 blob one, 1 rest
    for rid in np.unique(labels):
        assert region_scale(labels, int(rid)) == brute_scale(labels, rid)


def test_scale_below_matches_exhaustive_oracle():
    rng = np.random.default_rng(11)
    for _ in range(30):
        labels = random_label_map(rng, max_side=32)
        for t in (2, 3, 5):
            assert scale_below(labels, t) == brute_below(labels, t)


def test_region_scales_all_at_once():
    rng = np.random.default_rng(12)
    labels = random_label_map(rng, max_side=24)
    scales = region_scales(labels)
    for rid in range(int(labels.max()) + 1):
        assert scales[rid] == brute_scale(labels, rid)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 7))
def test_erosion_equivalence(seed, t):
    labels = random_label_map(np.random.default_rng(seed), max_side=20)
    below = scale_below(labels, t)
    for rid in range(int(labels.max()) + 1):
        eroded = ndimage.binary_erosion(labels == rid, structure=np.ones((t, t)), border_value=0)
        assert (rid not in below) == bool(eroded.any())


def test_merge_two_regions_averages_colors():
    labels = np.zeros((20, 22), dtype=np.int32)
    labels[:, 2:] = 1
    regions = _regions_from(labels, [10.0, 40.0])
    assert [r.scale for r in regions] == [2, 20]
    out_labels, out = merge_regions(labels, regions, 5)
    assert len(out) == 1
    assert (out_labels == 0).all()
    assert out[0].mean_color[0] == pytest.approx(25.0)
    assert out[0].pixel_count == 440


def test_merge_noop_when_nothing_is_small():
    labels = np.zeros((10, 20), dtype=np.int32)
    labels[:, 10:] = 1
    regions = _regions_from(labels, [0.0, 50.0])
    out_labels, out = merge_regions(labels, regions, 5)
    assert np.array_equal(out_labels, labels)
    assert [(r.pixel_count, r.mean_color.tolist(), r.neighbors) for r in out] == [
        (r.pixel_count, r.mean_color.tolist(), r.neighbors) for r in regions
    ]


def test_merge_single_region_unchanged():
    labels = np.zeros((3, 3), dtype=np.int32)
    regions = _regions_from(labels, [5.0])
    out_labels, out = merge_regions(labels, regions, 5)
    assert len(out) == 1 and (out_labels == 0).all()


def test_merge_three_stripes_hand_trace():
    # columns: B (2 wide, color 10) | A (1 wide, color 0) | C (3 wide, color 100)
    labels = np.zeros((10, 6), dtype=np.int32)
    labels[:, 2] = 1
    labels[:, 3:] = 2
    regions = _regions_from(labels, [10.0, 0.0, 100.0])
    assert [r.scale for r in regions] == [2, 1, 3]

    # t = 3: A (scale 1) joins B (distance 10 < 100) and B becomes 3 wide,
    # so B is no longer small when its turn comes; C already has scale 3.
    lab3, out3 = merge_regions(labels, regions, 3)
    assert len(out3) == 2
    assert (lab3[:, :3] == 0).all() and (lab3[:, 3:] == 1).all()
    assert out3[0].mean_color[0] == pytest.approx(5.0)
    assert out3[1].mean_color[0] == pytest.approx(100.0)

    # t = 5: A -> B (color 5), then B (3 wide) -> C (color (5 + 100) / 2);
    # C then spans the image and is skipped.
    lab5, out5 = merge_regions(labels, regions, 5)
    assert len(out5) == 1
    assert out5[0].mean_color[0] == pytest.approx(52.5)


def test_merge_weighted_color_option():
    labels = np.zeros((20, 22), dtype=np.int32)
    labels[:, 2:] = 1
    regions = _regions_from(labels, [10.0, 40.0])
    _, out = merge_regions(labels, regions, 5, weighted_color=True)
    assert out[0].mean_color[0] == pytest.approx((10 * 40 + 40 * 400) / 440)


def test_merge_pixel_measure_uses_squared_threshold():
    # a 1 x 30 strip has 30 pixels >= 5**2 but scale 1
    labels = np.zeros((11, 30), dtype=np.int32)
    labels[5, :] = 1
    labels[6:, :] = 2
    regions = _regions_from(labels, [0.0, 90.0, 10.0])
    _, enc = merge_regions(labels, regions, 5)
    _, pix = merge_regions(labels, regions, 5, measure="pixels")
    assert len(enc) == 2
    assert len(pix) == 3


def test_merge_terminates_and_reaches_fixpoint_on_random_maps():
    rng = np.random.default_rng(21)
    for _ in range(10):
        labels = random_label_map(rng, max_side=40)
        values = rng.uniform(0, 100, int(labels.max()) + 1)
        regions = _regions_from(labels, values)
        out_labels, out = merge_regions(labels, regions, 3)
        assert sum(r.pixel_count for r in out) == labels.size
        if len(out) > 1:
            assert scale_below(out_labels, 3) == set()
        # merging only unions regions
        for rid in range(len(regions)):
            assert len(np.unique(out_labels[labels == rid])) == 1


def test_thresholds_rescale():
    th = ScaleThresholds()
    assert th.rescaled(400, 300) == [5, 17, 33]
    assert th.rescaled(200, 150) == [3, 9, 17]
    assert all(t % 2 == 1 and t >= 3 for t in th.rescaled(37, 29))
    with pytest.raises(ValueError):
        ScaleThresholds([5, 5, 9])
    with pytest.raises(ValueError):
        ScaleThresholds([5])


def _check_hierarchy(h, n_pixels):
    for k in range(h.n_layers):
        assert sum(r.pixel_count for r in h.regions[k]) == n_pixels
        assert len(h.regions[k]) == int(h.labels[k].max()) + 1
    for k in range(h.n_layers - 1):
        assert len(h.regions[k + 1]) <= len(h.regions[k])
        parent = h.parent_of[k]
        # exact raster containment: each child's pixels all carry its parent's label
        assert np.array_equal(parent[h.labels[k]], h.labels[k + 1])


def test_constant_image_layers():
    luv = to_cieluv(np.full((30, 40, 3), 128, dtype=np.uint8))
    labels, regions = watershed_oversegment(luv)
    h = extract_layers(labels, regions)
    assert [len(r) for r in h.regions] == [1, 1, 1]
    assert [p.tolist() for p in h.parent_of] == [[0], [0]]


def test_checkerboard_layers_nest():
    ys, xs = np.indices((64, 64))
    img = np.where(((ys // 8 + xs // 8) % 2)[..., None] == 1, 230, 30).astype(np.uint8)
    img = np.repeat(img, 3, axis=2)
    labels, regions = watershed_oversegment(to_cieluv(img))
    assert len(regions) == 64
    th = ScaleThresholds([5, 17, 33], reference_area=(64, 64))
    h = extract_layers(labels, regions, th)
    assert h.thresholds == [5, 17, 33]
    assert len(h.regions[0]) == 64  # tiles have scale 8 >= 5
    assert len(h.regions[1]) < 64
    _check_hierarchy(h, 64 * 64)


def test_random_image_hierarchy_invariants():
    rng = np.random.default_rng(9)
    img = rng.integers(0, 256, size=(48, 64, 3), dtype=np.uint8)
    labels, regions = watershed_oversegment(to_cieluv(img))
    for measure in ("encompass", "pixels"):
        h = extract_layers(labels, regions, measure=measure)
        _check_hierarchy(h, img.shape[0] * img.shape[1])
