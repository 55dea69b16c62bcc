import numpy as np
import pytest
from PIL import Image
from skimage.color import rgb2lab, rgb2luv

from hsaliency.imgproc import (
    ImageFormatError,
    load_image,
    load_mask,
    quantize,
    to_cielab,
    to_cieluv,
    write_label_map,
    write_saliency_map,
)


def test_load_png_single_red_pixel(tmp_path):
    path = tmp_path / "red.png"
    Image.fromarray(np.array([[[255, 0, 0]]], dtype=np.uint8)).save(path)
    img = load_image(path)
    assert img.shape == (1, 1, 3)
    assert img.dtype == np.uint8
    assert img.ravel().tolist() == [255, 0, 0]


def test_load_black_ppm(tmp_path):
    path = tmp_path / "black.ppm"
    path.write_bytes(b"P6\n2 2\n255\n" + bytes(12))
    img = load_image(path)
    assert img.shape == (2, 2, 3)
    assert img.size == 12 and not img.any()


def test_grayscale_is_replicated_and_alpha_dropped(tmp_path):
    gray = np.arange(12, dtype=np.uint8).reshape(3, 4) * 20
    Image.fromarray(gray).save(tmp_path / "g.png")
    img = load_image(tmp_path / "g.png")
    assert np.array_equal(img[..., 0], gray)
    assert np.array_equal(img[..., 0], img[..., 2])

    rgba = np.zeros((2, 2, 4), dtype=np.uint8)
    rgba[..., 1] = 200
    rgba[..., 3] = 7
    Image.fromarray(rgba).save(tmp_path / "a.png")
    img = load_image(tmp_path / "a.png")
    assert img.shape == (2, 2, 3)
    assert (img[..., 1] == 200).all()


def test_corrupt_header_is_format_error(tmp_path):
    path = tmp_path / "bad.png"
    path.write_bytes(b"\x89PNG\r\n\x1a\nthis is not a png")
    with pytest.raises(ImageFormatError):
        load_image(path)
    path = tmp_path / "bad.ppm"
    path.write_bytes(b"P6\nxx yy\n255\n")
    with pytest.raises(ImageFormatError):
        load_image(path)


def test_unsupported_format(tmp_path):
    path = tmp_path / "img.bmp"
    Image.fromarray(np.zeros((2, 2, 3), dtype=np.uint8)).save(path)
    with pytest.raises(ImageFormatError):
        load_image(path)


def test_missing_file_is_io_error(tmp_path):
    with pytest.raises(OSError):
        load_image(tmp_path / "nope.png")


def test_luv_black_and_white():
    black = to_cieluv(np.zeros((1, 1, 3), dtype=np.uint8))
    assert np.array_equal(black.ravel(), [0.0, 0.0, 0.0])
    white = to_cieluv(np.full((1, 1, 3), 255, dtype=np.uint8)).ravel()
    assert white[0] == pytest.approx(100.0, abs=1e-9)
    assert abs(white[1]) < 0.02 and abs(white[2]) < 0.02


def test_luv_red_matches_published_table():
    # sRGB (255, 0, 0) under D65: L* 53.2408, u* 175.0151, v* 37.7564
    red = to_cieluv(np.array([[[255, 0, 0]]], dtype=np.uint8)).ravel()
    assert red == pytest.approx([53.2408, 175.0151, 37.7564], abs=0.01)


def test_luv_and_lab_match_independent_implementation():
    rng = np.random.default_rng(3)
    img = rng.integers(0, 256, size=(17, 23, 3), dtype=np.uint8)
    assert np.allclose(to_cieluv(img), rgb2luv(img), atol=1e-3)
    assert np.allclose(to_cielab(img), rgb2lab(img), atol=1e-3)


def test_luv_deterministic_and_shape_preserving():
    rng = np.random.default_rng(4)
    img = rng.integers(0, 256, size=(5, 9, 3), dtype=np.uint8)
    a, b = to_cieluv(img), to_cieluv(img.copy())
    assert a.shape == (5, 9, 3)
    assert np.array_equal(a, b)
    assert a[..., 0].min() >= 0 and a[..., 0].max() <= 100 + 1e-9


def test_quantize_rounds_half_up():
    assert quantize(np.array([0.5]))[0] == 128
    assert quantize(np.array([0.0, 1.0])).tolist() == [0, 255]


@pytest.mark.parametrize("value,level", [(0.0, 0), (1.0, 255), (0.5, 128)])
def test_write_constant_maps(tmp_path, value, level):
    path = tmp_path / "m.png"
    write_saliency_map(np.full((3, 4), value), path)
    out = np.array(Image.open(path))
    assert out.shape == (3, 4) and out.dtype == np.uint8
    assert (out == level).all()


def test_saliency_round_trip_within_one_level(tmp_path):
    rng = np.random.default_rng(5)
    sal = rng.uniform(0, 1, size=(13, 7))
    path = tmp_path / "rt.png"
    write_saliency_map(sal, path)
    back = load_image(path)[..., 0] / 255.0
    assert np.abs(back - sal).max() <= 1 / 255 + 1e-12


def test_write_to_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        write_saliency_map(np.zeros((2, 2)), tmp_path / "missing_dir" / "x.png")


def test_load_mask_and_label_dump(tmp_path):
    m = np.zeros((4, 4), dtype=np.uint8)
    m[1:3, 1:3] = 255
    Image.fromarray(m).save(tmp_path / "m.png")
    assert load_mask(tmp_path / "m.png").sum() == 4
    write_label_map(np.arange(16).reshape(4, 4), tmp_path / "l.png")
    assert load_image(tmp_path / "l.png").shape == (4, 4, 3)
