"""Image containers, color conversion and raster I/O.

Images are plain numpy arrays:

* RGB images are ``(H, W, 3)`` ``uint8`` arrays.
* CIELUV / CIELab images are ``(H, W, 3)`` ``float64`` arrays.
* Saliency maps are ``(H, W)`` ``float64`` arrays with values in ``[0, 1]``.
"""
from __future__ import annotations

import os

import numpy as np
from PIL import Image, UnidentifiedImageError

__all__ = [
    "ImageFormatError",
    "load_image",
    "load_mask",
    "srgb_to_linear",
    "rgb_to_xyz",
    "to_cieluv",
    "to_cielab",
    "write_saliency_map",
    "quantize",
    "write_label_map",
    "write_gray",
]

# D65 reference white, Y normalized to 1
WHITE_D65 = np.array([0.95047, 1.0, 1.08883])

_RGB_TO_XYZ = np.array(
    [
        [0.412453, 0.357580, 0.180423],
        [0.212671, 0.715160, 0.072169],
        [0.019334, 0.119193, 0.950227],
    ]
)

_EPSILON = (6.0 / 29.0) ** 3
_KAPPA = (29.0 / 3.0) ** 3

_SUPPORTED = {"PNG", "PPM"}


class ImageFormatError(ValueError):
    """Raised when a file is not a decodable PNG or PPM image."""


def load_image(path: str | os.PathLike) -> np.ndarray:
    """Read a PNG or binary PPM file as an ``(H, W, 3)`` uint8 array.

    Grayscale sources are replicated into three channels and alpha is
    dropped.

    Raises
    ------
    FileNotFoundError, OSError
        If the file cannot be read.
    ImageFormatError
        If the file is not a valid PNG/PPM image.
    """
    path = os.fspath(path)
    with open(path, "rb") as fh:
        try:
            img = Image.open(fh)
            img.load()
        except (UnidentifiedImageError, SyntaxError, ValueError, EOFError) as exc:
            raise ImageFormatError(f"{path}: cannot decode image ({exc})") from exc
        except OSError as exc:
            raise ImageFormatError(f"{path}: truncated or corrupt image ({exc})") from exc
        if img.format not in _SUPPORTED:
            raise ImageFormatError(f"{path}: unsupported format {img.format!r}")
        if img.mode in ("I;16", "I", "F"):
            arr = np.asarray(img, dtype=np.float64)
            top = 65535.0 if img.mode == "I;16" else max(float(arr.max()), 1.0)
            gray = np.clip(np.round(arr / top * 255.0), 0, 255).astype(np.uint8)
            return np.repeat(gray[:, :, None], 3, axis=2)
        img = img.convert("RGB")
        return np.array(img, dtype=np.uint8)


def load_mask(path: str | os.PathLike) -> np.ndarray:
    """Read a ground-truth mask; pixels brighter than mid-gray are foreground."""
    rgb = load_image(path)
    return rgb.mean(axis=2) > 127.5


def srgb_to_linear(rgb: np.ndarray) -> np.ndarray:
    """Undo the sRGB transfer curve. Input in ``[0, 1]``."""
    rgb = np.asarray(rgb, dtype=np.float64)
    return np.where(rgb <= 0.04045, rgb / 12.92, ((rgb + 0.055) / 1.055) ** 2.4)


def rgb_to_xyz(img: np.ndarray) -> np.ndarray:
    """8-bit sRGB to CIE XYZ (D65, Y of white = 1)."""
    lin = srgb_to_linear(np.asarray(img, dtype=np.float64) / 255.0)
    return lin @ _RGB_TO_XYZ.T


def _lightness(y: np.ndarray) -> np.ndarray:
    # y is Y / Y_n
    return np.where(y > _EPSILON, 116.0 * np.cbrt(y) - 16.0, _KAPPA * y)


def to_cieluv(img: np.ndarray) -> np.ndarray:
    """Convert an 8-bit sRGB image to CIELUV under the D65 white point.

    Returns a float64 array of the same spatial shape with channels
    ``(L, u, v)``; ``L`` lies in ``[0, 100]``.
    """
    xyz = rgb_to_xyz(img)
    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    L = _lightness(y / WHITE_D65[1])

    denom = x + 15.0 * y + 3.0 * z
    safe = np.where(denom > 0, denom, 1.0)
    u_p = np.where(denom > 0, 4.0 * x / safe, 0.0)
    v_p = np.where(denom > 0, 9.0 * y / safe, 0.0)

    wx, wy, wz = WHITE_D65
    wd = wx + 15.0 * wy + 3.0 * wz
    un, vn = 4.0 * wx / wd, 9.0 * wy / wd

    u = 13.0 * L * (u_p - un)
    v = 13.0 * L * (v_p - vn)
    # black: u', v' are undefined but L = 0 makes u, v vanish
    u = np.where(denom > 0, u, 0.0)
    v = np.where(denom > 0, v, 0.0)
    return np.stack([L, u, v], axis=-1)


def to_cielab(img: np.ndarray) -> np.ndarray:
    """Convert an 8-bit sRGB image to CIELab (D65)."""
    xyz = rgb_to_xyz(img) / WHITE_D65

    def f(t):
        return np.where(t > _EPSILON, np.cbrt(t), t * _KAPPA / 116.0 + 16.0 / 116.0)

    fx, fy, fz = f(xyz[..., 0]), f(xyz[..., 1]), f(xyz[..., 2])
    L = 116.0 * fy - 16.0
    a = 500.0 * (fx - fy)
    b = 200.0 * (fy - fz)
    return np.stack([L, a, b], axis=-1)


def quantize(values: np.ndarray) -> np.ndarray:
    """Map reals in ``[0, 1]`` to 8-bit levels, rounding half up."""
    v = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    return np.floor(v * 255.0 + 0.5).astype(np.uint8)


def write_gray(levels: np.ndarray, path: str | os.PathLike) -> None:
    Image.fromarray(np.ascontiguousarray(levels, dtype=np.uint8)).save(
        os.fspath(path), format="PNG"
    )


def write_saliency_map(saliency: np.ndarray, path: str | os.PathLike) -> None:
    """Write a saliency map as an 8-bit grayscale PNG (``round(s * 255)``)."""
    saliency = np.asarray(saliency, dtype=np.float64)
    if saliency.ndim != 2:
        raise ValueError("saliency map must be two-dimensional")
    write_gray(quantize(saliency), path)


def write_label_map(labels: np.ndarray, path: str | os.PathLike, seed: int = 0) -> None:
    """Dump a label raster as a random-color PNG for inspection."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    palette = rng.integers(0, 256, size=(int(labels.max()) + 1, 3), dtype=np.uint8)
    Image.fromarray(palette[labels]).save(os.fspath(path), format="PNG")
