"""Synthetic images with exact ground truth.

Backgrounds are flat, checkerboard (optionally with grout lines between
tiles) or uniform noise around a base color; the foreground is one flat
disk, rectangle or ring.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace

import numpy as np
from PIL import Image

__all__ = ["SynthSpec", "generate", "default_suite", "grout_suite", "write_dataset", "load_specs"]

BACKGROUNDS = ("flat", "checkerboard", "noise")
SHAPES = ("disk", "rectangle", "ring")


def _rgb(c) -> tuple[int, int, int]:
    c = tuple(int(v) for v in c)
    if len(c) != 3 or any(not 0 <= v <= 255 for v in c):
        raise ValueError(f"invalid 8-bit RGB color {c}")
    return c


@dataclass(frozen=True)
class SynthSpec:
    width: int = 400
    height: int = 300
    background: str = "flat"
    background_color: tuple[int, int, int] = (70, 110, 160)
    tile: int = 8
    tile_color: tuple[int, int, int] = (230, 230, 210)
    grout: int = 0
    grout_color: tuple[int, int, int] = (10, 10, 10)
    amplitude: int = 25
    shape: str = "disk"
    object_color: tuple[int, int, int] = (220, 40, 40)
    center: tuple[float, float] | None = None
    size: tuple[int, int] = (60, 60)
    thickness: int = 25
    jitter: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("canvas must be at least 1x1")
        if self.background not in BACKGROUNDS:
            raise ValueError(f"background must be one of {BACKGROUNDS}")
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}")
        if self.tile < 1 or self.grout < 0 or self.amplitude < 0:
            raise ValueError("tile must be positive, grout and amplitude non-negative")
        for name in ("background_color", "tile_color", "grout_color", "object_color"):
            object.__setattr__(self, name, _rgb(getattr(self, name)))
        size = self.size
        if np.isscalar(size):
            size = (size, size)
        object.__setattr__(self, "size", tuple(int(v) for v in size))
        if self.center is not None:
            object.__setattr__(self, "center", tuple(float(v) for v in self.center))

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown synth keys: {sorted(unknown)}")
        d = {k: (tuple(v) if isinstance(v, list) else v) for k, v in d.items()}
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def _object_center(spec: SynthSpec, rng: np.random.Generator) -> tuple[float, float]:
    cx, cy = spec.center if spec.center is not None else ((spec.width - 1) / 2, (spec.height - 1) / 2)
    if spec.jitter:
        dx, dy = rng.integers(-spec.jitter, spec.jitter + 1, size=2)
        cx, cy = cx + dx, cy + dy
    return cx, cy


def _object_mask(spec: SynthSpec, cx: float, cy: float) -> np.ndarray:
    ys, xs = np.indices((spec.height, spec.width), dtype=np.float64)
    if spec.shape == "rectangle":
        hw, hh = spec.size[0] / 2.0, spec.size[1] / 2.0
        x0, y0 = cx - hw, cy - hh
        x1, y1 = cx + hw, cy + hh
        if x0 < -0.5 or y0 < -0.5 or x1 > spec.width - 0.5 or y1 > spec.height - 0.5:
            raise ValueError("rectangle does not fit inside the canvas")
        return (xs >= x0) & (xs < x1) & (ys >= y0) & (ys < y1)
    r = spec.size[0]
    if cx - r < 0 or cy - r < 0 or cx + r > spec.width - 1 or cy + r > spec.height - 1:
        raise ValueError(f"{spec.shape} does not fit inside the canvas")
    d2 = (xs - cx) ** 2 + (ys - cy) ** 2
    mask = d2 <= r * r
    if spec.shape == "ring":
        inner = r - spec.thickness
        if inner > 0:
            mask &= d2 > inner * inner
    return mask


def generate(spec: SynthSpec) -> tuple[np.ndarray, np.ndarray]:
    """Render ``spec`` into an ``(H, W, 3)`` uint8 image and a boolean mask.

    Output depends only on ``spec`` (including its seed).

    Raises
    ------
    ValueError
        If the object does not fit inside the canvas.
    """
    rng = np.random.default_rng(spec.seed)
    h, w = spec.height, spec.width
    img = np.empty((h, w, 3), dtype=np.uint8)
    img[:] = spec.background_color

    if spec.background == "checkerboard":
        ys, xs = np.indices((h, w))
        period = spec.tile + spec.grout
        odd = ((ys // period + xs // period) % 2).astype(bool)
        img[odd] = spec.tile_color
        if spec.grout:
            grout = (ys % period >= spec.tile) | (xs % period >= spec.tile)
            img[grout] = spec.grout_color
    elif spec.background == "noise":
        base = np.array(spec.background_color, dtype=np.int64)
        noise = rng.integers(-spec.amplitude, spec.amplitude + 1, size=(h, w, 3))
        img[:] = np.clip(base + noise, 0, 255).astype(np.uint8)

    cx, cy = _object_center(spec, rng)
    mask = _object_mask(spec, cx, cy)
    img[mask] = spec.object_color
    return img, mask


def default_suite(width: int = 400, height: int = 300) -> list[SynthSpec]:
    """Twenty specs over flat, 4/8 px checkerboard and noise backgrounds."""
    shapes = [
        dict(shape="disk", size=(60, 60)),
        dict(shape="rectangle", size=(130, 100)),
        dict(shape="ring", size=(70, 70), thickness=30),
        dict(shape="disk", size=(45, 45)),
        dict(shape="rectangle", size=(90, 120)),
    ]
    objects = [(220, 40, 40), (240, 200, 30), (40, 170, 60), (200, 50, 200), (250, 120, 20)]
    backgrounds = [
        dict(background="flat", background_color=(70, 110, 160)),
        dict(background="checkerboard", tile=4, background_color=(60, 60, 60), tile_color=(200, 200, 200)),
        dict(background="checkerboard", tile=8, background_color=(40, 80, 140), tile_color=(210, 220, 230)),
        dict(background="noise", background_color=(90, 120, 100), amplitude=30),
    ]
    specs = []
    for b, bg in enumerate(backgrounds):
        for s, shp in enumerate(shapes):
            specs.append(
                SynthSpec(
                    width=width,
                    height=height,
                    object_color=objects[(s + b) % len(objects)],
                    jitter=20,
                    seed=100 * b + s,
                    **bg,
                    **shp,
                )
            )
    return specs


def grout_suite(width: int = 400, height: int = 300, count: int = 6) -> list[SynthSpec]:
    """Checkerboards whose tiles are separated by 1 px high-contrast grout."""
    shapes = [
        dict(shape="disk", size=(60, 60)),
        dict(shape="rectangle", size=(120, 100)),
        dict(shape="ring", size=(70, 70), thickness=30),
    ]
    specs = []
    for i in range(count):
        specs.append(
            SynthSpec(
                width=width,
                height=height,
                background="checkerboard",
                tile=6 + 2 * (i % 3),
                grout=1,
                background_color=(150, 160, 170),
                tile_color=(170, 175, 160),
                grout_color=(15, 15, 15),
                object_color=[(220, 40, 40), (230, 190, 30), (40, 160, 70)][i % 3],
                jitter=15,
                seed=500 + i,
                **shapes[i % 3],
            )
        )
    return specs


def load_specs(path: str | os.PathLike) -> list[SynthSpec]:
    """Read a JSON object or list of objects of ``SynthSpec`` fields."""
    with open(path) as fh:
        data = json.load(fh)
    items = data if isinstance(data, list) else [data]
    if not items:
        raise ValueError("spec file holds no specs")
    return [SynthSpec.from_dict(d) for d in items]


def write_dataset(specs: list[SynthSpec], out_dir: str | os.PathLike, count: int | None = None) -> list[str]:
    """Write ``images/<id>.png`` and ``masks/<id>.png`` pairs.

    With ``count`` the specs are cycled and image ``i`` gets seed
    ``spec.seed + i``.
    """
    out_dir = os.fspath(out_dir)
    os.makedirs(os.path.join(out_dir, "images"), exist_ok=True)
    os.makedirs(os.path.join(out_dir, "masks"), exist_ok=True)
    if count is None:
        chosen = list(specs)
    else:
        chosen = [replace(specs[i % len(specs)], seed=specs[i % len(specs)].seed + i) for i in range(count)]
    # render everything first so an invalid spec leaves no partial dataset
    rendered = [generate(s) for s in chosen]
    ids = []
    for i, (img, mask) in enumerate(rendered):
        name = f"synth_{i:04d}"
        Image.fromarray(img).save(os.path.join(out_dir, "images", name + ".png"))
        Image.fromarray((mask * 255).astype(np.uint8)).save(os.path.join(out_dir, "masks", name + ".png"))
        ids.append(name)
    return ids
