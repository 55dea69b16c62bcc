"""End-to-end detection and its configuration."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .cues import CueParams, LayerCues, layer_cues
from .imgproc import to_cieluv, write_gray, write_label_map, quantize
from .inference import (
    Assignment,
    InferenceParams,
    SaliencyGraph,
    build_graph,
    hs_inference,
    loopy_bp,
    render_saliency,
)
from .scale_merge import ENCOMPASS, PIXELS, LayerHierarchy, ScaleThresholds, extract_layers
from .segmentation import watershed_oversegment

__all__ = ["RunConfig", "Detection", "detect"]

CHS = "chs"
HS = "hs"

# values the source method leaves unpublished; defaults are our own choices
CALIBRATED = ["gamma", "sigmaC", "labels", "maxIters", "damping", "tol"]


@dataclass
class RunConfig:
    thresholds: ScaleThresholds = field(default_factory=ScaleThresholds)
    cue_params: CueParams = field(default_factory=CueParams)
    infer_params: InferenceParams = field(default_factory=InferenceParams)
    mode: str = CHS
    scale_measure: str = ENCOMPASS
    weighted_color: bool = False
    dump_layers: bool = False
    dump_cues: bool = False

    def __post_init__(self):
        if self.mode not in (CHS, HS):
            raise ValueError(f"mode must be 'chs' or 'hs', got {self.mode!r}")
        if self.scale_measure not in (ENCOMPASS, PIXELS):
            raise ValueError(f"unknown scale measure {self.scale_measure!r}")
        if self.infer_params.n_layers != len(self.thresholds.per_layer):
            raise ValueError("beta/gamma/lambdaH lengths do not match the layer count")

    @classmethod
    def for_layers(cls, n_layers: int, **kwargs) -> "RunConfig":
        return cls(
            thresholds=ScaleThresholds.for_layers(n_layers),
            infer_params=InferenceParams.for_layers(n_layers),
            **kwargs,
        )

    def to_dict(self) -> dict:
        ip, cp = self.infer_params, self.cue_params
        return {
            "thresholds": list(self.thresholds.per_layer),
            "referenceArea": list(self.thresholds.reference_area),
            "sigmaSqFactor": cp.sigma_sq_factor,
            "lambdaLoc": cp.lambda_loc,
            "normalizationEpsilon": cp.normalization_epsilon,
            "beta": list(ip.beta),
            "lambdaH": list(ip.lambda_h),
            "gamma": list(ip.gamma),
            "sigmaC": ip.sigma_c,
            "labels": ip.labels,
            "maxIters": ip.max_iters,
            "damping": ip.damping,
            "tol": ip.tol,
            "mode": self.mode,
            "scaleMeasure": self.scale_measure,
            "weightedColor": self.weighted_color,
            "dumpLayers": self.dump_layers,
            "dumpCues": self.dump_cues,
            "calibrated": list(CALIBRATED),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = set(cls().to_dict())
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        n = len(d.get("thresholds", [5, 17, 33]))
        base = cls.for_layers(n) if n in (2, 3, 4, 5) else cls()
        merged = {**base.to_dict(), **d}
        return cls(
            thresholds=ScaleThresholds(merged["thresholds"], tuple(merged["referenceArea"])),
            cue_params=CueParams(
                merged["sigmaSqFactor"], merged["lambdaLoc"], merged["normalizationEpsilon"]
            ),
            infer_params=InferenceParams(
                beta=list(merged["beta"]),
                lambda_h=list(merged["lambdaH"]),
                gamma=list(merged["gamma"]),
                sigma_c=merged["sigmaC"],
                labels=int(merged["labels"]),
                max_iters=int(merged["maxIters"]),
                damping=float(merged["damping"]),
                tol=float(merged["tol"]),
            ),
            mode=merged["mode"],
            scale_measure=merged["scaleMeasure"],
            weighted_color=bool(merged["weightedColor"]),
            dump_layers=bool(merged["dumpLayers"]),
            dump_cues=bool(merged["dumpCues"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: str | os.PathLike) -> "RunConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())


@dataclass
class Detection:
    saliency: np.ndarray
    hierarchy: LayerHierarchy
    cues: list[LayerCues]
    graph: SaliencyGraph
    assignment: Assignment


def detect(image: np.ndarray, config: RunConfig | None = None) -> Detection:
    """Run the full pipeline on an ``(H, W, 3)`` uint8 image."""
    config = config or RunConfig()
    luv = to_cieluv(image)
    labels, regions = watershed_oversegment(luv)
    hierarchy = extract_layers(
        labels,
        regions,
        config.thresholds,
        measure=config.scale_measure,
        weighted_color=config.weighted_color,
    )
    # cue bandwidth follows the nominal threshold: coordinates are normalized
    cues = [
        layer_cues(hierarchy.labels[k], hierarchy.regions[k], t, config.cue_params)
        for k, t in enumerate(config.thresholds.per_layer)
    ]
    graph = build_graph(hierarchy, cues, config.infer_params)
    if config.mode == HS:
        assignment = hs_inference(graph)
    else:
        assignment = loopy_bp(graph, config.infer_params)
    n1 = len(hierarchy.regions[0])
    saliency = render_saliency(assignment.values[:n1], hierarchy.labels[0])
    return Detection(saliency, hierarchy, cues, graph, assignment)


def dump_debug(result: Detection, stem: str | os.PathLike, layers: bool, cues: bool) -> list[str]:
    """Write layer label maps and/or per-layer cue maps next to ``stem``."""
    stem = os.fspath(stem)
    written = []
    for k in range(result.hierarchy.n_layers):
        labels = result.hierarchy.labels[k]
        if layers:
            path = f"{stem}_layer{k + 1}.png"
            write_label_map(labels, path)
            written.append(path)
        if cues:
            path = f"{stem}_cue{k + 1}.png"
            write_gray(quantize(result.cues[k].combined[labels]), path)
            written.append(path)
    return written
