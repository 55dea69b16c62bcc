"""Hierarchical salient object detection with encompassment-scale layers."""
from .cues import CueParams, LayerCues, layer_cues
from .evaluation import DatasetSummary, EvalRecord, aggregate, f_measure, mae, pr_sweep
from .imgproc import load_image, to_cielab, to_cieluv, write_saliency_map
from .inference import (
    Assignment,
    DegenerateInputError,
    InferenceParams,
    SaliencyGraph,
    build_graph,
    energy,
    hs_inference,
    loopy_bp,
    render_saliency,
    solve_exact,
)
from .pipeline import Detection, RunConfig, detect
from .scale_merge import LayerHierarchy, ScaleThresholds, extract_layers, merge_regions, scale_below
from .segmentation import Region, watershed_oversegment
from .synth import SynthSpec, generate

__version__ = "0.1.0"
