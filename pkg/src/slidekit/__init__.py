"""slidekit: derender raster slides into editable SVG and evaluate the results."""

from .backends import BackendRequest, HttpBackend, MockOracleBackend
from .contexts import (
    AuxContext,
    ContextKind,
    Detection,
    DetectionSet,
    build_partial,
    build_prompt,
    build_refinement_context,
    build_skeleton,
)
from .engine import DerenderResult, PipelineRun, derender_once, derender_pipeline, refine
from .errors import SlidekitError
from .inpaint import telea_inpaint
from .metrics import (
    EloTable,
    RankingSet,
    decompose_ranking,
    elo_update,
    evaluate_sample,
    kendalls_w,
    miou,
    ocr_accuracy,
    symmetric_iou,
    top_rank_frequency,
    win_rate,
)
from .model import (
    UNKNOWN,
    BBox,
    BackgroundAsset,
    ImageAsset,
    SlideDoc,
    TextAsset,
    TextStyle,
    has_unknown,
    validate,
)
from .postprocess import extract_assets, extract_background, resolve_overlaps
from .raster import composite_render, crop_region, load_png, mse, resize_max_side, save_png
from .svgio import parse_slide_svg, serialize_slide_svg

__version__ = "0.1.0"

__all__ = [
    "AuxContext",
    "BBox",
    "BackendRequest",
    "BackgroundAsset",
    "ContextKind",
    "DerenderResult",
    "Detection",
    "DetectionSet",
    "EloTable",
    "HttpBackend",
    "ImageAsset",
    "MockOracleBackend",
    "PipelineRun",
    "RankingSet",
    "SlideDoc",
    "SlidekitError",
    "TextAsset",
    "TextStyle",
    "UNKNOWN",
    "build_partial",
    "build_prompt",
    "build_refinement_context",
    "build_skeleton",
    "composite_render",
    "crop_region",
    "decompose_ranking",
    "derender_once",
    "derender_pipeline",
    "elo_update",
    "evaluate_sample",
    "extract_assets",
    "extract_background",
    "has_unknown",
    "kendalls_w",
    "load_png",
    "miou",
    "mse",
    "ocr_accuracy",
    "parse_slide_svg",
    "refine",
    "resize_max_side",
    "resolve_overlaps",
    "save_png",
    "serialize_slide_svg",
    "symmetric_iou",
    "telea_inpaint",
    "top_rank_frequency",
    "validate",
    "win_rate",
    "__version__",
]
