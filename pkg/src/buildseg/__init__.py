"""Evaluation, post-processing and data preparation for building segmentation masks."""

from .metrics import (
    DatasetReport,
    EvalConfig,
    EvalReport,
    PixelTally,
    aggregate,
    averaged_score,
    boundary_iou,
    evaluate_pair,
    iou,
)
from .morphology import (
    LabelMap,
    StructuringElement,
    boundary_band,
    closing,
    connected_components,
    dilate,
    erode,
    make_se,
    opening,
)
from .raster import (
    HeightGrid,
    NormSpec,
    PixelRect,
    crop,
    fuse_channels,
    load_height_grid,
    load_image,
    load_mask,
    save_image,
    save_mask,
)
from .rectify import RectifyConfig, RectifyTrace, RotatedRect, min_area_rect, rectangularity, rectify_component, rectify_mask

__version__ = "0.1.0"

__all__ = [
    "aggregate",
    "averaged_score",
    "boundary_band",
    "boundary_iou",
    "closing",
    "connected_components",
    "crop",
    "DatasetReport",
    "dilate",
    "erode",
    "EvalConfig",
    "EvalReport",
    "evaluate_pair",
    "fuse_channels",
    "HeightGrid",
    "iou",
    "LabelMap",
    "load_height_grid",
    "load_image",
    "load_mask",
    "make_se",
    "min_area_rect",
    "NormSpec",
    "opening",
    "PixelRect",
    "PixelTally",
    "rectangularity",
    "rectify_component",
    "rectify_mask",
    "RectifyConfig",
    "RectifyTrace",
    "RotatedRect",
    "save_image",
    "save_mask",
    "StructuringElement",
]
