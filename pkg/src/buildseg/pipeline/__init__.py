from .augment import AugmentationConfig, Sample, augment, draw_params
from .manifest import Manifest, ManifestEntry, SourceSpec, build_manifest, validate_manifest
from .tiling import TileGrid, extract_tiles, merge_tiles, plan_tiles

__all__ = [
    "AugmentationConfig",
    "Manifest",
    "ManifestEntry",
    "Sample",
    "SourceSpec",
    "TileGrid",
    "augment",
    "build_manifest",
    "draw_params",
    "extract_tiles",
    "merge_tiles",
    "plan_tiles",
    "validate_manifest",
]
