"""Multi-source dataset manifests.

A source directory holds ``images/*.png`` and ``masks/*.png`` paired by
file name, plus optional ``lidar/<stem>.asc`` height grids.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import BuildSegError
from ..raster import load_height_grid, load_image, load_mask


@dataclass(frozen=True)
class SourceSpec:
    name: str
    root: str
    split: str = "train"


@dataclass(frozen=True)
class ManifestEntry:
    source: str
    image: str
    mask: str
    lidar: str | None = None
    split: str = "train"

    def to_dict(self) -> dict:
        d = {"source": self.source, "image": self.image, "mask": self.mask}
        if self.lidar is not None:
            d["lidar"] = self.lidar
        d["split"] = self.split
        return d


@dataclass
class Manifest:
    entries: list[ManifestEntry] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({"entries": [e.to_dict() for e in self.entries]}, indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "Manifest":
        return cls([
            ManifestEntry(e["source"], e["image"], e["mask"], e.get("lidar"), e.get("split", "train"))
            for e in data["entries"]
        ])


def _scan_source(spec: SourceSpec) -> list[ManifestEntry]:
    root = Path(spec.root)
    image_dir = root / "images"
    if not image_dir.is_dir():
        raise FileNotFoundError(f"source {spec.name!r}: no images/ directory under {root}")
    entries = []
    for name in sorted(os.listdir(image_dir)):
        if not name.lower().endswith(".png"):
            continue
        lidar = root / "lidar" / (Path(name).stem + ".asc")
        entries.append(ManifestEntry(
            spec.name,
            str(image_dir / name),
            str(root / "masks" / name),
            str(lidar) if lidar.is_file() else None,
            spec.split,
        ))
    return entries


def build_manifest(sources) -> Manifest:
    """Collect image/mask pairs from every source, ordered by image path."""
    entries = []
    for spec in sources:
        entries.extend(_scan_source(spec))
    entries.sort(key=lambda e: e.image)
    return Manifest(entries)


def validate_manifest(manifest: Manifest) -> list[str]:
    """Return human-readable violations; an empty list means the manifest is usable."""
    problems = []
    seen: dict[str, int] = {}
    for k, e in enumerate(manifest.entries):
        for path in filter(None, (e.image, e.mask, e.lidar)):
            if path in seen:
                problems.append(f"entry {k}: path {path} already used by entry {seen[path]}")
            else:
                seen[path] = k

    for e in manifest.entries:
        shapes = {}
        for kind, path, loader in (
            ("image", e.image, load_image),
            ("mask", e.mask, load_mask),
            ("lidar", e.lidar, load_height_grid),
        ):
            if path is None:
                continue
            if not os.path.isfile(path):
                problems.append(f"{path}: missing {kind} file")
                continue
            try:
                data = loader(path)
            except (BuildSegError, OSError) as exc:
                problems.append(f"{path}: unreadable {kind} ({exc})")
                continue
            shapes[kind] = data.values.shape if kind == "lidar" else data.shape[:2]
        ref = shapes.get("image")
        for kind in ("mask", "lidar"):
            if ref is not None and kind in shapes and shapes[kind] != ref:
                (h, w), (kh, kw) = ref, shapes[kind]
                problems.append(f"{e.image}: dimension mismatch, image {w}x{h} vs {kind} {kw}x{kh}")
    return problems
