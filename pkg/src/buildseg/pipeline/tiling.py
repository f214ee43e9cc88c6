"""Fixed-size tiling of large rasters and stitching of tiled predictions."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatchError
from ..raster import PixelRect, crop


@dataclass(frozen=True)
class TileGrid:
    source_w: int
    source_h: int
    tile_size: int
    overlap: int
    tiles: tuple[PixelRect, ...]

    def to_dict(self) -> dict:
        return {
            "source_w": self.source_w,
            "source_h": self.source_h,
            "tile_size": self.tile_size,
            "overlap": self.overlap,
            "tiles": [list(t) for t in self.tiles],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict()) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "TileGrid":
        grid = cls(
            int(data["source_w"]),
            int(data["source_h"]),
            int(data["tile_size"]),
            int(data["overlap"]),
            tuple(PixelRect(*map(int, t)) for t in data["tiles"]),
        )
        for t in grid.tiles:
            if t.x < 0 or t.y < 0 or t.x + t.w > grid.source_w or t.y + t.h > grid.source_h:
                raise ValueError(f"tile {tuple(t)} lies outside the {grid.source_w}x{grid.source_h} source")
        return grid


def _origins(extent: int, tile: int, stride: int) -> list[int]:
    origins = list(range(0, extent - tile + 1, stride))
    if origins[-1] + tile < extent:
        origins.append(extent - tile)
    return origins


def plan_tiles(width: int, height: int, tile_size: int = 500, overlap: int = 0) -> TileGrid:
    """Row-major grid of ``tile_size`` squares with stride ``tile_size - overlap``.

    The last row and column are shifted inward so every tile is full size and
    inside the image.
    """
    if tile_size < 1 or tile_size > min(width, height):
        raise ValueError(f"tile size {tile_size} does not fit a {width}x{height} image")
    if not 0 <= overlap < tile_size:
        raise ValueError(f"overlap must be in [0, {tile_size}), got {overlap}")
    stride = tile_size - overlap
    tiles = tuple(
        PixelRect(x, y, tile_size, tile_size)
        for y in _origins(height, tile_size, stride)
        for x in _origins(width, tile_size, stride)
    )
    return TileGrid(width, height, tile_size, overlap, tiles)


def extract_tiles(arr, grid: TileGrid) -> list[np.ndarray]:
    a = np.asarray(arr)
    if a.shape[:2] != (grid.source_h, grid.source_w):
        raise DimensionMismatchError(
            f"raster is {a.shape[1]}x{a.shape[0]} but grid expects {grid.source_w}x{grid.source_h}"
        )
    return [crop(a, t) for t in grid.tiles]


def merge_tiles(tiles, grid: TileGrid) -> np.ndarray:
    """Average overlapping foreground probabilities; foreground iff the mean is >= 0.5.

    Tiles may be float probabilities in [0, 1], uint8 (value / 255) or bool.
    Integer tiles are summed exactly.
    """
    tiles = [np.asarray(t) for t in tiles]
    if len(tiles) != len(grid.tiles):
        raise DimensionMismatchError(f"got {len(tiles)} tiles, grid has {len(grid.tiles)}")
    for t, rect in zip(tiles, grid.tiles):
        if t.shape != (rect.h, rect.w):
            raise DimensionMismatchError(f"tile shape {t.shape} does not match {(rect.h, rect.w)}")

    exact = all(t.dtype == np.bool_ or t.dtype == np.uint8 for t in tiles)
    acc = np.zeros((grid.source_h, grid.source_w), dtype=np.int64 if exact else np.float64)
    count = np.zeros((grid.source_h, grid.source_w), dtype=np.int64)
    for t, (x, y, w, h) in zip(tiles, grid.tiles):
        if exact:
            vals = np.where(t, 255, 0) if t.dtype == np.bool_ else t.astype(np.int64)
        else:
            vals = t.astype(np.float64)
            if t.dtype == np.uint8:
                vals = vals / 255.0
            elif vals.min() < 0.0 or vals.max() > 1.0:
                raise ValueError("probabilities must lie in [0, 1]")
        acc[y : y + h, x : x + w] += vals
        count[y : y + h, x : x + w] += 1
    if (count == 0).any():
        raise ValueError("grid leaves pixels uncovered")
    if exact:
        return 2 * acc >= 255 * count
    return acc >= 0.5 * count
