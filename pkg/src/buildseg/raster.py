"""Raster I/O, cropping and LiDAR height fusion.

Masks are 2-D ``bool`` arrays of shape ``(H, W)``; images ("rasters") are
``uint8`` arrays of shape ``(H, W, C)`` with ``C`` in ``{1, 3, 4}``. A
4-channel raster is always RGB plus a normalized height channel.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    CorruptImageError,
    DimensionMismatchError,
    GridParseError,
    OutOfBoundsError,
    UnsupportedBitDepthError,
)

MASK_THRESHOLD = 128

# integer rec.601 luma, rounded half-up
_LUMA_WEIGHTS = (299, 587, 114)

_EIGHT_BIT_MODES = {"L", "LA", "RGB", "RGBA", "P", "PA"}


class PixelRect(NamedTuple):
    x: int
    y: int
    w: int
    h: int


@dataclass(frozen=True)
class NormSpec:
    """Linear height normalization: ``lo`` maps to 0 and ``hi`` to 255."""

    lo: float = 0.0
    hi: float = 30.0

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.hi <= self.lo:
            raise ValueError(f"NormSpec needs finite hi > lo, got lo={self.lo} hi={self.hi}")


@dataclass(frozen=True, eq=False)
class HeightGrid:
    values: np.ndarray
    nodata: float | None = None
    xllcorner: float = 0.0
    yllcorner: float = 0.0
    cellsize: float = 1.0

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def valid(self) -> np.ndarray:
        """Boolean grid, False on nodata cells."""
        if self.nodata is None:
            return np.ones(self.values.shape, dtype=bool)
        return self.values != self.nodata


def as_mask(arr) -> np.ndarray:
    """Validate and coerce an array-like into a 2-D boolean mask."""
    m = np.asarray(arr)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"mask must be a non-empty 2-D grid, got shape {m.shape}")
    return m.astype(bool, copy=False)


# --------------------------------------------------------------------------
# PNG


def _open_png(path) -> Image.Image:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, SyntaxError, ValueError, OSError, EOFError) as exc:
        raise CorruptImageError(f"{path}: cannot decode image ({exc})") from exc
    if img.mode not in _EIGHT_BIT_MODES:
        raise UnsupportedBitDepthError(f"{path}: unsupported bit depth (mode {img.mode})")
    return img


def _luma(rgb: np.ndarray) -> np.ndarray:
    r, g, b = (rgb[..., i].astype(np.int32) for i in range(3))
    wr, wg, wb = _LUMA_WEIGHTS
    return ((wr * r + wg * g + wb * b + 500) // 1000).astype(np.uint8)


def load_mask(path) -> np.ndarray:
    """Read an 8-bit PNG as a mask; a pixel is foreground iff its value >= 128.

    RGB(A) inputs are reduced to gray with integer rec.601 weights; alpha is
    ignored.
    """
    img = _open_png(path)
    if img.mode in ("P", "PA"):
        img = img.convert("RGB")
    arr = np.asarray(img)
    if img.mode in ("RGB", "RGBA"):
        gray = _luma(arr)
    elif img.mode == "LA":
        gray = arr[..., 0]
    else:
        gray = arr
    return gray >= MASK_THRESHOLD


def save_mask(mask, path) -> None:
    m = as_mask(mask)
    Image.fromarray(np.where(m, 255, 0).astype(np.uint8), mode="L").save(path, format="PNG")


def load_image(path) -> np.ndarray:
    """Read an 8-bit PNG into an ``(H, W, C)`` uint8 raster, no color conversion."""
    img = _open_png(path)
    if img.mode in ("P", "PA"):
        img = img.convert("RGBA" if "transparency" in img.info or img.mode == "PA" else "RGB")
    if img.mode == "LA":
        raise UnsupportedBitDepthError(f"{path}: gray+alpha images are not supported")
    arr = np.asarray(img, dtype=np.uint8)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return np.ascontiguousarray(arr)


def save_image(raster, path) -> None:
    r = np.asarray(raster)
    if r.ndim == 2:
        r = r[:, :, None]
    if r.dtype != np.uint8 or r.ndim != 3 or r.shape[2] not in (1, 3, 4):
        raise ValueError(f"raster must be uint8 (H, W, 1|3|4), got {r.dtype} {r.shape}")
    mode = {1: "L", 3: "RGB", 4: "RGBA"}[r.shape[2]]
    data = r[:, :, 0] if r.shape[2] == 1 else r
    Image.fromarray(np.ascontiguousarray(data), mode=mode).save(path, format="PNG")


# --------------------------------------------------------------------------
# ESRI ASCII grid

_REQUIRED_KEYS = ("ncols", "nrows", "cellsize")


def _parse_number(token: str, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise GridParseError(f"non-numeric token {token!r} in {what}") from None


def parse_height_grid(text: str) -> HeightGrid:
    lines = text.splitlines()
    header: dict[str, str] = {}
    i = 0
    while i < len(lines):
        parts = lines[i].split()
        if not parts:
            i += 1
            continue
        key = parts[0].lower()
        if key[0].isdigit() or key[0] in "+-.":
            break
        if len(parts) != 2:
            raise GridParseError(f"malformed header line {lines[i]!r}")
        header[key] = parts[1]
        i += 1

    for key in _REQUIRED_KEYS:
        if key not in header:
            raise GridParseError(f"header missing {key}")
    x_key = "xllcorner" if "xllcorner" in header else "xllcenter"
    y_key = "yllcorner" if "yllcorner" in header else "yllcenter"
    if x_key not in header or y_key not in header:
        raise GridParseError("header missing xllcorner/yllcorner")
    try:
        ncols, nrows = int(header["ncols"]), int(header["nrows"])
    except ValueError:
        raise GridParseError("ncols/nrows must be integers") from None
    if ncols < 1 or nrows < 1:
        raise GridParseError(f"invalid grid size {ncols}x{nrows}")
    cellsize = _parse_number(header["cellsize"], "header")
    nodata = _parse_number(header["nodata_value"], "header") if "nodata_value" in header else None

    tokens = " ".join(lines[i:]).split()
    if len(tokens) != ncols * nrows:
        raise GridParseError(f"expected {ncols * nrows} values, found {len(tokens)}")
    values = np.array([_parse_number(t, "grid body") for t in tokens], dtype=np.float64)
    bad = ~np.isfinite(values)
    if nodata is not None:
        bad &= values != nodata
    if bad.any():
        raise GridParseError("grid contains non-finite values")

    xll = _parse_number(header[x_key], "header")
    yll = _parse_number(header[y_key], "header")
    if x_key == "xllcenter":
        xll -= cellsize / 2
    if y_key == "yllcenter":
        yll -= cellsize / 2
    return HeightGrid(values.reshape(nrows, ncols), nodata, xll, yll, cellsize)


def load_height_grid(path) -> HeightGrid:
    """Read an ESRI ASCII grid; the first data row is the top of the raster."""
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        return parse_height_grid(fh.read())


def save_height_grid(grid: HeightGrid, path) -> None:
    nodata = grid.nodata if grid.nodata is not None else -9999
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"ncols {grid.width}\n")
        fh.write(f"nrows {grid.height}\n")
        fh.write(f"xllcorner {grid.xllcorner!r}\n")
        fh.write(f"yllcorner {grid.yllcorner!r}\n")
        fh.write(f"cellsize {grid.cellsize!r}\n")
        fh.write(f"NODATA_value {nodata!r}\n")
        for row in grid.values:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


# --------------------------------------------------------------------------
# geometry / fusion


def normalize_heights(values: np.ndarray, norm: NormSpec) -> np.ndarray:
    scaled = np.clip((np.asarray(values, dtype=np.float64) - norm.lo) / (norm.hi - norm.lo), 0.0, 1.0)
    return np.floor(scaled * 255.0 + 0.5).astype(np.uint8)


def fuse_channels(image, grid: HeightGrid, norm: NormSpec | None = None) -> np.ndarray:
    """Append normalized LiDAR heights to an RGB raster as a fourth channel.

    Heights are mapped linearly with ``norm`` (lo -> 0, hi -> 255), clamped,
    and rounded half-up. Nodata cells become 0.
    """
    norm = norm or NormSpec()
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"fusion needs a 3-channel raster, got shape {img.shape}")
    if img.shape[:2] != grid.values.shape:
        raise DimensionMismatchError(
            f"image is {img.shape[1]}x{img.shape[0]} but height grid is {grid.width}x{grid.height}"
        )
    valid = grid.valid
    heights = np.where(valid, grid.values, norm.lo)
    channel = np.where(valid, normalize_heights(heights, norm), 0).astype(np.uint8)
    return np.concatenate([img.astype(np.uint8, copy=False), channel[:, :, None]], axis=2)


def crop(arr, rect: PixelRect) -> np.ndarray:
    """Copy the ``rect`` window out of a mask or raster."""
    a = np.asarray(arr)
    x, y, w, h = rect
    height, width = a.shape[:2]
    if w < 1 or h < 1 or x < 0 or y < 0 or x + w > width or y + h > height:
        raise OutOfBoundsError(f"rect {tuple(rect)} outside {width}x{height} grid")
    return a[y : y + h, x : x + w].copy()
