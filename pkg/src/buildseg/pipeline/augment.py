"""Seeded photometric and geometric augmentation.

Random crop, horizontal/vertical flips, then brightness, contrast,
saturation and hue jitter, in that order. All randomness for a sample comes
from a Philox stream keyed by ``(seed, index)``, so results do not depend on
iteration order or worker count.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from ..errors import DimensionMismatchError

N_DRAWS = 8
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Sample:
    image: np.ndarray
    mask: np.ndarray
    source_id: str = ""

    def __post_init__(self):
        if self.image.shape[:2] != self.mask.shape:
            raise DimensionMismatchError(
                f"image {self.image.shape[:2]} and mask {self.mask.shape} differ in size"
            )


@dataclass(frozen=True)
class AugmentationConfig:
    crop_size: int | None = None
    hflip_prob: float = 0.5
    vflip_prob: float = 0.5
    brightness_delta: float = 32.0
    contrast_range: tuple[float, float] = (0.5, 1.5)
    saturation_range: tuple[float, float] = (0.5, 1.5)
    hue_delta: float = 18.0
    seed: int = 0

    def __post_init__(self):
        for p in (self.hflip_prob, self.vflip_prob):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"flip probability {p} outside [0, 1]")
        for lo, hi in (self.contrast_range, self.saturation_range):
            if not 0.0 < lo <= hi:
                raise ValueError(f"range ({lo}, {hi}) must be ordered with a positive lower bound")
        if self.brightness_delta < 0 or self.hue_delta < 0:
            raise ValueError("deltas must be >= 0")
        if self.crop_size is not None and self.crop_size < 1:
            raise ValueError("crop_size must be >= 1")

    @classmethod
    def identity(cls, seed: int = 0) -> "AugmentationConfig":
        return cls(None, 0.0, 0.0, 0.0, (1.0, 1.0), (1.0, 1.0), 0.0, seed)

    @classmethod
    def from_dict(cls, data: dict) -> "AugmentationConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown augmentation keys: {sorted(unknown)}")
        data = dict(data)
        for key in ("contrast_range", "saturation_range"):
            if key in data:
                data[key] = tuple(float(v) for v in data[key])
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"


@dataclass(frozen=True)
class Draws:
    crop_x: int
    crop_y: int
    hflip: bool
    vflip: bool
    brightness: float
    contrast: float
    saturation: float
    hue: float


def _stream(seed: int, index: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def draw_params(cfg: AugmentationConfig, width: int, height: int, index: int = 0) -> Draws:
    if cfg.crop_size is None:
        cw, ch = width, height
    else:
        cw = ch = cfg.crop_size
    if cw > width or ch > height:
        raise ValueError(f"crop {cfg.crop_size} larger than {width}x{height} sample")
    u = _stream(cfg.seed, index).random(N_DRAWS)
    lo_c, hi_c = cfg.contrast_range
    lo_s, hi_s = cfg.saturation_range
    return Draws(
        crop_x=min(width - cw, math.floor(u[0] * (width - cw + 1))),
        crop_y=min(height - ch, math.floor(u[1] * (height - ch + 1))),
        hflip=bool(u[2] < cfg.hflip_prob),
        vflip=bool(u[3] < cfg.vflip_prob),
        brightness=cfg.brightness_delta * (2 * u[4] - 1),
        contrast=lo_c + (hi_c - lo_c) * u[5],
        saturation=lo_s + (hi_s - lo_s) * u[6],
        hue=cfg.hue_delta * (2 * u[7] - 1),
    )


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """RGB in [0, 255] to HSV with hue on a [0, 180) wheel and S, V in [0, 1] / [0, 255]."""
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    c = v - rgb.min(axis=-1)
    safe_c = np.where(c > 0, c, 1.0)
    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
    h = np.where(
        v == r,
        np.mod((g - b) / safe_c, 6.0),
        np.where(v == g, (b - r) / safe_c + 2.0, (r - g) / safe_c + 4.0),
    )
    h = np.where(c > 0, h * 30.0, 0.0)
    return np.stack([h, s, v], axis=-1)


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    h6 = hsv[..., 0] / 30.0
    s, v = hsv[..., 1], hsv[..., 2]
    out = []
    for n in (5.0, 3.0, 1.0):
        k = np.mod(n + h6, 6.0)
        out.append(v - v * s * np.clip(np.minimum(k, 4.0 - k), 0.0, 1.0))
    return np.stack(out, axis=-1)


def photometric(color: np.ndarray, d: Draws) -> np.ndarray:
    """Brightness, contrast, saturation and hue jitter on 1- or 3-channel color data."""
    x = (color.astype(np.float64) + d.brightness) * d.contrast
    # HSV needs valid intensities
    x = np.clip(x, 0.0, 255.0)
    if x.shape[-1] == 3:
        hsv = rgb_to_hsv(x)
        hsv[..., 1] = np.clip(hsv[..., 1] * d.saturation, 0.0, 1.0)
        hsv[..., 0] = np.mod(hsv[..., 0] + d.hue, 180.0)
        x = hsv_to_rgb(hsv)
    return np.floor(np.clip(x, 0.0, 255.0) + 0.5).astype(np.uint8)


def augment(sample: Sample, cfg: AugmentationConfig, index: int = 0) -> Sample:
    """Apply one random draw of the recipe to ``sample``.

    Geometric steps apply to image and mask alike; photometric steps touch
    only the color channels of the image (a fused height channel is left
    alone).
    """
    image = np.asarray(sample.image)
    mask = np.asarray(sample.mask, dtype=bool)
    if image.ndim == 2:
        image = image[:, :, None]
    h, w = mask.shape
    d = draw_params(cfg, w, h, index)
    cw, ch = (w, h) if cfg.crop_size is None else (cfg.crop_size, cfg.crop_size)

    image = image[d.crop_y : d.crop_y + ch, d.crop_x : d.crop_x + cw]
    mask = mask[d.crop_y : d.crop_y + ch, d.crop_x : d.crop_x + cw]
    if d.hflip:
        image, mask = image[:, ::-1], mask[:, ::-1]
    if d.vflip:
        image, mask = image[::-1], mask[::-1]

    n_color = 3 if image.shape[2] >= 3 else 1
    color = photometric(image[:, :, :n_color], d)
    out = np.concatenate([color, image[:, :, n_color:]], axis=2)
    return Sample(np.ascontiguousarray(out), np.ascontiguousarray(mask), sample.source_id)
