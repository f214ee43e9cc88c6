"""Rectangle-aware post-processing of predicted building masks.

The mask is denoised with an opening and a closing, split into
8-connected components, and each component is tested against its
minimum-area enclosing rotated rectangle: near-rectangular components are
replaced by that rectangle, tiny ones are dropped, and the rest are trimmed
with line openings along the rectangle's two axes.

Pixel ``(row, col)`` is treated as the unit square ``[col, col+1] x
[row, row+1]``; rectangle coordinates use that continuous frame.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from .morphology import closing, connected_components, make_se, opening
from .raster import as_mask

# pixel centres this close to a rectangle edge count as inside
_EDGE_EPS = 1e-7


@dataclass(frozen=True)
class RotatedRect:
    """Rectangle with ``w >= h``; ``angle`` is the direction of the long side, in [0, 180)."""

    center: tuple[float, float]
    size: tuple[float, float]
    angle: float

    @property
    def area(self) -> float:
        return self.size[0] * self.size[1]

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        t = math.radians(self.angle)
        return np.array([math.cos(t), math.sin(t)]), np.array([-math.sin(t), math.cos(t)])

    def corners(self) -> np.ndarray:
        u, v = self.axes()
        c = np.asarray(self.center)
        hw, hh = self.size[0] / 2, self.size[1] / 2
        return np.array([c - hw * u - hh * v, c + hw * u - hh * v, c + hw * u + hh * v, c - hw * u + hh * v])

    def rasterize(self, shape: tuple[int, int]) -> np.ndarray:
        """Mask of the pixels whose centre lies inside the rectangle (edges inclusive)."""
        out = np.zeros(shape, dtype=bool)
        window = self._pixel_window(shape)
        if window is None:
            return out
        y0, y1, x0, x1 = window
        out[y0:y1, x0:x1] = self._inside(y0, y1, x0, x1)
        return out

    def _pixel_window(self, shape):
        pts = self.corners()
        x0 = max(0, math.floor(pts[:, 0].min()) - 1)
        x1 = min(shape[1], math.ceil(pts[:, 0].max()) + 1)
        y0 = max(0, math.floor(pts[:, 1].min()) - 1)
        y1 = min(shape[0], math.ceil(pts[:, 1].max()) + 1)
        if x0 >= x1 or y0 >= y1:
            return None
        return y0, y1, x0, x1

    def _inside(self, y0, y1, x0, x1) -> np.ndarray:
        u, v = self.axes()
        px = np.arange(x0, x1) + 0.5 - self.center[0]
        py = np.arange(y0, y1) + 0.5 - self.center[1]
        along = px[None, :] * u[0] + py[:, None] * u[1]
        across = px[None, :] * v[0] + py[:, None] * v[1]
        return (np.abs(along) <= self.size[0] / 2 + _EDGE_EPS) & (np.abs(across) <= self.size[1] / 2 + _EDGE_EPS)


@dataclass(frozen=True)
class RectifyConfig:
    denoise_se_size: int = 3
    line_se_length: int = 5
    rect_threshold: float = 0.85
    min_component_area: int = 4

    def __post_init__(self):
        for name in ("denoise_se_size", "line_se_length", "min_component_area"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0 < self.rect_threshold <= 1:
            raise ValueError("rect_threshold must be in (0, 1]")


@dataclass(frozen=True)
class ComponentRecord:
    label: int
    area_before: int
    rectangularity: float
    action: str  # removed | snapped | kept
    area_after: int


@dataclass
class RectifyTrace:
    records: list[ComponentRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def to_jsonl(self, **extra) -> str:
        lines = [json.dumps({**extra, **asdict(r)}) for r in self.records]
        return "".join(line + "\n" for line in lines)


# --------------------------------------------------------------------------
# geometry


def _cross(o, a, b) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    """Andrew's monotone chain on integer points; counter-clockwise, no collinear vertices."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _coords(pixels) -> tuple[np.ndarray, np.ndarray]:
    m = as_mask(pixels)
    ys, xs = np.nonzero(m)
    if len(ys) == 0:
        raise ValueError("pixel set is empty")
    return ys, xs


def _square_corners(ys: np.ndarray, xs: np.ndarray) -> list[tuple[int, int]]:
    # hull of all pixel squares = hull of the outer corners of each row's extreme pixels
    rows, first = np.unique(ys, return_index=True)
    last = np.append(first[1:], len(ys)) - 1
    lo, hi = xs[first], xs[last] + 1
    pts = []
    for y, a, b in zip(rows.tolist(), lo.tolist(), hi.tolist()):
        pts += [(a, y), (a, y + 1), (b, y), (b, y + 1)]
    return pts


def _canonical(center, ext_u: float, ext_v: float, angle: float) -> RotatedRect:
    if ext_u < ext_v:
        ext_u, ext_v, angle = ext_v, ext_u, angle + 90.0
    angle %= 180.0
    if angle > 180.0 - 1e-9:
        angle = 0.0
    return RotatedRect((float(center[0]), float(center[1])), (float(ext_u), float(ext_v)), float(angle))


def _fit_in_frame(points: np.ndarray, angle: float) -> RotatedRect:
    """Tightest rectangle around ``points`` with a side at ``angle`` degrees."""
    t = math.radians(angle)
    u = np.array([math.cos(t), math.sin(t)])
    v = np.array([-u[1], u[0]])
    pu, pv = points @ u, points @ v
    center = (pu.max() + pu.min()) / 2 * u + (pv.max() + pv.min()) / 2 * v
    return _canonical(center, pu.max() - pu.min(), pv.max() - pv.min(), angle)


def _rect_from_coords(ys: np.ndarray, xs: np.ndarray) -> RotatedRect:
    hull = np.array(convex_hull(_square_corners(ys, xs)), dtype=np.float64)
    edges = np.roll(hull, -1, axis=0) - hull
    u = edges / np.hypot(edges[:, 0], edges[:, 1])[:, None]
    v = np.stack([-u[:, 1], u[:, 0]], axis=1)
    # the optimal rectangle has a side collinear with some hull edge
    pu = u @ hull.T
    pv = v @ hull.T
    areas = (pu.max(axis=1) - pu.min(axis=1)) * (pv.max(axis=1) - pv.min(axis=1))

    best = None
    for k in np.flatnonzero(areas <= areas.min() * (1 + 1e-12)):
        cand = _fit_in_frame(hull, math.degrees(math.atan2(u[k, 1], u[k, 0])))
        if best is None or cand.angle < best.angle:
            best = cand
    return best


def snap_rect(ys: np.ndarray, xs: np.ndarray, rect: RotatedRect) -> RotatedRect:
    """Shrink ``rect`` onto the pixel centres it encloses, keeping its orientation.

    Rasterizing this by centre inclusion reproduces a solid rectangle exactly,
    and the result always lies inside ``rect``.
    """
    centres = np.stack([xs + 0.5, ys + 0.5], axis=1).astype(np.float64)
    return _fit_in_frame(centres, rect.angle)


def min_area_rect(pixels) -> RotatedRect:
    """Minimum-area rotated rectangle enclosing the unit squares of a pixel set."""
    return _rect_from_coords(*_coords(pixels))


def rectangularity(pixels) -> float:
    """Pixel count over the area of the minimum-area enclosing rectangle."""
    ys, xs = _coords(pixels)
    return min(1.0, len(ys) / _rect_from_coords(ys, xs).area)


# --------------------------------------------------------------------------
# rectification


def _rectify_coords(ys, xs, shape, cfg: RectifyConfig, label: int):
    """Rectify one component given its pixel coordinates.

    Returns ``(window, patch, record)``; ``patch`` is the output restricted
    to ``window = (y0, y1, x0, x1)`` and is all-false outside it.
    """
    area = len(ys)
    rect = _rect_from_coords(ys, xs)
    score = min(1.0, area / rect.area)
    if area < cfg.min_component_area:
        return None, None, ComponentRecord(label, area, score, "removed", 0)

    if score >= cfg.rect_threshold:
        snapped = snap_rect(ys, xs, rect)
        window = snapped._pixel_window(shape)
        y0, y1, x0, x1 = window
        patch = snapped._inside(y0, y1, x0, x1)
        return window, patch, ComponentRecord(label, area, score, "snapped", int(patch.sum()))

    y0, y1 = int(ys.min()), int(ys.max()) + 1
    x0, x1 = int(xs.min()), int(xs.max()) + 1
    comp = np.zeros((y1 - y0, x1 - x0), dtype=bool)
    comp[ys - y0, xs - x0] = True
    core = opening(comp, make_se("line", cfg.line_se_length, rect.angle))
    core |= opening(comp, make_se("line", cfg.line_se_length, rect.angle + 90.0))
    if not core.any():
        core = comp
    return (y0, y1, x0, x1), core, ComponentRecord(label, area, score, "kept", int(core.sum()))


def rectify_component(component, cfg: RectifyConfig | None = None, label: int = 1):
    """Remove, snap or trim a single component mask; returns ``(mask, record)``."""
    cfg = cfg or RectifyConfig()
    m = as_mask(component)
    ys, xs = _coords(m)
    out = np.zeros_like(m)
    window, patch, record = _rectify_coords(ys, xs, m.shape, cfg, label)
    if window is not None:
        y0, y1, x0, x1 = window
        out[y0:y1, x0:x1] |= patch
    return out, record


def rectify_mask(mask, cfg: RectifyConfig | None = None) -> tuple[np.ndarray, RectifyTrace]:
    cfg = cfg or RectifyConfig()
    m = as_mask(mask)
    se = make_se("square", cfg.denoise_se_size)
    cleaned = closing(opening(m, se), se)
    lab = connected_components(cleaned, 8)

    out = np.zeros_like(m)
    trace = RectifyTrace()
    if lab.count == 0:
        return out, trace
    ys, xs = np.nonzero(lab.labels)
    ids = lab.labels[ys, xs]
    order = np.argsort(ids, kind="stable")
    ys, xs, ids = ys[order], xs[order], ids[order]
    bounds = np.searchsorted(ids, np.arange(1, lab.count + 2))
    for label in range(1, lab.count + 1):
        a, b = bounds[label - 1], bounds[label]
        window, patch, record = _rectify_coords(ys[a:b], xs[a:b], m.shape, cfg, label)
        trace.records.append(record)
        if window is not None:
            y0, y1, x0, x1 = window
            out[y0:y1, x0:x1] |= patch
    return out, trace
