"""Binary morphology, connected components and boundary bands.

Everything here treats pixels outside the image as background. Angles are
in degrees in image coordinates (x to the right, y down), so a 90 degree
line is vertical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .raster import as_mask

SHAPES = ("square", "disk", "line")


@dataclass(frozen=True, eq=False)
class StructuringElement:
    shape: str
    size: int
    angle: float
    cells: np.ndarray

    @property
    def anchor(self) -> tuple[int, int]:
        return self.cells.shape[0] // 2, self.cells.shape[1] // 2

    def offsets(self) -> list[tuple[int, int]]:
        """(dy, dx) offsets of the true cells relative to the anchor."""
        ay, ax = self.anchor
        ys, xs = np.nonzero(self.cells)
        return [(int(y) - ay, int(x) - ax) for y, x in zip(ys, xs)]

    @property
    def radius(self) -> tuple[int, int]:
        return self.cells.shape[0] // 2, self.cells.shape[1] // 2


def _round_half_away(v: float) -> int:
    return int(math.copysign(math.floor(abs(v) + 0.5), v))


def _bresenham(x1: int, y1: int) -> list[tuple[int, int]]:
    """Cells of the segment from (0, 0) to (x1, y1)."""
    dx, dy = abs(x1), -abs(y1)
    sx, sy = (1 if x1 > 0 else -1), (1 if y1 > 0 else -1)
    err = dx + dy
    x = y = 0
    cells = [(0, 0)]
    while (x, y) != (x1, y1):
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy
        cells.append((x, y))
    return cells


def make_se(shape: str, size: int, angle: float = 0.0) -> StructuringElement:
    """Build a square (side ``size``), disk (radius ``size``) or line (length ``size``) SE.

    Line elements are the Bresenham rasterization of a segment centred on the
    anchor, mirrored so the kernel is point-symmetric.
    """
    if shape not in SHAPES:
        raise ValueError(f"unknown structuring element shape {shape!r}")
    size = int(size)
    if size < 1:
        raise ValueError("structuring element size must be >= 1")

    if shape == "square":
        if size % 2 == 0:
            raise ValueError("square side must be odd so the anchor is centred")
        cells = np.ones((size, size), dtype=bool)
        angle = 0.0
    elif shape == "disk":
        yy, xx = np.mgrid[-size : size + 1, -size : size + 1]
        cells = yy * yy + xx * xx <= size * size
        angle = 0.0
    else:
        angle = float(angle) % 180.0
        half = (size - 1) / 2.0
        theta = math.radians(angle)
        ex = _round_half_away(half * math.cos(theta))
        ey = _round_half_away(half * math.sin(theta))
        pts = _bresenham(ex, ey)
        rx, ry = abs(ex), abs(ey)
        cells = np.zeros((2 * ry + 1, 2 * rx + 1), dtype=bool)
        for x, y in pts:
            cells[ry + y, rx + x] = True
            cells[ry - y, rx - x] = True
    return StructuringElement(shape, size, angle, cells)


def erode(mask, se: StructuringElement) -> np.ndarray:
    """Pixel stays true iff every SE cell placed there lands on foreground."""
    m = as_mask(mask)
    ry, rx = se.radius
    h, w = m.shape
    padded = np.pad(m, ((ry, ry), (rx, rx)), constant_values=False)
    out = np.ones_like(m)
    for dy, dx in se.offsets():
        out &= padded[ry + dy : ry + dy + h, rx + dx : rx + dx + w]
    return out


def dilate(mask, se: StructuringElement) -> np.ndarray:
    """Pixel becomes true iff the reflected SE placed there hits foreground."""
    m = as_mask(mask)
    ry, rx = se.radius
    h, w = m.shape
    padded = np.pad(m, ((ry, ry), (rx, rx)), constant_values=False)
    out = np.zeros_like(m)
    for dy, dx in se.offsets():
        out |= padded[ry - dy : ry - dy + h, rx - dx : rx - dx + w]
    return out


def opening(mask, se: StructuringElement) -> np.ndarray:
    return dilate(erode(mask, se), se)


def closing(mask, se: StructuringElement) -> np.ndarray:
    """Dilate then erode.

    Evaluated on a canvas padded with background by the SE radius, so the
    dilation may spill past the border before the erosion; this keeps
    ``mask <= closing(mask)`` true at image edges.
    """
    m = as_mask(mask)
    ry, rx = se.radius
    canvas = np.pad(m, ((ry, ry), (rx, rx)), constant_values=False)
    closed = erode(dilate(canvas, se), se)
    return closed[ry : ry + m.shape[0], rx : rx + m.shape[1]]


# --------------------------------------------------------------------------
# connected components


@dataclass(frozen=True, eq=False)
class LabelMap:
    labels: np.ndarray
    count: int

    def pixels(self, label: int) -> np.ndarray:
        return self.labels == label


def _find(parent: list[int], i: int) -> int:
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        parent[i], i = root, parent[i]
    return root


def connected_components(mask, connectivity: int = 8) -> LabelMap:
    """Label foreground components with a run-based two-pass union-find.

    Labels are ``1..count`` in raster-scan order of each component's first
    pixel; background is 0.
    """
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    m = as_mask(mask)
    h, w = m.shape
    edges = np.diff(np.pad(m.astype(np.int8), ((0, 0), (1, 1))), axis=1)
    rows, starts = np.nonzero(edges == 1)
    _, ends = np.nonzero(edges == -1)
    n = len(rows)
    labels = np.zeros((h, w), dtype=np.int32)
    if n == 0:
        return LabelMap(labels, 0)

    # runs are row-major; row_first[r] .. row_first[r+1] index row r's runs
    row_first = np.searchsorted(rows, np.arange(h + 1))
    reach = 0 if connectivity == 4 else 1
    s_list, e_list = starts.tolist(), ends.tolist()
    parent = list(range(n))
    for r in range(1, h):
        i, i_end = int(row_first[r]), int(row_first[r + 1])
        j, j_end = int(row_first[r - 1]), int(row_first[r])
        while i < i_end and j < j_end:
            if s_list[i] < e_list[j] + reach and s_list[j] < e_list[i] + reach:
                a, b = _find(parent, i), _find(parent, j)
                if a != b:
                    parent[max(a, b)] = min(a, b)
            if e_list[i] < e_list[j]:
                i += 1
            elif e_list[j] < e_list[i]:
                j += 1
            else:
                i += 1
                j += 1

    # roots are always the smallest run index of their set, so first-seen
    # order of roots is scan order of components
    run_label = np.empty(n, dtype=np.int32)
    root_label: dict[int, int] = {}
    for k in range(n):
        root = _find(parent, k)
        if root not in root_label:
            root_label[root] = len(root_label) + 1
        run_label[k] = root_label[root]

    lengths = ends - starts
    flat_start = rows * w + starts
    offsets = np.arange(lengths.sum()) - np.repeat(np.cumsum(lengths) - lengths, lengths)
    labels.ravel()[np.repeat(flat_start, lengths) + offsets] = np.repeat(run_label, lengths)
    return LabelMap(labels, len(root_label))


# --------------------------------------------------------------------------
# distance transform


def _lower_envelope(f: np.ndarray) -> np.ndarray:
    """Exact 1-D squared distance transform along axis 1, all rows at once.

    Lower envelope of parabolas (Felzenszwalb & Huttenlocher), with the
    per-row stacks advanced in lockstep.
    """
    rows, n = f.shape
    fi = f.astype(np.float64)
    idx = np.arange(rows)
    k = np.zeros(rows, dtype=np.int64)
    v = np.zeros((rows, n), dtype=np.int64)
    z = np.empty((rows, n + 1), dtype=np.float64)
    z[:, 0] = -np.inf
    z[:, 1] = np.inf
    for q in range(1, n):
        fq = fi[:, q] + q * q
        vk = v[idx, k]
        s = (fq - (fi[idx, vk] + vk * vk)) / (2 * q - 2 * vk)
        pop = s <= z[idx, k]
        while pop.any():
            k[pop] -= 1
            vk = v[idx, k]
            s = np.where(pop, (fq - (fi[idx, vk] + vk * vk)) / (2 * q - 2 * vk), s)
            pop &= s <= z[idx, k]
        k += 1
        v[idx, k] = q
        z[idx, k] = s
        z[idx, k + 1] = np.inf

    out = np.empty((rows, n), dtype=np.int64)
    k[:] = 0
    for q in range(n):
        adv = z[idx, k + 1] < q
        while adv.any():
            k[adv] += 1
            adv &= z[idx, k + 1] < q
        vk = v[idx, k]
        out[:, q] = (q - vk) ** 2 + f[idx, vk]
    return out


def squared_distance_to_background(mask) -> np.ndarray:
    """Exact squared Euclidean distance from each pixel to the nearest background pixel.

    Background includes everything beyond the image border, so a foreground
    pixel on the edge is at distance 1. Background pixels get 0.
    """
    m = as_mask(mask)
    # the envelope pass loops over columns in python; keep that axis short
    transpose = m.shape[1] > m.shape[0]
    canvas = np.pad(m.T if transpose else m, 1, constant_values=False)
    h, w = canvas.shape
    g = np.zeros((h, w), dtype=np.int64)
    for i in range(1, h):
        g[i] = np.where(canvas[i], g[i - 1] + 1, 0)
    for i in range(h - 2, -1, -1):
        g[i] = np.minimum(g[i], g[i + 1] + 1)
    sq = _lower_envelope(g * g)
    if transpose:
        sq = sq.T
    return sq[1:-1, 1:-1]


def boundary_band(mask, d: float) -> np.ndarray:
    """Foreground pixels within Euclidean distance ``d`` of the background."""
    if d < 1:
        raise ValueError("band width must be >= 1")
    m = as_mask(mask)
    return m & (squared_distance_to_background(m) <= d * d)
