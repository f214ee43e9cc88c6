"""Brute-force reference implementations used as independent test oracles.

Deliberately naive: per-pixel loops over plain Python data, no shared code
with the package under test.
"""

from __future__ import annotations

import math
from collections import deque
from fractions import Fraction


def to_lists(mask):
    return [[bool(v) for v in row] for row in mask]


def iou_fraction(pred, gt) -> Fraction:
    inter = union = 0
    for prow, grow in zip(to_lists(pred), to_lists(gt)):
        for p, g in zip(prow, grow):
            inter += p and g
            union += p or g
    return Fraction(1) if union == 0 else Fraction(inter, union)


def min_sq_dist(mask):
    """Per-pixel squared distance to the nearest background pixel, including
    the one-pixel ring outside the image; 0 on background."""
    m = to_lists(mask)
    h, w = len(m), len(m[0])
    bg = [(y, x) for y in range(-1, h + 1) for x in range(-1, w + 1)
          if not (0 <= y < h and 0 <= x < w) or not m[y][x]]
    out = [[0] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            if m[y][x]:
                out[y][x] = min((y - by) ** 2 + (x - bx) ** 2 for by, bx in bg)
    return out


def band_from_dist(mask, dist, d):
    return [[bool(v) and s <= d * d for v, s in zip(mrow, drow)] for mrow, drow in zip(to_lists(mask), dist)]


def band(mask, d):
    """Foreground pixels whose squared distance to background is <= d*d."""
    return band_from_dist(mask, min_sq_dist(mask), d)


def biou_fraction(pred, gt, d) -> Fraction:
    return iou_fraction(band(pred, d), band(gt, d))


def se_offsets(cells):
    h, w = len(cells), len(cells[0])
    return [(y - h // 2, x - w // 2) for y in range(h) for x in range(w) if cells[y][x]]


def erode(mask, cells):
    m = to_lists(mask)
    h, w = len(m), len(m[0])
    offs = se_offsets(to_lists(cells))

    def at(y, x):
        return 0 <= y < h and 0 <= x < w and m[y][x]

    return [[all(at(y + dy, x + dx) for dy, dx in offs) for x in range(w)] for y in range(h)]


def dilate(mask, cells):
    m = to_lists(mask)
    h, w = len(m), len(m[0])
    offs = se_offsets(to_lists(cells))

    def at(y, x):
        return 0 <= y < h and 0 <= x < w and m[y][x]

    return [[any(at(y - dy, x - dx) for dy, dx in offs) for x in range(w)] for y in range(h)]


def components(mask, connectivity):
    """BFS flood fill, labels in scan order of first pixel."""
    m = to_lists(mask)
    h, w = len(m), len(m[0])
    nbrs = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    if connectivity == 8:
        nbrs += [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    labels = [[0] * w for _ in range(h)]
    n = 0
    for y in range(h):
        for x in range(w):
            if m[y][x] and not labels[y][x]:
                n += 1
                labels[y][x] = n
                queue = deque([(y, x)])
                while queue:
                    cy, cx = queue.popleft()
                    for dy, dx in nbrs:
                        ny, nx = cy + dy, cx + dx
                        if 0 <= ny < h and 0 <= nx < w and m[ny][nx] and not labels[ny][nx]:
                            labels[ny][nx] = n
                            queue.append((ny, nx))
    return labels, n


def min_rect_area_sweep(pixels, step=0.1):
    """Smallest enclosing-rectangle area of the pixel squares over a sweep of angles."""
    corners = [(x + dx, y + dy) for y, x in pixels for dx in (0, 1) for dy in (0, 1)]
    best = math.inf
    best_angle = None
    steps = int(round(90 / step))
    for k in range(steps):
        t = math.radians(k * step)
        c, s = math.cos(t), math.sin(t)
        us = [px * c + py * s for px, py in corners]
        vs = [-px * s + py * c for px, py in corners]
        area = (max(us) - min(us)) * (max(vs) - min(vs))
        if area < best:
            best, best_angle = area, k * step
    return best, best_angle
