"""IOU, boundary IOU and dataset-level aggregation."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError
from .morphology import boundary_band
from .raster import as_mask

REPORT_DECIMALS = 4
AGGREGATIONS = ("macro", "micro")


@dataclass(frozen=True)
class EvalConfig:
    """``biou_ratio`` is the band width as a fraction of the image diagonal."""

    biou_ratio: float = 0.02
    aggregation: str = "macro"

    def __post_init__(self):
        if not 0 < self.biou_ratio <= 1:
            raise ValueError(f"biou_ratio must be in (0, 1], got {self.biou_ratio}")
        if self.aggregation not in AGGREGATIONS:
            raise ValueError(f"aggregation must be one of {AGGREGATIONS}")

    def band_width(self, width: int, height: int) -> int:
        return max(1, math.floor(self.biou_ratio * math.hypot(width, height) + 0.5))


@dataclass(frozen=True)
class PixelTally:
    """Intersection/union pixel counts for IOU and for the boundary bands."""

    inter: int
    union: int
    band_inter: int
    band_union: int


@dataclass(frozen=True)
class EvalReport:
    image_id: str
    iou: float
    biou: float
    averaged: float


@dataclass(frozen=True)
class DatasetReport:
    per_image: list[EvalReport]
    mean_iou: float
    mean_biou: float
    mean_averaged: float
    mode: str = "macro"
    config: EvalConfig = field(default_factory=EvalConfig)


def round_score(x: float, decimals: int = REPORT_DECIMALS) -> float:
    """Round half-even on the shortest decimal form of ``x`` (0.70435 -> 0.7044)."""
    q = Decimal(1).scaleb(-decimals)
    return float(Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_EVEN))


def _ratio(inter: int, union: int) -> float:
    return 1.0 if union == 0 else inter / union


def _check_pair(pred, gt) -> tuple[np.ndarray, np.ndarray]:
    p, g = as_mask(pred), as_mask(gt)
    if p.shape != g.shape:
        raise DimensionMismatchError(f"prediction {p.shape} and ground truth {g.shape} differ in size")
    return p, g


def _counts(a: np.ndarray, b: np.ndarray) -> tuple[int, int]:
    return int(np.count_nonzero(a & b)), int(np.count_nonzero(a | b))


def iou_counts(pred, gt) -> tuple[int, int]:
    return _counts(*_check_pair(pred, gt))


def iou(pred, gt) -> float:
    """Intersection over union; two empty masks score 1.0."""
    return _ratio(*iou_counts(pred, gt))


def _band_width(shape, cfg: EvalConfig | None, d: float | None) -> float:
    if d is not None:
        return d
    cfg = cfg or EvalConfig()
    return cfg.band_width(shape[1], shape[0])


def boundary_counts(pred, gt, cfg: EvalConfig | None = None, *, d: float | None = None) -> tuple[int, int]:
    p, g = _check_pair(pred, gt)
    width = _band_width(p.shape, cfg, d)
    return _counts(boundary_band(p, width), boundary_band(g, width))


def boundary_iou(pred, gt, cfg: EvalConfig | None = None, *, d: float | None = None) -> float:
    """IOU of the two masks' inner boundary bands.

    The band width comes from ``cfg`` (a fraction of the image diagonal,
    at least one pixel) unless ``d`` is given explicitly.
    """
    return _ratio(*boundary_counts(pred, gt, cfg, d=d))


def averaged_score(iou_score: float, biou_score: float) -> float:
    for v in (iou_score, biou_score):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"score {v} outside [0, 1]")
    return (iou_score + biou_score) / 2


def pixel_tally(pred, gt, cfg: EvalConfig | None = None) -> PixelTally:
    p, g = _check_pair(pred, gt)
    return PixelTally(*_counts(p, g), *boundary_counts(p, g, cfg))


def report_from_tally(image_id: str, tally: PixelTally) -> EvalReport:
    i = _ratio(tally.inter, tally.union)
    b = _ratio(tally.band_inter, tally.band_union)
    return EvalReport(image_id, i, b, averaged_score(i, b))


def evaluate_pair(pred, gt, cfg: EvalConfig | None = None, image_id: str = "") -> EvalReport:
    return report_from_tally(image_id, pixel_tally(pred, gt, cfg))


def aggregate(
    reports: Sequence[EvalReport],
    pixel_totals: Sequence[PixelTally] | None = None,
    mode: str = "macro",
    config: EvalConfig | None = None,
) -> DatasetReport:
    """Combine per-image reports.

    ``macro`` averages the per-image scores; ``micro`` divides summed pixel
    tallies, which must then be supplied in the same order as ``reports``.
    Entries are ordered by image id in the result.
    """
    if not reports:
        raise ValueError("cannot aggregate an empty report list")
    if mode not in AGGREGATIONS:
        raise ValueError(f"unknown aggregation mode {mode!r}")
    config = config or EvalConfig(aggregation=mode)
    order = sorted(range(len(reports)), key=lambda k: reports[k].image_id)
    per_image = [reports[k] for k in order]

    if mode == "macro":
        n = len(per_image)
        mean_iou = math.fsum(r.iou for r in per_image) / n
        mean_biou = math.fsum(r.biou for r in per_image) / n
        mean_avg = math.fsum(r.averaged for r in per_image) / n
    else:
        if pixel_totals is None:
            raise ValueError("micro aggregation needs pixel tallies")
        if len(pixel_totals) != len(reports):
            raise ValueError("one pixel tally per report is required")
        mean_iou = _ratio(sum(t.inter for t in pixel_totals), sum(t.union for t in pixel_totals))
        mean_biou = _ratio(sum(t.band_inter for t in pixel_totals), sum(t.band_union for t in pixel_totals))
        mean_avg = (mean_iou + mean_biou) / 2
    return DatasetReport(per_image, mean_iou, mean_biou, mean_avg, mode, config)


# --------------------------------------------------------------------------
# serialization


def report_to_dict(report: DatasetReport) -> dict:
    return {
        "config": {"biou_ratio": report.config.biou_ratio, "aggregation": report.mode},
        "per_image": [
            {
                "id": r.image_id,
                "iou": round_score(r.iou),
                "biou": round_score(r.biou),
                "averaged": round_score(r.averaged),
            }
            for r in report.per_image
        ],
        "summary": {
            "mean_iou": round_score(report.mean_iou),
            "mean_biou": round_score(report.mean_biou),
            "mean_averaged": round_score(report.mean_averaged),
            "mode": report.mode,
        },
    }


def report_to_json(report: DatasetReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def report_from_dict(data: dict) -> DatasetReport:
    cfg = data["config"]
    summary = data["summary"]
    per_image = [EvalReport(e["id"], e["iou"], e["biou"], e["averaged"]) for e in data["per_image"]]
    return DatasetReport(
        per_image,
        summary["mean_iou"],
        summary["mean_biou"],
        summary["mean_averaged"],
        summary["mode"],
        EvalConfig(cfg["biou_ratio"], cfg["aggregation"]),
    )


def report_to_csv(reports: Iterable[EvalReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "iou", "biou", "averaged"])
    for r in reports:
        writer.writerow([r.image_id, round_score(r.iou), round_score(r.biou), round_score(r.averaged)])
    return buf.getvalue()
