"""``buildseg`` command-line entry point.

Exit codes: 0 success, 2 usage error, 3 input parse/validation error,
4 I/O error. Diagnostics go to stderr; data goes to the files named by flags.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .errors import BuildSegError
from .metrics import EvalConfig, aggregate, pixel_tally, report_from_tally, report_to_csv, report_to_json
from .pipeline import (
    AugmentationConfig,
    Sample,
    SourceSpec,
    TileGrid,
    augment,
    build_manifest,
    extract_tiles,
    merge_tiles,
    plan_tiles,
    validate_manifest,
)
from .raster import NormSpec, fuse_channels, load_height_grid, load_image, load_mask, save_image, save_mask
from .rectify import RectifyConfig, rectify_mask

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_IO = 4

GRID_FILE = "grid.json"


class InputError(BuildSegError):
    pass


def _threads() -> int:
    raw = os.environ.get("BUILDSEG_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def _map(fn, items):
    """Apply ``fn`` to every item, returning ``(item, result, error)`` in input order."""
    def safe(item):
        try:
            return item, fn(item), None
        except (BuildSegError, ValueError, OSError) as exc:
            return item, None, exc

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return list(pool.map(safe, items))


def _pngs(directory) -> list[str]:
    return sorted(n for n in os.listdir(directory) if n.lower().endswith(".png"))


def _err(msg: str) -> None:
    print(f"buildseg: {msg}", file=sys.stderr)


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# --------------------------------------------------------------------------
# subcommands


def _read_pairs(path) -> list[tuple[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if rows and [c.strip().lower() for c in rows[0]] == ["pred", "gt"]:
        rows = rows[1:]
    if any(len(r) != 2 for r in rows):
        raise InputError(f"{path}: every pairs row needs exactly two columns (pred,gt)")
    return [(r[0].strip(), r[1].strip()) for r in rows]


def cmd_evaluate(args) -> int:
    cfg = EvalConfig(args.biou_ratio, args.agg)
    pred_names, gt_names = _pngs(args.pred), _pngs(args.gt)
    if args.pairs:
        pairs = _read_pairs(args.pairs)
    else:
        unmatched = sorted(set(pred_names) ^ set(gt_names))
        if unmatched:
            ids = ", ".join(Path(n).stem for n in unmatched)
            _err(f"error: prediction and ground-truth sets differ; unmatched ids: {ids}")
            return EXIT_INPUT
        pairs = [(n, n) for n in pred_names]
    if not pairs:
        _err("error: no PNG files to evaluate")
        return EXIT_INPUT

    def run(pair):
        pred = load_mask(os.path.join(args.pred, pair[0]))
        gt = load_mask(os.path.join(args.gt, pair[1]))
        return pixel_tally(pred, gt, cfg)

    results = _map(run, pairs)
    failures = [(p, e) for p, _, e in results if e is not None]
    done = [(p, t) for p, t, e in results if e is None]
    if done:
        reports = [report_from_tally(Path(p[0]).stem, t) for p, t in done]
        dataset = aggregate(reports, [t for _, t in done], args.agg, cfg)
        _write_text(args.out, report_to_json(dataset))
        if args.csv:
            _write_text(args.csv, report_to_csv(dataset.per_image))
    for pair, exc in failures:
        _err(f"error: {pair[0]}: {exc}")
    return EXIT_INPUT if failures else EXIT_OK


def cmd_postprocess(args) -> int:
    cfg = RectifyConfig(args.se_size, args.line_length, args.rect_threshold, args.min_area)
    names = _pngs(args.input)
    os.makedirs(args.out, exist_ok=True)

    def run(name):
        mask, trace = rectify_mask(load_mask(os.path.join(args.input, name)), cfg)
        save_mask(mask, os.path.join(args.out, name))
        return trace

    results = _map(run, names)
    if args.trace:
        lines = [t.to_jsonl(id=Path(n).stem) for n, t, e in results if e is None]
        _write_text(args.trace, "".join(lines))
    failures = [(n, e) for n, _, e in results if e is not None]
    for name, exc in failures:
        _err(f"error: {name}: {exc}")
    return EXIT_INPUT if failures else EXIT_OK


def cmd_tile(args) -> int:
    image = load_image(args.image)
    grid = plan_tiles(image.shape[1], image.shape[0], args.size, args.overlap)
    os.makedirs(args.out, exist_ok=True)
    for i, tile in enumerate(extract_tiles(image, grid)):
        save_image(tile, os.path.join(args.out, f"tile_{i:05d}.png"))
    _write_text(os.path.join(args.out, GRID_FILE), grid.to_json())
    return EXIT_OK


def cmd_merge(args) -> int:
    with open(args.grid, encoding="utf-8") as fh:
        try:
            grid = TileGrid.from_dict(json.load(fh))
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise InputError(f"{args.grid}: malformed tile grid ({exc})") from exc
    tiles = []
    for i in range(len(grid.tiles)):
        tile = load_image(os.path.join(args.tiles, f"tile_{i:05d}.png"))
        if tile.shape[2] != 1:
            raise InputError(f"tile {i}: probability tiles must be single-channel")
        tiles.append(tile[:, :, 0])
    save_mask(merge_tiles(tiles, grid), args.out)
    return EXIT_OK


def _norm(text: str) -> NormSpec:
    try:
        lo, hi = (float(v) for v in text.split(","))
        return NormSpec(lo, hi)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected LO,HI with HI > LO, got {text!r}") from exc


def cmd_fuse(args) -> int:
    fused = fuse_channels(load_image(args.image), load_height_grid(args.lidar), args.norm)
    save_image(fused, args.out)
    return EXIT_OK


def cmd_augment(args) -> int:
    data = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InputError(f"{args.config}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise InputError(f"{args.config}: expected a JSON object")
    data["seed"] = args.seed
    try:
        cfg = AugmentationConfig.from_dict(data)
    except TypeError as exc:
        raise InputError(f"invalid augmentation config ({exc})") from exc
    sample = Sample(load_image(args.image), load_mask(args.mask), Path(args.image).stem)
    out = augment(sample, cfg, args.index)
    os.makedirs(args.out, exist_ok=True)
    save_image(out.image, os.path.join(args.out, "image.png"))
    save_mask(out.mask, os.path.join(args.out, "mask.png"))
    return EXIT_OK


def _source(text: str) -> tuple[str, str]:
    name, sep, path = text.partition("=")
    if not sep or not name or not path:
        raise argparse.ArgumentTypeError(f"expected NAME=DIR, got {text!r}")
    return name, path


def cmd_manifest(args) -> int:
    manifest = build_manifest(SourceSpec(n, d, args.split) for n, d in args.source)
    _write_text(args.out, manifest.to_json())
    if args.validate:
        problems = validate_manifest(manifest)
        for p in problems:
            _err(f"violation: {p}")
        if problems:
            return EXIT_INPUT
    return EXIT_OK


# --------------------------------------------------------------------------


def _ratio(text: str) -> float:
    v = float(text)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError("must be in (0, 1]")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="buildseg", description="Building-mask evaluation and post-processing toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("evaluate", help="score predicted masks against ground truth")
    p.add_argument("--pred", required=True, metavar="DIR", help="directory of predicted mask PNGs")
    p.add_argument("--gt", required=True, metavar="DIR", help="directory of ground-truth mask PNGs")
    p.add_argument("--out", required=True, metavar="FILE", help="JSON report to write")
    p.add_argument("--biou-ratio", type=_ratio, default=0.02, metavar="R",
                   help="boundary band width as a fraction of the image diagonal (default 0.02)")
    p.add_argument("--agg", choices=("macro", "micro"), default="macro", help="dataset aggregation (default macro)")
    p.add_argument("--csv", metavar="FILE", help="also write per-image scores as CSV")
    p.add_argument("--pairs", metavar="FILE", help="CSV of pred,gt file names to pair instead of matching names")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("postprocess", help="rectangle-aware cleanup of predicted masks")
    p.add_argument("--in", dest="input", required=True, metavar="DIR", help="directory of mask PNGs")
    p.add_argument("--out", required=True, metavar="DIR", help="output directory")
    p.add_argument("--rect-threshold", type=_ratio, default=0.85, metavar="T",
                   help="rectangularity needed to snap a component (default 0.85)")
    p.add_argument("--se-size", type=_positive, default=3, metavar="N", help="denoising square side (default 3)")
    p.add_argument("--line-length", type=_positive, default=5, metavar="L", help="line SE length (default 5)")
    p.add_argument("--min-area", type=_positive, default=4, metavar="A",
                   help="components smaller than this are removed (default 4)")
    p.add_argument("--trace", metavar="FILE", help="write per-component JSON lines here")
    p.set_defaults(func=cmd_postprocess)

    p = sub.add_parser("tile", help="cut an image into fixed-size tiles")
    p.add_argument("--image", required=True, metavar="FILE", help="PNG to tile")
    p.add_argument("--out", required=True, metavar="DIR", help="directory for tiles and grid.json")
    p.add_argument("--size", type=_positive, default=500, help="tile side in pixels (default 500)")
    p.add_argument("--overlap", type=_nonneg, default=0, help="overlap between tiles in pixels (default 0)")
    p.set_defaults(func=cmd_tile)

    p = sub.add_parser("merge", help="stitch probability tiles into a mask")
    p.add_argument("--tiles", required=True, metavar="DIR", help="directory of tile_NNNNN.png probability tiles")
    p.add_argument("--grid", required=True, metavar="FILE", help="grid.json written by 'tile'")
    p.add_argument("--out", required=True, metavar="FILE", help="output mask PNG")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("fuse", help="append a LiDAR height channel to an RGB image")
    p.add_argument("--image", required=True, metavar="FILE", help="RGB PNG")
    p.add_argument("--lidar", required=True, metavar="FILE", help="ESRI ASCII height grid")
    p.add_argument("--out", required=True, metavar="FILE", help="output RGBH PNG")
    p.add_argument("--norm", type=_norm, default=NormSpec(), metavar="LO,HI",
                   help="height range mapped to 0..255 in meters (default 0,30)")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("augment", help="apply one seeded augmentation draw")
    p.add_argument("--image", required=True, metavar="FILE", help="image PNG")
    p.add_argument("--mask", required=True, metavar="FILE", help="mask PNG")
    p.add_argument("--out", required=True, metavar="DIR", help="directory for image.png and mask.png")
    p.add_argument("--seed", required=True, type=int, metavar="S", help="random seed")
    p.add_argument("--index", type=_nonneg, default=0, metavar="N", help="sample index within the seed stream")
    p.add_argument("--config", metavar="FILE", help="JSON with augmentation parameters")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("manifest", help="list image/mask pairs from one or more sources")
    p.add_argument("--source", required=True, action="append", type=_source, metavar="NAME=DIR",
                   help="source name and directory with images/ and masks/ (repeatable)")
    p.add_argument("--out", required=True, metavar="FILE", help="manifest JSON to write")
    p.add_argument("--split", default="train", help="split tag for all entries (default train)")
    p.add_argument("--validate", action="store_true", help="check files exist, parse and agree in size")
    p.set_defaults(func=cmd_manifest)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (BuildSegError, ValueError) as exc:
        _err(f"error: {exc}")
        return EXIT_INPUT
    except OSError as exc:
        _err(f"I/O error: {exc}")
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
