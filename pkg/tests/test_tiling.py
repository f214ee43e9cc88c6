import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from buildseg.errors import DimensionMismatchError
from buildseg.pipeline import TileGrid, extract_tiles, merge_tiles, plan_tiles
from buildseg.raster import PixelRect, crop


def coverage(grid):
    cov = np.zeros((grid.source_h, grid.source_w), dtype=int)
    for x, y, w, h in grid.tiles:
        cov[y : y + h, x : x + w] += 1
    return cov


@st.composite
def grids(draw, max_dim=64, max_tile=16):
    w = draw(st.integers(1, max_dim))
    h = draw(st.integers(1, max_dim))
    tile = draw(st.integers(1, min(w, h, max_tile)))
    overlap = draw(st.integers(0, tile - 1))
    return plan_tiles(w, h, tile, overlap)


class TestPlan:
    def test_single_tile(self):
        g = plan_tiles(500, 500, 500, 0)
        assert g.tiles == (PixelRect(0, 0, 500, 500),)

    def test_exact_division(self):
        g = plan_tiles(1000, 1000, 500, 0)
        assert [(t.x, t.y) for t in g.tiles] == [(0, 0), (500, 0), (0, 500), (500, 500)]

    def test_last_column_clamped(self):
        g = plan_tiles(750, 500, 500, 0)
        assert [(t.x, t.y) for t in g.tiles] == [(0, 0), (250, 0)]
        assert coverage(g).min() >= 1

    def test_overlap_stride(self):
        g = plan_tiles(10, 4, 4, 1)
        assert [t.x for t in g.tiles] == [0, 3, 6]

    def test_tile_too_large(self):
        with pytest.raises(ValueError):
            plan_tiles(400, 600, 500)
        with pytest.raises(ValueError):
            plan_tiles(600, 600, 500, 500)

    @settings(max_examples=300, deadline=None)
    @given(grids())
    def test_invariants(self, g):
        assert coverage(g).min() >= 1
        for t in g.tiles:
            assert t.w == t.h == g.tile_size
            assert 0 <= t.x and t.x + t.w <= g.source_w and 0 <= t.y and t.y + t.h <= g.source_h
        assert list(g.tiles) == sorted(g.tiles, key=lambda t: (t.y, t.x))

    def test_json_sidecar(self):
        g = plan_tiles(750, 500, 500)
        d = json.loads(g.to_json())
        assert d == {"source_w": 750, "source_h": 500, "tile_size": 500, "overlap": 0,
                     "tiles": [[0, 0, 500, 500], [250, 0, 500, 500]]}
        assert TileGrid.from_dict(d) == g


class TestExtractMerge:
    def test_extract_is_crop(self):
        r = np.arange(1000 * 1000, dtype=np.int64).reshape(1000, 1000)
        g = plan_tiles(1000, 1000, 500)
        tiles = extract_tiles(r, g)
        assert len(tiles) == 4
        for t, rect in zip(tiles, g.tiles):
            assert np.array_equal(t, crop(r, rect))

    def test_mismatched_grid(self):
        with pytest.raises(DimensionMismatchError):
            extract_tiles(np.zeros((10, 12)), plan_tiles(12, 12, 4))

    def test_tie_goes_to_foreground(self):
        g = TileGrid(1, 1, 1, 0, (PixelRect(0, 0, 1, 1),) * 2)
        assert merge_tiles([np.array([[0.4]]), np.array([[0.6]])], g).tolist() == [[True]]

    def test_low_mean_is_background(self):
        g = TileGrid(1, 1, 1, 0, (PixelRect(0, 0, 1, 1),) * 3)
        tiles = [np.array([[p]]) for p in (0.2, 0.2, 0.8)]
        # mean 0.4 < 0.5
        assert merge_tiles(tiles, g).tolist() == [[False]]

    def test_uint8_tiles_exact(self):
        g = TileGrid(1, 1, 1, 0, (PixelRect(0, 0, 1, 1),) * 2)
        # 127 + 128 = 255 = exactly half of 2 * 255
        assert merge_tiles([np.array([[127]], np.uint8), np.array([[128]], np.uint8)], g).tolist() == [[True]]
        assert merge_tiles([np.array([[127]], np.uint8), np.array([[127]], np.uint8)], g).tolist() == [[False]]

    def test_count_mismatch(self):
        g = plan_tiles(8, 8, 4)
        with pytest.raises(DimensionMismatchError):
            merge_tiles([np.zeros((4, 4))] * 3, g)
        with pytest.raises(DimensionMismatchError):
            merge_tiles([np.zeros((4, 5))] * 4, g)

    @settings(max_examples=200, deadline=None)
    @given(grids(), st.integers(0, 2**32 - 1), st.sampled_from(["bool", "uint8", "float"]))
    def test_round_trip(self, g, seed, kind):
        m = np.random.default_rng(seed).random((g.source_h, g.source_w)) < 0.5
        tiles = extract_tiles(m, g)
        if kind == "uint8":
            tiles = [np.where(t, 255, 0).astype(np.uint8) for t in tiles]
        elif kind == "float":
            tiles = [t.astype(float) for t in tiles]
        assert np.array_equal(merge_tiles(tiles, g), m)
