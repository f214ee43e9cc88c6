import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from buildseg.morphology import (
    boundary_band,
    closing,
    connected_components,
    dilate,
    erode,
    make_se,
    opening,
    squared_distance_to_background,
)

masks = arrays(bool, st.tuples(st.integers(1, 16), st.integers(1, 16)))

SES = [
    ("square", 1, 0), ("square", 3, 0), ("square", 5, 0),
    ("disk", 1, 0), ("disk", 2, 0),
    ("line", 5, 0), ("line", 5, 45), ("line", 5, 90), ("line", 7, 30), ("line", 4, 120),
]


class TestMakeSE:
    def test_square(self):
        assert make_se("square", 3).cells.tolist() == [[True] * 3] * 3

    def test_disk_radius_one_is_cross(self):
        assert make_se("disk", 1).cells.astype(int).tolist() == [[0, 1, 0], [1, 1, 1], [0, 1, 0]]

    def test_horizontal_line(self):
        assert make_se("line", 5, 0).cells.shape == (1, 5)
        assert make_se("line", 5, 0).cells.all()

    def test_vertical_line(self):
        assert make_se("line", 5, 90).cells.shape == (5, 1)

    @pytest.mark.parametrize("shape,size,angle", SES)
    def test_odd_and_anchor_true(self, shape, size, angle):
        se = make_se(shape, size, angle)
        h, w = se.cells.shape
        assert h % 2 == 1 and w % 2 == 1
        assert se.cells[se.anchor]
        # point symmetric, so reflection does not matter
        assert np.array_equal(se.cells, se.cells[::-1, ::-1])

    @pytest.mark.parametrize("r", [1, 2, 3, 5])
    def test_disk_membership(self, r):
        cells = make_se("disk", r).cells
        for y in range(2 * r + 1):
            for x in range(2 * r + 1):
                assert cells[y, x] == ((y - r) ** 2 + (x - r) ** 2 <= r * r)

    def test_size_zero(self):
        with pytest.raises(ValueError):
            make_se("square", 0)


class TestErodeDilate:
    def test_erode_3x3_block(self):
        out = erode(np.ones((3, 3), bool), make_se("square", 3))
        assert out.astype(int).tolist() == [[0, 0, 0], [0, 1, 0], [0, 0, 0]]

    def test_dilate_center_pixel(self):
        m = np.zeros((5, 5), bool)
        m[2, 2] = True
        expected = np.zeros((5, 5), bool)
        expected[1:4, 1:4] = True
        assert np.array_equal(dilate(m, make_se("square", 3)), expected)

    def test_identity_and_constant_masks(self):
        rng = np.random.default_rng(3)
        m = rng.random((9, 7)) < 0.5
        one = make_se("square", 1)
        assert np.array_equal(erode(m, one), m)
        assert np.array_equal(dilate(m, one), m)
        se = make_se("disk", 2)
        assert not erode(np.zeros((6, 6), bool), se).any()
        assert dilate(np.ones((6, 6), bool), se).all()

    @settings(max_examples=60, deadline=None)
    @given(masks, st.sampled_from(SES))
    def test_against_brute_force(self, m, se_args):
        se = make_se(*se_args)
        assert erode(m, se).tolist() == oracles.erode(m, se.cells)
        assert dilate(m, se).tolist() == oracles.dilate(m, se.cells)


class TestOpenClose:
    def test_open_removes_isolated_pixel(self):
        m = np.zeros((7, 7), bool)
        m[3, 3] = True
        assert not opening(m, make_se("square", 3)).any()

    def test_close_fills_hole(self):
        m = np.ones((3, 3), bool)
        m[1, 1] = False
        assert closing(m, make_se("square", 3)).all()
        canvas = np.zeros((7, 7), bool)
        canvas[2:5, 2:5] = m
        expected = np.zeros((7, 7), bool)
        expected[2:5, 2:5] = True
        assert np.array_equal(closing(canvas, make_se("square", 3)), expected)

    def test_constant_fixed_points(self):
        se = make_se("square", 5)
        assert not opening(np.zeros((8, 8), bool), se).any()
        assert closing(np.ones((8, 8), bool), se).all()

    @settings(max_examples=80, deadline=None)
    @given(masks, st.sampled_from(SES))
    def test_algebra(self, m, se_args):
        se = make_se(*se_args)
        o, c = opening(m, se), closing(m, se)
        assert not (o & ~m).any()
        assert not (m & ~c).any()
        assert np.array_equal(opening(o, se), o)
        assert np.array_equal(closing(c, se), c)

    @settings(max_examples=60, deadline=None)
    @given(masks, st.sampled_from(SES), st.integers(0, 2**32 - 1))
    def test_monotone(self, m, se_args, seed):
        se = make_se(*se_args)
        bigger = m | (np.random.default_rng(seed).random(m.shape) < 0.3)
        assert not (erode(m, se) & ~erode(bigger, se)).any()
        assert not (dilate(m, se) & ~dilate(bigger, se)).any()


class TestComponents:
    def test_diagonal_pair(self):
        m = np.array([[1, 0], [0, 1]], bool)
        assert connected_components(m, 4).count == 2
        assert connected_components(m, 8).count == 1

    def test_empty(self):
        lab = connected_components(np.zeros((3, 3), bool))
        assert lab.count == 0 and not lab.labels.any()

    def test_u_shape_merges_late(self):
        m = np.array([
            [1, 0, 1],
            [1, 0, 1],
            [1, 1, 1],
        ], bool)
        lab = connected_components(m, 4)
        assert lab.count == 1 and (lab.labels[m] == 1).all()

    def test_scan_order(self):
        m = np.array([
            [0, 0, 0, 1],
            [1, 0, 0, 1],
            [1, 0, 0, 0],
        ], bool)
        lab = connected_components(m, 8)
        assert lab.labels[0, 3] == 1 and lab.labels[1, 0] == 2

    @settings(max_examples=150, deadline=None)
    @given(arrays(bool, st.tuples(st.integers(1, 24), st.integers(1, 24))), st.sampled_from([4, 8]))
    def test_against_flood_fill(self, m, conn):
        labels, n = oracles.components(m, conn)
        lab = connected_components(m, conn)
        assert lab.count == n
        assert lab.labels.tolist() == labels


class TestBoundaryBand:
    def test_full_4x4(self):
        band = boundary_band(np.ones((4, 4), bool), 1)
        expected = np.ones((4, 4), bool)
        expected[1:3, 1:3] = False
        assert np.array_equal(band, expected)
        assert band.tolist() == oracles.band(np.ones((4, 4), bool), 1)

    def test_saturates(self):
        m = np.random.default_rng(0).random((10, 13)) < 0.6
        assert np.array_equal(boundary_band(m, np.hypot(10, 13)), m)

    def test_single_pixel(self):
        m = np.zeros((5, 5), bool)
        m[2, 2] = True
        assert np.array_equal(boundary_band(m, 1), m)

    def test_distance_on_large_block(self):
        m = np.zeros((40, 90), bool)
        m[5:35, 10:80] = True
        sq = squared_distance_to_background(m)
        ys, xs = np.mgrid[0:40, 0:90]
        # nearest background of an axis-aligned block is straight across an edge
        expected = np.minimum.reduce([ys - 4, 35 - ys, xs - 9, 80 - xs]) ** 2
        assert np.array_equal(sq[m], expected[m])

    @settings(max_examples=80, deadline=None)
    @given(masks, st.integers(1, 4))
    def test_against_brute_force(self, m, d):
        assert boundary_band(m, d).tolist() == oracles.band(m, d)

    @settings(max_examples=80, deadline=None)
    @given(masks, st.integers(1, 4))
    def test_equals_mask_minus_disk_erosion(self, m, d):
        expected = m & ~np.array(oracles.erode(m, make_se("disk", d).cells))
        assert np.array_equal(boundary_band(m, d), expected)
