"""Image containers, rounding, and nearest-neighbor sampling."""

import numpy as np
import pytest

from layercast.images import (
    ColorImage,
    DepthImage,
    round_half_up,
    sample_color,
    sample_depth,
)


class TestRoundHalfUp:
    def test_ties_go_up(self):
        values = np.array([0.5, 1.5, 2.5, -0.5, -1.5])
        assert np.array_equal(round_half_up(values), [1, 2, 3, 0, -1])

    def test_plain_rounding(self):
        assert np.array_equal(round_half_up(np.array([0.49, 0.51, 2.0])), [0, 1, 2])

    def test_returns_int64(self):
        assert round_half_up(np.array([1.2])).dtype == np.int64


class TestDepthImage:
    def test_rejects_negative_values(self):
        with pytest.raises(ValueError):
            DepthImage(np.array([[0.5, -0.001]]))

    def test_rejects_wrong_rank(self):
        with pytest.raises(ValueError):
            DepthImage(np.zeros((2, 2, 2)))

    def test_zero_means_missing_and_is_allowed(self):
        img = DepthImage(np.array([[0.0, 1.5]]))
        assert img.width == 2 and img.height == 1

    def test_converts_to_float64(self):
        img = DepthImage(np.array([[1, 2]], dtype=np.int32))
        assert img.data.dtype == np.float64


class TestColorImage:
    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            ColorImage(np.zeros((4, 4), dtype=np.uint8))
        with pytest.raises(ValueError):
            ColorImage(np.zeros((4, 4, 4), dtype=np.uint8))

    def test_rejects_wrong_dtype(self):
        with pytest.raises(ValueError):
            ColorImage(np.zeros((4, 4, 3), dtype=np.float64))

    def test_dimensions(self):
        img = ColorImage(np.zeros((4, 6, 3), dtype=np.uint8))
        assert (img.width, img.height) == (6, 4)


class TestSampling:
    def setup_method(self):
        depth = np.arange(12, dtype=np.float64).reshape(3, 4) + 1.0
        depth[1, 2] = 0.0  # a dropped measurement
        self.depth = DepthImage(depth)
        color = np.arange(36, dtype=np.uint8).reshape(3, 4, 3)
        self.color = ColorImage(color)

    def test_nearest_neighbor_rounding(self):
        # u=1.49 rounds to column 1; u=1.5 rounds to column 2 (row 0).
        assert sample_depth(self.depth, 1.49, 0.0) == 2.0
        assert sample_depth(self.depth, 1.5, 0.0) == 3.0
        assert sample_depth(self.depth, 0.0, 1.49) == 5.0

    def test_outside_image_returns_none(self):
        assert sample_depth(self.depth, -0.51, 0.0) is None
        assert sample_depth(self.depth, 3.5, 0.0) is None
        assert sample_color(self.color, 0.0, 2.5) is None

    def test_missing_depth_returns_none(self):
        assert sample_depth(self.depth, 2.0, 1.0) is None

    def test_color_triple(self):
        assert sample_color(self.color, 1.0, 2.0) == (27, 28, 29)

    def test_half_pixel_border_included(self):
        assert sample_depth(self.depth, -0.5, -0.5) == 1.0
        assert sample_color(self.color, 3.49, 2.49) == (33, 34, 35)
