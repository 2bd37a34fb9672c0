import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fundusgrade.raster import (
    BinaryMask,
    GrayRaster,
    RgbRaster,
    count_nonzero,
    extract_channel,
    invert,
    mask_from_bool,
    resize_bilinear,
    subtract_saturating,
    threshold,
)

gray_images = arrays(
    np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12)), elements=st.integers(0, 255)
)


def rgb(data) -> RgbRaster:
    return RgbRaster(np.array(data, dtype=np.uint8))


def gray(data) -> GrayRaster:
    return GrayRaster(np.array(data, dtype=np.uint8))


class TestRasterTypes:
    def test_rgb_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            RgbRaster(np.zeros((4, 4), dtype=np.uint8))

    def test_gray_rejects_wrong_dtype(self):
        with pytest.raises(ValueError):
            GrayRaster(np.zeros((4, 4), dtype=np.float64))

    def test_mask_rejects_intermediate_values(self):
        with pytest.raises(ValueError):
            BinaryMask(np.full((2, 2), 7, dtype=np.uint8))

    def test_zero_dims_rejected(self):
        with pytest.raises(ValueError):
            GrayRaster(np.zeros((0, 3), dtype=np.uint8))


class TestExtractChannel:
    def test_single_pixel_green(self):
        img = rgb([[[10, 200, 30]]])
        assert extract_channel(img, "G").pixels[0, 0] == 200

    def test_single_pixel_red(self):
        img = rgb([[[10, 200, 30]]])
        assert extract_channel(img, "R").pixels[0, 0] == 10

    def test_blue_matches_index_arithmetic_oracle(self):
        rs = np.random.RandomState(0)
        data = rs.randint(0, 256, size=(2, 2, 3), dtype=np.uint8)
        img = RgbRaster(data)
        out = extract_channel(img, "B")
        # oracle: walk the flat triple sequence and take every third sample
        flat = data.reshape(-1, 3)
        expected = np.array([triple[2] for triple in flat]).reshape(2, 2)
        assert np.array_equal(out.pixels, expected)

    def test_preserves_dims(self):
        img = RgbRaster(np.zeros((5, 9, 3), dtype=np.uint8))
        for ch in "RGB":
            out = extract_channel(img, ch)
            assert (out.height, out.width) == (5, 9)

    def test_bad_channel_rejected(self):
        with pytest.raises(ValueError):
            extract_channel(rgb([[[1, 2, 3]]]), "X")


class TestResize:
    def test_identity_when_dims_match(self):
        rs = np.random.RandomState(1)
        img = RgbRaster(rs.randint(0, 256, size=(7, 5, 3), dtype=np.uint8))
        out = resize_bilinear(img, 5, 7)
        assert np.array_equal(out.pixels, img.pixels)

    def test_2x2_to_1x1_averages(self):
        img = gray([[0, 0], [100, 100]])
        out = resize_bilinear(img, 1, 1)
        assert out.pixels[0, 0] == 50

    def test_constant_image_stays_constant(self):
        img = GrayRaster(np.full((4, 6), 77, dtype=np.uint8))
        out = resize_bilinear(img, 13, 3)
        assert (out.pixels == 77).all()
        assert (out.height, out.width) == (3, 13)

    def test_zero_target_rejected(self):
        with pytest.raises(ValueError):
            resize_bilinear(gray([[1]]), 0, 4)

    @given(gray_images)
    def test_resize_to_self_is_identity(self, data):
        img = GrayRaster(data)
        out = resize_bilinear(img, img.width, img.height)
        assert np.array_equal(out.pixels, img.pixels)


class TestThreshold:
    def test_strictly_greater(self):
        img = gray([[236, 235]])
        mask = threshold(img, 235)
        assert mask.pixels.tolist() == [[255, 0]]

    def test_zero_threshold_on_zero_image(self):
        mask = threshold(GrayRaster(np.zeros((3, 3), dtype=np.uint8)), 0)
        assert count_nonzero(mask) == 0

    def test_random_matches_per_pixel_oracle(self):
        rs = np.random.RandomState(2)
        data = rs.randint(0, 256, size=(4, 4), dtype=np.uint8)
        mask = threshold(GrayRaster(data), 128)
        for y in range(4):
            for x in range(4):
                assert mask.pixels[y, x] == (255 if data[y, x] > 128 else 0)

    @given(gray_images, st.integers(0, 255), st.integers(0, 255))
    def test_monotone_in_threshold(self, data, t1, t2):
        t1, t2 = min(t1, t2), max(t1, t2)
        img = GrayRaster(data)
        high = threshold(img, t2).as_bool()
        low = threshold(img, t1).as_bool()
        assert (high <= low).all()  # set pixels at t2 are a subset of t1's


class TestInvert:
    def test_small_values(self):
        assert invert(gray([[0]])).pixels[0, 0] == 255
        assert invert(gray([[10, 200]])).pixels.tolist() == [[245, 55]]

    @given(gray_images)
    def test_involution(self, data):
        img = GrayRaster(data)
        assert np.array_equal(invert(invert(img)).pixels, img.pixels)


class TestSubtractSaturating:
    def test_equal_images_give_zero(self):
        img = gray([[5, 9], [1, 3]])
        assert (subtract_saturating(img, img).pixels == 0).all()

    def test_saturates_at_zero(self):
        assert subtract_saturating(gray([[10]]), gray([[200]])).pixels[0, 0] == 0

    def test_random_matches_clamped_difference_oracle(self):
        rs = np.random.RandomState(3)
        a = rs.randint(0, 256, size=(6, 6), dtype=np.uint8)
        b = rs.randint(0, 256, size=(6, 6), dtype=np.uint8)
        out = subtract_saturating(GrayRaster(a), GrayRaster(b))
        expected = np.array(
            [[max(int(a[y, x]) - int(b[y, x]), 0) for x in range(6)] for y in range(6)]
        )
        assert np.array_equal(out.pixels, expected)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            subtract_saturating(gray([[1]]), gray([[1, 2]]))

    @given(gray_images)
    def test_subtracting_zero_is_identity(self, data):
        img = GrayRaster(data)
        zero = GrayRaster(np.zeros_like(data))
        assert np.array_equal(subtract_saturating(img, zero).pixels, img.pixels)


class TestCountNonzero:
    def test_empty_mask(self):
        assert count_nonzero(BinaryMask(np.zeros((3, 3), dtype=np.uint8))) == 0

    def test_four_set_pixels(self):
        on = np.zeros((3, 3), dtype=bool)
        on[0, 0] = on[1, 1] = on[2, 2] = on[0, 2] = True
        assert count_nonzero(mask_from_bool(on)) == 4

    def test_random_matches_loop_oracle(self):
        rs = np.random.RandomState(4)
        on = rs.rand(8, 8) > 0.5
        mask = mask_from_bool(on)
        assert count_nonzero(mask) == sum(1 for v in mask.pixels.ravel() if v == 255)

    @given(gray_images, st.integers(0, 255))
    def test_count_nonincreasing_in_threshold(self, data, t):
        img = GrayRaster(data)
        if t < 255:
            assert count_nonzero(threshold(img, t + 1)) <= count_nonzero(threshold(img, t))
