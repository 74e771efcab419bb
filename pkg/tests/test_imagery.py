import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wavefuse.errors import (
    DimensionMismatchError,
    ImageFormatError,
    TruncatedImageError,
    UnsupportedFormatError,
)
from wavefuse.imagery import (
    GrayImage,
    conform_pair,
    devectorize,
    load_image,
    save_image,
    to_unit_range,
    vectorize,
)


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_bytes(data)
    return p


class TestLoad:
    def test_p2_single_pixel(self, tmp_path):
        img = load_image(write(tmp_path, "a.pgm", b"P2\n1 1\n255\n255\n"))
        assert img.dims == (1, 1)
        assert img.pixels[0, 0] == 1.0

    def test_p5_bytes(self, tmp_path):
        img = load_image(write(tmp_path, "a.pgm", b"P5\n2 2\n255\n" + bytes([0, 255, 0, 255])))
        np.testing.assert_array_equal(vectorize(img), [0, 1, 0, 1])

    def test_p5_sixteen_bit_big_endian(self, tmp_path):
        img = load_image(write(tmp_path, "a.pgm", b"P5 2 1 65535 " + bytes([0xFF, 0xFF, 0x00, 0x00])))
        np.testing.assert_array_equal(img.pixels, [[1.0, 0.0]])

    def test_comments_after_magic(self, tmp_path):
        data = b"P2\n# made by hand\n3 1\n# another\n4\n0 2 4\n"
        img = load_image(write(tmp_path, "a.pgm", data))
        np.testing.assert_array_equal(img.pixels, [[0.0, 0.5, 1.0]])

    def test_width_is_columns(self, tmp_path):
        img = load_image(write(tmp_path, "a.pgm", b"P2 3 2 9 1 2 3 4 5 6"))
        assert img.dims == (2, 3)
        np.testing.assert_allclose(img.pixels[1], [4 / 9, 5 / 9, 6 / 9])

    def test_unsupported_magic(self, tmp_path):
        with pytest.raises(UnsupportedFormatError):
            load_image(write(tmp_path, "a.pam", b"P7\nWIDTH 1\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_image(tmp_path / "nope.pgm")

    def test_missing_header_field_named(self, tmp_path):
        with pytest.raises(ImageFormatError) as exc:
            load_image(write(tmp_path, "a.pgm", b"P5\n2 2\n"))
        assert exc.value.field == "maxval"
        assert "maxval" in str(exc.value)

    def test_malformed_width_names_offset(self, tmp_path):
        with pytest.raises(ImageFormatError) as exc:
            load_image(write(tmp_path, "a.pgm", b"P2\nxx 2\n255\n"))
        assert exc.value.field == "width"
        assert exc.value.offset == 3

    def test_truncated_raster(self, tmp_path):
        with pytest.raises(TruncatedImageError) as exc:
            load_image(write(tmp_path, "a.pgm", b"P5\n2 2\n255\n" + bytes([1, 2, 3])))
        assert exc.value.offset == 14

    def test_truncated_ascii_raster(self, tmp_path):
        with pytest.raises(TruncatedImageError):
            load_image(write(tmp_path, "a.pgm", b"P2\n2 2\n255\n1 2 3\n"))

    def test_maxval_out_of_range(self, tmp_path):
        with pytest.raises(ImageFormatError):
            load_image(write(tmp_path, "a.pgm", b"P2\n1 1\n70000\n1\n"))


class TestSave:
    def test_one_writes_255(self, tmp_path):
        p = tmp_path / "a.pgm"
        save_image(GrayImage([[1.0]]), p)
        assert p.read_bytes() == b"P5\n1 1\n255\n\xff"

    def test_negative_clamped(self, tmp_path):
        p = tmp_path / "a.pgm"
        save_image(GrayImage([[-0.3]]), p)
        assert p.read_bytes()[-1] == 0

    def test_non_finite_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            save_image(GrayImage([[np.nan]]), tmp_path / "a.pgm")

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(OSError):
            save_image(GrayImage([[0.5]]), tmp_path / "missing_dir" / "a.pgm")

    def test_round_trip_random(self, tmp_path, rng):
        x = GrayImage(rng.uniform(0, 1, (8, 8)))
        p = tmp_path / "a.pgm"
        save_image(x, p)
        assert np.abs(load_image(p).pixels - x.pixels).max() <= 1 / 255

    @settings(max_examples=30, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)),
                  elements=st.floats(-2, 2)))
    def test_round_trip_property(self, tmp_path_factory, px):
        p = tmp_path_factory.mktemp("rt") / "a.pgm"
        save_image(GrayImage(px), p)
        assert np.abs(load_image(p).pixels - np.clip(px, 0, 1)).max() <= 1 / 255 + 1e-12


class TestConform:
    def test_strict_equal_unchanged(self):
        a, b = GrayImage(np.zeros((4, 4))), GrayImage(np.ones((4, 4)))
        a2, b2 = conform_pair(a, b, "strict")
        assert a2 is a and b2 is b

    def test_center_crop_drops_outer_columns(self):
        wide = GrayImage(np.tile(np.arange(6.0), (4, 1)))
        a, b = conform_pair(wide, GrayImage(np.zeros((4, 4))), "center_crop")
        assert a.dims == b.dims == (4, 4)
        np.testing.assert_array_equal(a.pixels[0], [1, 2, 3, 4])

    def test_center_crop_odd_excess_biases_upper_left(self):
        tall = GrayImage(np.arange(5.0)[:, None] * np.ones((1, 2)))
        a, _ = conform_pair(tall, GrayImage(np.zeros((2, 2))), "center_crop")
        np.testing.assert_array_equal(a.pixels[:, 0], [1, 2])

    def test_strict_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            conform_pair(GrayImage(np.zeros((4, 6))), GrayImage(np.zeros((4, 4))), "strict")

    @given(st.integers(1, 9), st.integers(1, 9), st.integers(1, 9), st.integers(1, 9))
    def test_center_crop_dims_property(self, r1, c1, r2, c2):
        a, b = conform_pair(GrayImage(np.zeros((r1, c1))), GrayImage(np.zeros((r2, c2))), "center_crop")
        assert a.dims == b.dims
        assert a.rows <= min(r1, r2) and a.cols <= min(c1, c2)


class TestVectorize:
    def test_row_major(self):
        np.testing.assert_array_equal(vectorize(GrayImage([[1, 2], [3, 4]])), [1, 2, 3, 4])

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            devectorize([1, 2, 3], 2, 2)

    def test_round_trip_bit_identical(self, rng):
        x = GrayImage(rng.standard_normal((3, 5)))
        assert devectorize(vectorize(x), 3, 5) == x


def test_to_unit_range_bounds(rng):
    y = to_unit_range(GrayImage(rng.standard_normal((5, 7)) * 40))
    assert y.pixels.min() == 0.0 and y.pixels.max() == 1.0
    assert np.all(to_unit_range(GrayImage(np.full((2, 2), 3.0))).pixels == 0)


def test_gray_image_is_read_only():
    img = GrayImage(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        img.pixels[0, 0] = 1.0
