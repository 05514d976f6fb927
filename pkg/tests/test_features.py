"""State construction: Lab histogram binning, tiny context, CTXF files."""

import struct

import numpy as np
import pytest

from retouchq import features
from retouchq.features import (
    ContextFeature,
    build_state,
    lab_histogram,
    load_context_feature,
    resize_bilinear,
    state_dim,
    tiny_context,
    working_copy,
    write_context_feature,
)


class TestLabHistogram:
    def test_bin_count_and_normalization(self, random_img):
        h = lab_histogram(random_img)
        assert h.shape == (8000,)
        assert h.min() >= 0.0
        assert abs(h.sum() - 1.0) < 1e-6

    def test_black_white_split(self):
        """Half black, half white: black -> L bin 0, a/b bin 10 each (value 0
        maps to floor(128 * 20/255) = 10); white -> L bin 19, same a/b bins.
        Flat indices 0*400 + 10*20 + 10 = 210 and 19*400 + 210 = 7810."""
        img = np.zeros((2, 2, 3), dtype=np.float32)
        img[0] = 0.0
        img[1] = 1.0
        h = lab_histogram(img)
        assert h[210] == pytest.approx(0.5)
        assert h[7810] == pytest.approx(0.5)
        assert h.sum() == pytest.approx(1.0)

    def test_uniform_image_single_bin(self):
        img = np.full((5, 5, 3), 0.5, dtype=np.float32)
        h = lab_histogram(img)
        # mid gray: L=53.39 -> bin 10; a=b=0 -> bin 10: index 10*400+10*20+10
        assert h[4210] == pytest.approx(1.0)

    def test_permutation_invariance(self, rng, random_img):
        h, w = random_img.shape[:2]
        flat = random_img.reshape(-1, 3)
        shuffled = flat[rng.permutation(len(flat))].reshape(h, w, 3)
        np.testing.assert_allclose(lab_histogram(random_img), lab_histogram(shuffled), atol=1e-7)

    def test_from_lab_matches(self, random_img):
        from retouchq.color import srgb_to_lab

        np.testing.assert_array_equal(
            lab_histogram(random_img),
            features.lab_histogram_from_lab(srgb_to_lab(random_img)),
        )


class TestResizeAndTinyContext:
    def test_identity_at_same_size(self, random_img):
        out = resize_bilinear(random_img, random_img.shape[0], random_img.shape[1])
        np.testing.assert_array_equal(out, random_img)

    def test_constant_image_stays_constant(self):
        img = np.full((30, 50, 3), 0.25, dtype=np.float32)
        out = resize_bilinear(img, 16, 16)
        np.testing.assert_allclose(out, 0.25, atol=1e-6)

    def test_downsample_preserves_mean_roughly(self, rng):
        img = rng.random((64, 64, 3), dtype=np.float32)
        out = resize_bilinear(img, 16, 16)
        assert abs(float(out.mean()) - float(img.mean())) < 0.05

    def test_tiny_context_dim(self, random_img):
        ctx = tiny_context(random_img)
        assert ctx.dim == 768  # 16 * 16 * 3
        assert ctx.source == "tiny"
        assert ctx.values.dtype == np.float32

    def test_tiny_context_of_16px_image_is_flatten(self, rng):
        img = rng.random((16, 16, 3), dtype=np.float32)
        np.testing.assert_array_equal(tiny_context(img).values, img.ravel())

    def test_working_copy_caps_max_side(self, rng):
        img = rng.random((100, 400, 3), dtype=np.float32)
        out = working_copy(img, max_side=256)
        assert max(out.shape[:2]) == 256
        assert out.shape == (64, 256, 3)  # aspect preserved

    def test_working_copy_small_image_untouched(self, random_img):
        assert working_copy(random_img, max_side=256) is random_img


class TestCtxfFile:
    def test_round_trip_bit_exact(self, tmp_path, rng):
        values = rng.standard_normal(4096).astype(np.float32)
        path = tmp_path / "img.ctxf"
        write_context_feature(path, values)
        loaded = load_context_feature(path)
        assert loaded.dim == 4096
        assert loaded.source == "external"
        np.testing.assert_array_equal(loaded.values, values)

    def test_layout_is_little_endian(self, tmp_path):
        path = tmp_path / "two.ctxf"
        write_context_feature(path, np.array([1.5, -2.0], dtype=np.float32))
        raw = path.read_bytes()
        assert raw[:4] == b"CTXF"
        version, dim = struct.unpack("<II", raw[4:12])
        assert (version, dim) == (1, 2)
        assert struct.unpack("<2f", raw[12:]) == (1.5, -2.0)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.ctxf"
        path.write_bytes(b"NOPE" + struct.pack("<II", 1, 1) + struct.pack("<f", 0.0))
        with pytest.raises(ValueError, match="magic"):
            load_context_feature(path)

    def test_unsupported_version(self, tmp_path):
        path = tmp_path / "v9.ctxf"
        path.write_bytes(b"CTXF" + struct.pack("<II", 9, 1) + struct.pack("<f", 0.0))
        with pytest.raises(ValueError, match="version"):
            load_context_feature(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "short.ctxf"
        path.write_bytes(b"CTXF" + struct.pack("<II", 1, 4) + struct.pack("<2f", 0.0, 1.0))
        with pytest.raises(ValueError, match="payload shorter than dim"):
            load_context_feature(path)

    def test_oversized_payload(self, tmp_path):
        path = tmp_path / "long.ctxf"
        path.write_bytes(b"CTXF" + struct.pack("<II", 1, 1) + struct.pack("<2f", 0.0, 1.0))
        with pytest.raises(ValueError, match="payload longer than dim"):
            load_context_feature(path)

    def test_zero_dim(self, tmp_path):
        path = tmp_path / "empty.ctxf"
        path.write_bytes(b"CTXF" + struct.pack("<II", 1, 0))
        with pytest.raises(ValueError, match="dim is zero"):
            load_context_feature(path)

    def test_non_finite_rejected(self, tmp_path):
        path = tmp_path / "inf.ctxf"
        path.write_bytes(b"CTXF" + struct.pack("<II", 1, 1) + struct.pack("<f", np.inf))
        with pytest.raises(ValueError, match="non-finite"):
            load_context_feature(path)

    def test_write_rejects_non_finite(self, tmp_path):
        with pytest.raises(ValueError, match="finite"):
            write_context_feature(tmp_path / "nan.ctxf", np.array([np.nan], dtype=np.float32))


class TestBuildState:
    def test_tiny_layout(self, random_img):
        ctx = tiny_context(random_img)
        h = lab_histogram(random_img)
        state = build_state(ctx, h)
        assert state.shape == (768 + 8000,)
        np.testing.assert_array_equal(state[:768], ctx.values)
        np.testing.assert_array_equal(state[768:], h)

    def test_external_layout(self, random_img, rng):
        ctx = ContextFeature(rng.standard_normal(4096).astype(np.float32), "external")
        state = build_state(ctx, lab_histogram(random_img))
        assert state.shape == (12096,)

    def test_state_dim_helper(self):
        assert state_dim(768) == 8768
        assert state_dim(4096) == 12096

    def test_histogram_size_checked(self, random_img):
        ctx = tiny_context(random_img)
        with pytest.raises(ValueError, match="8000"):
            build_state(ctx, np.zeros(100, dtype=np.float32))
