import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import DATA
from oracles import naive_conv_layer, two_pass_stats
from texrand import tensorio
from texrand.errors import DegenerateError, ShapeError, WeightsFormatError
from texrand.gtr import CodecWeights, adain, decode, encode, gtr_stylize
from texrand.imaging import Image, channel_stats

IDENTITY = CodecWeights.identity()

# values kept away from zero variance and from clipping
feature_maps = arrays(np.float64, st.tuples(st.integers(2, 6), st.integers(2, 6), st.just(3)),
                      elements=st.floats(-5, 5))


def nondegenerate(a):
    return a.reshape(-1, a.shape[-1]).std(axis=0).min() > 1e-3


class TestIdentityCodec:
    def test_encode_is_identity(self, rng):
        x = Image(rng.random((5, 7, 3)))
        np.testing.assert_array_equal(encode(x, IDENTITY), x.data)

    def test_encode_byte_image_in_unit_scale(self):
        x = Image(np.full((2, 2, 3), 255.0), "byte")
        np.testing.assert_array_equal(encode(x, IDENTITY), 1.0)

    def test_round_trip(self, rng):
        x = Image(rng.random((6, 6, 3)))
        np.testing.assert_array_equal(decode(encode(x, IDENTITY), IDENTITY).data, x.data)

    def test_decode_clamps(self):
        out = decode(np.array([[[-0.5, 0.5, 1.5]]]), IDENTITY)
        assert out.data.tolist() == [[[0.0, 0.5, 1.0]]]


class TestAdain:
    def test_style_equals_content(self, rng):
        c = rng.random((6, 5, 3))
        np.testing.assert_allclose(adain(c, c), c, atol=1e-10)

    def test_constant_style_gives_constant_output(self, rng):
        out = adain(rng.random((4, 4, 3)), np.full((3, 3, 3), 0.25))
        np.testing.assert_allclose(out, 0.25, atol=1e-15)

    def test_zero_variance_content_channel(self, rng):
        c = rng.random((4, 4, 3))
        c[:, :, 1] = 0.3
        with pytest.raises(DegenerateError, match=r"\[1\]"):
            adain(c, rng.random((4, 4, 3)))

    def test_random_4x4_matches_two_pass_oracle(self, rng):
        c, s = rng.random((4, 4, 3)), rng.random((4, 4, 3))
        out = adain(c, s)
        for ch in range(3):
            om, osd = two_pass_stats(out[:, :, ch].ravel())
            sm, ssd = two_pass_stats(s[:, :, ch].ravel())
            assert abs(om - sm) <= 1e-10 and abs(osd - ssd) <= 1e-10

    def test_formula(self, rng):
        c, s = rng.random((3, 4, 3)), rng.random((5, 2, 3))
        cm, cs = channel_stats(c)
        sm, ss = channel_stats(s)
        np.testing.assert_allclose(adain(c, s), ss * (c - cm) / cs + sm, rtol=1e-14)

    def test_channel_mismatch(self, rng):
        with pytest.raises(ShapeError):
            adain(rng.random((4, 4, 3)), rng.random((4, 4, 1)))

    @settings(max_examples=60)
    @given(feature_maps, feature_maps)
    def test_output_carries_style_stats(self, c, s):
        if not nondegenerate(c):
            return
        out_m, out_s = channel_stats(adain(c, s))
        sm, ss = channel_stats(s)
        np.testing.assert_allclose(out_m, sm, atol=1e-9)
        np.testing.assert_allclose(out_s, ss, atol=1e-9)

    @settings(max_examples=60)
    @given(feature_maps, feature_maps)
    def test_idempotent(self, c, s):
        if not (nondegenerate(c) and nondegenerate(s)):
            return
        once = adain(c, s)
        np.testing.assert_allclose(adain(once, s), once, atol=1e-9)

    @settings(max_examples=60)
    @given(feature_maps, feature_maps, st.floats(0.1, 10), st.floats(-10, 10))
    def test_content_affine_invariance(self, c, s, a, b):
        if not nondegenerate(c):
            return
        np.testing.assert_allclose(adain(a * c + b, s), adain(c, s), atol=1e-9)


class TestGtrStylizeIdentity:
    def test_self_style(self, rng):
        x = Image(rng.random((8, 8, 3)))
        np.testing.assert_allclose(gtr_stylize(x, x, IDENTITY).data, x.data, atol=1e-10)

    def test_stats_follow_painting_when_unclipped(self, rng):
        # painting spread small enough that no output pixel leaves [0, 1]
        x = Image(rng.random((10, 12, 3)))
        t = Image(0.5 + 0.1 * (rng.random((7, 9, 3)) - 0.5))
        out = gtr_stylize(x, t, IDENTITY)
        m, s = channel_stats(out)
        tm, ts = channel_stats(t)
        np.testing.assert_allclose(m, tm, atol=1e-10)
        np.testing.assert_allclose(s, ts, atol=1e-10)

    def test_ramp_onto_flat_gray(self):
        ramp = np.repeat(np.linspace(0, 1, 16)[None, :, None], 8, axis=0).repeat(3, axis=2)
        out = gtr_stylize(Image(ramp), Image(np.full((4, 4, 3), 0.5)), IDENTITY)
        np.testing.assert_allclose(out.data, 0.5, atol=1e-15)

    def test_preserves_dimensions(self, rng):
        x = Image(rng.random((9, 13, 3)))
        assert gtr_stylize(x, Image(rng.random((20, 5, 3))), IDENTITY).shape == x.shape

    def test_output_in_unit_range(self, rng):
        x = Image(rng.random((8, 8, 3)))
        t = Image(rng.random((8, 8, 3)) ** 6)
        out = gtr_stylize(x, t, IDENTITY).data
        assert out.min() >= 0 and out.max() <= 1


@pytest.fixture(scope="module")
def weights():
    return CodecWeights.load(DATA / "codec_weights.txrw")


@pytest.fixture(scope="module")
def golden():
    return tensorio.load(DATA / "codec_golden.txrw")


class TestConvCodec:
    def test_feature_shape(self, weights, rng):
        assert encode(Image(rng.random((16, 24, 3))), weights).shape == (4, 6, 64)

    def test_decode_restores_size(self, weights, rng):
        x = Image(rng.random((16, 12, 3)))
        out = decode(encode(x, weights), weights)
        assert out.shape == x.shape and out.value_range == "unit"

    def test_indivisible_size(self, weights, rng):
        with pytest.raises(ShapeError, match="divisible"):
            encode(Image(rng.random((10, 12, 3))), weights)

    def test_impulse_matches_naive_oracle(self, weights):
        x = np.zeros((8, 8, 3))
        x[3, 4, 1] = 1.0
        h = x
        for name, stride in (("enc0", 1), ("enc1", 2), ("enc2", 2)):
            h = np.maximum(naive_conv_layer(h, weights.tensors[f"{name}.w"], weights.tensors[f"{name}.b"], stride), 0)
        np.testing.assert_allclose(encode(Image(x), weights), h, atol=1e-8)

    def test_golden_features(self, weights, golden):
        np.testing.assert_allclose(encode(Image(golden["input"]), weights), golden["features"], atol=1e-8)

    def test_golden_output(self, weights, golden):
        out = decode(encode(Image(golden["input"]), weights), weights)
        np.testing.assert_allclose(out.data, golden["output"], atol=1e-6)

    def test_feature_level_stats(self, weights, rng):
        x, t = Image(rng.random((16, 16, 3))), Image(rng.random((16, 16, 3)))
        fx, ft = encode(x, weights), encode(t, weights)
        keep = (channel_stats(fx)[1] > 1e-6)
        fu = adain(fx[:, :, keep], ft[:, :, keep])
        np.testing.assert_allclose(channel_stats(fu)[0], channel_stats(ft[:, :, keep])[0], atol=1e-9)

    def test_dead_feature_channel_is_degenerate(self, weights, rng):
        # untrained weights leave some ReLU channels at zero for every pixel
        x = Image(rng.random((16, 16, 3)))
        assert (channel_stats(encode(x, weights))[1] <= 1e-8).any()
        with pytest.raises(DegenerateError):
            gtr_stylize(x, x, weights)

    def test_missing_tensor(self, weights):
        tensors = dict(weights.tensors)
        del tensors["dec1.b"]
        with pytest.raises(WeightsFormatError, match="dec1"):
            CodecWeights("conv", tensors)

    def test_wrong_shape(self, weights):
        tensors = dict(weights.tensors)
        tensors["enc0.w"] = np.zeros((3, 3, 3, 8))
        with pytest.raises(WeightsFormatError, match="enc0"):
            CodecWeights("conv", tensors)

    def test_save_load_round_trip(self, weights, tmp_path):
        weights.save(tmp_path / "w.txrw")
        back = CodecWeights.load(tmp_path / "w.txrw")
        for k, v in weights.tensors.items():
            np.testing.assert_array_equal(back.tensors[k], v)
