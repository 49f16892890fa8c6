"""Kernel-density sky probabilities and trimap inpainting."""

import numpy as np
import pytest

from skymatte.density import (DensityParams, Trimap, TrimapLabel, inpaint,
                              sky_probability)
from skymatte.errors import EmptyReferenceError, InvalidParameterError
from skymatte.image import Colorspace, PlanarImage

from oracles import brute_density


def fixture_16x16(seed=0):
    rng = np.random.default_rng(seed)
    rgb = rng.random((16, 16, 3))
    labels = np.full((16, 16), TrimapLabel.NOT_SKY, dtype=np.uint8)
    labels[:4, :] = TrimapLabel.SKY
    labels[6:10, :] = TrimapLabel.UNDETERMINED
    # some undetermined pixels share sky colors, so probabilities spread
    rgb[7, :8] = rgb[1, :8]
    return PlanarImage.from_interleaved(rgb, Colorspace.RGB), Trimap(labels)


class TestSkyProbability:
    def test_exact_match_scores_one_when_normalized(self):
        rgb = np.zeros((2, 2, 3))
        rgb[:] = [0.2, 0.4, 0.8]
        labels = np.array([[2, 2], [1, 0]], dtype=np.uint8)
        img = PlanarImage.from_interleaved(rgb, Colorspace.RGB)
        out = sky_probability(img, Trimap(labels), DensityParams())
        assert out.data[0, 1, 0] == pytest.approx(1.0)

    def test_single_sample_gaussian_falloff(self):
        sigma = 0.05
        d = 0.07
        rgb = np.zeros((1, 2, 3))
        rgb[0, 0] = [0.5, 0.5, 0.5]
        rgb[0, 1] = [0.5 + d, 0.5, 0.5]
        labels = np.array([[2, 1]], dtype=np.uint8)
        img = PlanarImage.from_interleaved(rgb, Colorspace.RGB)
        out = sky_probability(img, Trimap(labels), DensityParams(sigma=sigma))
        assert out.data[0, 0, 1] == pytest.approx(np.exp(-d * d / (2 * sigma ** 2)))

    @pytest.mark.parametrize("normalize", [True, False])
    def test_matches_bruteforce_double_sum(self, normalize):
        img, trimap = fixture_16x16()
        params = DensityParams(sigma=0.15, n_samples=4096,
                               normalize_kernel=normalize)
        out = sky_probability(img, trimap, params)
        oracle = brute_density(img.to_interleaved(), trimap.labels, 0.15, normalize)
        assert np.abs(out.data[0] - oracle).max() < 1e-9

    def test_non_undetermined_pixels_get_zero(self):
        img, trimap = fixture_16x16()
        out = sky_probability(img, trimap, DensityParams())
        annotated = trimap.labels != TrimapLabel.UNDETERMINED
        assert (out.data[0][annotated] == 0.0).all()

    def test_deterministic_for_fixed_seed(self):
        rng = np.random.default_rng(1)
        rgb = rng.random((24, 24, 3))
        labels = np.full((24, 24), TrimapLabel.SKY, dtype=np.uint8)
        labels[10:, :] = TrimapLabel.UNDETERMINED
        img = PlanarImage.from_interleaved(rgb, Colorspace.RGB)
        params = DensityParams(sigma=0.2, n_samples=64, seed=7)
        a = sky_probability(img, Trimap(labels), params)
        b = sky_probability(img, Trimap(labels), params)
        assert np.array_equal(a.data, b.data)
        c = sky_probability(img, Trimap(labels), DensityParams(sigma=0.2,
                                                               n_samples=64, seed=8))
        assert not np.array_equal(a.data, c.data)

    def test_monotone_in_distance_to_single_sample(self):
        rgb = np.zeros((1, 5, 3))
        for i in range(1, 5):
            rgb[0, i] = 0.05 * i
        labels = np.array([[2, 1, 1, 1, 1]], dtype=np.uint8)
        img = PlanarImage.from_interleaved(rgb, Colorspace.RGB)
        out = sky_probability(img, Trimap(labels), DensityParams(sigma=0.1))
        vals = out.data[0, 0, 1:]
        assert (np.diff(vals) < 0).all()

    def test_exhaustive_sampling_uses_every_sky_pixel(self):
        img, trimap = fixture_16x16()
        n_sky = trimap.count(TrimapLabel.SKY)
        exact = sky_probability(img, trimap, DensityParams(sigma=0.15,
                                                           n_samples=n_sky, seed=0))
        other_seed = sky_probability(img, trimap, DensityParams(sigma=0.15,
                                                                n_samples=n_sky, seed=99))
        assert np.array_equal(exact.data, other_seed.data)

    def test_no_sky_pixels_errors(self):
        img = PlanarImage(np.zeros((3, 2, 2)), Colorspace.RGB)
        labels = np.full((2, 2), TrimapLabel.UNDETERMINED, dtype=np.uint8)
        with pytest.raises(EmptyReferenceError):
            sky_probability(img, Trimap(labels))

    def test_param_validation(self):
        with pytest.raises(InvalidParameterError):
            DensityParams(sigma=0.0)
        with pytest.raises(InvalidParameterError):
            DensityParams(n_samples=0)


class TestInpaint:
    def test_no_undetermined_is_identity(self):
        labels = np.array([[2, 0], [0, 2]], dtype=np.uint8)
        t = Trimap(labels)
        out, flags = inpaint(t, PlanarImage(np.zeros((1, 2, 2))), 0.6)
        assert np.array_equal(out.labels, labels)
        assert not flags.any()

    def test_uniform_high_probability_flags_all(self):
        labels = np.full((3, 3), TrimapLabel.UNDETERMINED, dtype=np.uint8)
        labels[0, 0] = TrimapLabel.SKY
        t = Trimap(labels)
        p = PlanarImage(np.full((1, 3, 3), 0.9))
        out, flags = inpaint(t, p, 0.6)
        assert (out.labels != TrimapLabel.UNDETERMINED).all()
        undet = labels == TrimapLabel.UNDETERMINED
        assert (out.labels[undet] == TrimapLabel.SKY).all()
        assert np.array_equal(flags, undet)

    def test_threshold_split_hand_table(self):
        labels = np.array([
            [1, 1, 1],
            [1, 2, 1],
            [1, 1, 0],
        ], dtype=np.uint8)
        probs = np.array([
            [0.7, 0.61, 0.6],
            [0.59, 0.0, 0.9],
            [0.2, 0.999, 0.99],
        ])
        out, flags = inpaint(Trimap(labels), PlanarImage(probs[np.newaxis]), 0.6)
        expected = np.array([
            [2, 2, 0],       # 0.6 is not > 0.6
            [0, 2, 2],
            [0, 2, 0],       # annotated NOT_SKY is untouched
        ], dtype=np.uint8)
        assert np.array_equal(out.labels, expected)
        assert flags.sum() == 4
        assert not flags[1, 1] and not flags[2, 2]
