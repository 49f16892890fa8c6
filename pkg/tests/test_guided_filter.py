"""Oracle tests for resampling, the LDL solver, and the weighted filter."""

import numpy as np
import pytest

from skymatte.errors import (InvalidInputError, InvalidParameterError,
                             SingularSystemError)
from skymatte.guided_filter import (GuidedFilterParams, bilinear_resize,
                                    guided_filter_coefficients,
                                    modified_guided_filter, smooth_upsample,
                                    solve_image_ldl3, tent_downsample,
                                    upsample_stages, weighted_downsample)
from skymatte.image import Colorspace, PlanarImage

from oracles import (brute_upsample_stage, brute_weighted_mean,
                     gaussian_solve_3x3, smooth_fields, upper_to_matrix)


def mask_of(arr):
    return PlanarImage(np.asarray(arr, dtype=float)[np.newaxis], Colorspace.MASK)

# ---------------------------------------------------------------------------
# weighted_downsample
# ---------------------------------------------------------------------------

class TestWeightedDownsample:
    def test_constant_image_any_confidence(self):
        rng = np.random.default_rng(0)
        x = PlanarImage(np.full((3, 8, 8), 0.37))
        c = PlanarImage(rng.uniform(0.01, 1.0, (1, 8, 8)))
        out = weighted_downsample(x, c, 4)
        assert out.shape == (3, 2, 2)
        assert np.abs(out.data - 0.37).max() < 1e-12

    def test_uniform_confidence_is_plain_bilinear(self):
        rng = np.random.default_rng(1)
        x = PlanarImage(rng.random((1, 12, 12)))
        c1 = PlanarImage(np.full((1, 12, 12), 0.73))
        out = weighted_downsample(x, c1, 3)
        plain = tent_downsample(x.data, 3) / tent_downsample(np.ones((1, 12, 12)), 3)
        assert np.abs(out.data - plain).max() < 1e-12

    def test_matches_bruteforce_weighted_average(self):
        rng = np.random.default_rng(2)
        x = PlanarImage(rng.random((3, 8, 8)))
        c = PlanarImage(rng.uniform(0.01, 1.0, (1, 8, 8)))
        out = weighted_downsample(x, c, 4)
        oracle = brute_weighted_mean(x.data, c.data[0], 4)
        assert np.abs(out.data - oracle).max() < 1e-12

    def test_ceil_output_dimensions(self):
        x = PlanarImage(np.zeros((1, 10, 13)))
        c = PlanarImage(np.ones((1, 10, 13)))
        out = weighted_downsample(x, c, 4)
        assert (out.height, out.width) == (3, 4)

    def test_rejects_nonpositive_confidence(self):
        x = PlanarImage(np.ones((1, 4, 4)))
        c = np.full((1, 4, 4), 0.5)
        c[0, 2, 2] = 0.0
        with pytest.raises(InvalidInputError):
            weighted_downsample(x, PlanarImage(c), 2)


# ---------------------------------------------------------------------------
# smooth_upsample
# ---------------------------------------------------------------------------

class TestSmoothUpsample:
    def test_stage_factorizations(self):
        assert upsample_stages(64) == (4, 4, 4)
        assert upsample_stages(16) == (4, 2, 2)
        assert upsample_stages(48) == (4, 4, 3)
        assert upsample_stages(8) == (2, 2, 2)
        assert upsample_stages(1) == ()

    def test_constant_reproduced_exactly(self):
        x = PlanarImage(np.full((1, 3, 5), 0.42))
        out = smooth_upsample(x, 8)
        assert out.shape == (1, 24, 40)
        assert np.abs(out.data - 0.42).max() == 0.0

    @pytest.mark.parametrize("s", [2, 4, 8, 16])
    def test_linear_ramp_exact_in_interior(self, s):
        n = 12
        ramp = (0.3 * np.arange(n) + 0.1)[np.newaxis, np.newaxis, :].repeat(4, axis=1)
        out = smooth_upsample(PlanarImage(np.array(ramp)), s)
        fine = np.arange(n * s)
        expected = 0.3 * ((fine + 0.5) / s - 0.5) + 0.1
        margin = 2 * s
        err = np.abs(out.data[0, 2 * s, margin:-margin] - expected[margin:-margin])
        assert err.max() < 1e-6

    @pytest.mark.parametrize("s", [8, 64])
    def test_impulse_matches_composed_tent_oracle(self, s):
        x = np.zeros((1, 5, 5))
        x[0, 2, 2] = 1.0
        out = smooth_upsample(PlanarImage(x), s)
        oracle = x
        for f in upsample_stages(s):
            oracle = brute_upsample_stage(oracle, f)
        assert np.abs(out.data - oracle).max() < 1e-9

    def test_random_image_matches_oracle(self):
        rng = np.random.default_rng(3)
        x = rng.random((2, 4, 6))
        out = smooth_upsample(PlanarImage(np.vstack([x[:1], x[1:]])[:1]), 16)
        oracle = x[:1]
        for f in upsample_stages(16):
            oracle = brute_upsample_stage(oracle, f)
        assert np.abs(out.data - oracle).max() < 1e-9

    def test_s1_is_identity(self):
        rng = np.random.default_rng(4)
        x = rng.random((1, 5, 5))
        assert np.array_equal(smooth_upsample(PlanarImage(x), 1).data, x)


# ---------------------------------------------------------------------------
# solve_image_ldl3
# ---------------------------------------------------------------------------

def spd_image(rng, h, w, jitter=0.1):
    """Random SPD systems M M^T + jitter*I packed into a 6-channel image."""
    a6 = np.zeros((6, h, w))
    bs = rng.standard_normal((3, h, w))
    for i in range(h):
        for j in range(w):
            m = rng.standard_normal((3, 3))
            spd = m @ m.T + jitter * np.eye(3)
            a6[:, i, j] = [spd[0, 0], spd[0, 1], spd[0, 2],
                           spd[1, 1], spd[1, 2], spd[2, 2]]
    return PlanarImage(a6), PlanarImage(bs)


class TestSolveImageLdl3:
    def test_identity_system(self):
        h = w = 3
        a6 = np.zeros((6, h, w))
        a6[[0, 3, 5]] = 1.0
        rng = np.random.default_rng(5)
        b = PlanarImage(rng.standard_normal((3, h, w)))
        out = solve_image_ldl3(PlanarImage(a6), b)
        assert np.abs(out.data - b.data).max() < 1e-12

    def test_diagonal_system(self):
        a6 = np.zeros((6, 1, 1))
        a6[[0, 3, 5], 0, 0] = [2.0, 4.0, 8.0]
        b = PlanarImage(np.array([2.0, 4.0, 8.0]).reshape(3, 1, 1))
        out = solve_image_ldl3(PlanarImage(a6), b)
        assert np.allclose(out.data[:, 0, 0], [1.0, 1.0, 1.0])

    def test_matches_gaussian_elimination_oracle(self):
        rng = np.random.default_rng(6)
        a, b = spd_image(rng, 4, 4)
        out = solve_image_ldl3(a, b)
        for i in range(4):
            for j in range(4):
                want = gaussian_solve_3x3(upper_to_matrix(a.data[:, i, j]),
                                          b.data[:, i, j])
                assert np.abs(out.data[:, i, j] - want).max() < 1e-6

    def test_low_residual(self):
        rng = np.random.default_rng(7)
        a, b = spd_image(rng, 6, 5)
        x = solve_image_ldl3(a, b).data
        for i in range(6):
            for j in range(5):
                r = upper_to_matrix(a.data[:, i, j]) @ x[:, i, j] - b.data[:, i, j]
                assert np.abs(r).max() < 1e-5

    def test_singular_pivot_identifies_pixel(self):
        a6 = np.zeros((6, 2, 3))
        a6[[0, 3, 5]] = 1.0
        a6[0, 1, 2] = -1.0  # d1 <= 0 at (x=2, y=1)
        b = PlanarImage(np.ones((3, 2, 3)))
        with pytest.raises(SingularSystemError, match=r"x=2, y=1"):
            solve_image_ldl3(PlanarImage(a6), b)

    def test_shape_validation(self):
        with pytest.raises(InvalidInputError):
            solve_image_ldl3(PlanarImage(np.ones((3, 2, 2))),
                             PlanarImage(np.ones((3, 2, 2))))


# ---------------------------------------------------------------------------
# modified_guided_filter
# ---------------------------------------------------------------------------

def uniform_conf(h, w, value=1.0):
    return PlanarImage(np.full((1, h, w), value), Colorspace.MASK)


class TestModifiedGuidedFilter:
    def test_constant_inputs_reproduce_constant(self):
        h = w = 32
        ref = PlanarImage(np.full((3, h, w), 0.5), Colorspace.YUV)
        p = mask_of(np.full((h, w), 0.3))
        out = modified_guided_filter(ref, p, uniform_conf(h, w),
                                     GuidedFilterParams(s=8))
        assert np.abs(out.data - 0.3).max() < 1e-9

    def test_affine_mask_recovered(self):
        rng = np.random.default_rng(8)
        h = w = 96
        ref = PlanarImage(smooth_fields(rng, h, w), Colorspace.YUV)
        coef = np.array([0.2, -0.15, 0.1])
        p_data = np.einsum("c,chw->hw", coef, ref.data) + 0.45
        assert p_data.min() > 0.0 and p_data.max() < 1.0
        p = mask_of(p_data)
        out = modified_guided_filter(ref, p, uniform_conf(h, w),
                                     GuidedFilterParams(s=8, eps_l=1e-6, eps_c=1e-6))
        assert np.abs(out.data[0] - p_data).mean() < 1e-3

    @pytest.mark.parametrize("s", [1, 2])
    def test_coefficients_match_windowed_least_squares(self, s):
        # With uniform confidence the filter must agree with a per-cell
        # weighted least-squares fit using the same tent footprint.
        rng = np.random.default_rng(9)
        h = w = 16
        ref = PlanarImage(rng.random((3, h, w)), Colorspace.YUV)
        p = mask_of(rng.random((h, w)))
        eps = 0.05
        a_lo, b_lo = guided_filter_coefficients(
            ref, p, uniform_conf(h, w), GuidedFilterParams(s=s, eps_l=eps, eps_c=eps))

        conf = np.ones((h, w))
        stacked = np.concatenate([ref.data, p.data,
                                  np.stack([ref.data[i] * ref.data[j] for i, j in
                                            [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]]),
                                  ref.data * p.data])
        means = brute_weighted_mean(stacked, conf, s)
        mh, mw = means.shape[-2:]
        for ky in range(mh):
            for kx in range(mw):
                mu_i = means[0:3, ky, kx]
                mu_p = means[3, ky, kx]
                exx = upper_to_matrix(means[4:10, ky, kx])
                exp_ = means[10:13, ky, kx]
                sigma = exx - np.outer(mu_i, mu_i) + eps ** 2 * np.eye(3)
                small = exp_ - mu_i * mu_p
                a_want = gaussian_solve_3x3(sigma, small)
                b_want = mu_p - a_want @ mu_i
                assert np.abs(a_lo[:, ky, kx] - a_want).max() < 1e-5
                assert abs(b_lo[0, ky, kx] - b_want) < 1e-5

    def test_high_confidence_pixel_propagates(self):
        # One certain pixel among floor-confidence pixels dominates the local
        # weighted mean: the output near it lands within 10% of its value.
        h = w = 4
        ref = PlanarImage(np.full((3, h, w), 0.5), Colorspace.YUV)
        p_data = np.full((h, w), 0.5)
        p_data[1, 1] = 1.0
        c_data = np.full((h, w), 0.01)
        c_data[1, 1] = 1.0
        out = modified_guided_filter(ref, mask_of(p_data),
                                     mask_of(c_data), GuidedFilterParams(s=4))
        assert np.abs(out.data[0] - 1.0).max() < 0.1

    def test_low_resolution_mask_is_resized(self):
        rng = np.random.default_rng(10)
        ref = PlanarImage(rng.random((3, 64, 64)), Colorspace.YUV)
        p = mask_of(rng.random((16, 16)))
        c = mask_of(np.full((16, 16), 0.5))
        out = modified_guided_filter(ref, p, c, GuidedFilterParams(s=16))
        assert (out.height, out.width) == (64, 64)

    def test_mask_larger_than_reference_rejected(self):
        ref = PlanarImage(np.ones((3, 8, 8)), Colorspace.YUV)
        p = mask_of(np.ones((16, 16)))
        with pytest.raises(InvalidInputError):
            modified_guided_filter(ref, p, mask_of(np.ones((16, 16))),
                                   GuidedFilterParams(s=4))

    def test_output_clamped_and_mask_tagged(self):
        rng = np.random.default_rng(11)
        ref = PlanarImage(rng.random((3, 32, 32)), Colorspace.YUV)
        p = mask_of(rng.integers(0, 2, (32, 32)).astype(float))
        out = modified_guided_filter(ref, p, uniform_conf(32, 32),
                                     GuidedFilterParams(s=4, eps_l=1e-4, eps_c=1e-4))
        assert out.colorspace is Colorspace.MASK
        assert out.data.min() >= 0.0 and out.data.max() <= 1.0

    def test_bit_identical_across_runs(self):
        rng = np.random.default_rng(12)
        ref = PlanarImage(rng.random((3, 40, 56)), Colorspace.YUV)
        p = mask_of(rng.random((40, 56)))
        c = mask_of(rng.uniform(0.01, 1.0, (40, 56)))
        params = GuidedFilterParams(s=8)
        first = modified_guided_filter(ref, p, c, params)
        second = modified_guided_filter(ref, p, c, params)
        assert np.array_equal(first.data, second.data)

    def test_stats_report_system_count(self):
        ref = PlanarImage(np.random.default_rng(13).random((3, 48, 80)), Colorspace.YUV)
        p = mask_of(np.full((48, 80), 0.5))
        stats = {}
        modified_guided_filter(ref, p, uniform_conf(48, 80),
                               GuidedFilterParams(s=16), stats=stats)
        assert stats["systems_solved"] == 3 * 5
        assert (stats["lowres_height"], stats["lowres_width"]) == (3, 5)


class TestBilinearResize:
    def test_constant_preserved(self):
        x = np.full((1, 5, 7), 0.3)
        out = bilinear_resize(x, 20, 21)
        assert np.abs(out - 0.3).max() < 1e-12

    def test_identity_when_same_size(self):
        rng = np.random.default_rng(14)
        x = rng.random((2, 6, 6))
        assert bilinear_resize(x, 6, 6) is x


class TestParams:
    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            GuidedFilterParams(s=0)
        with pytest.raises(InvalidParameterError):
            GuidedFilterParams(s=8, eps_l=0.0)
        with pytest.raises(InvalidParameterError):
            weighted_downsample(PlanarImage(np.ones((1, 4, 4))),
                                PlanarImage(np.ones((1, 4, 4))), 0)
