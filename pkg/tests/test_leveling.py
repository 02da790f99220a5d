import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.ndimage import maximum_filter, minimum_filter

from viametry import (
    DepthMap,
    InputError,
    LevelingParams,
    SceneSpec,
    ViaSpec,
    analytic_depth,
    level_depth,
    proximity_filter,
    surface_mean,
)
from viametry.errors import DegenerateWeights
from viametry.leveling import depth_weight


def brute_force_filter(z, spatial_sigma, depth_sigma, radius, mean_depth):
    """Direct windowed-sum evaluation of the leveling formula."""
    h, w = z.shape
    out = np.empty_like(z)
    for i in range(h):
        for j in range(w):
            num = 0.0
            den = 0.0
            for di in range(-radius, radius + 1):
                for dj in range(-radius, radius + 1):
                    ii, jj = i + di, j + dj
                    if not (0 <= ii < h and 0 <= jj < w):
                        continue
                    g = math.exp(-(di * di + dj * dj)
                                 / (2.0 * spatial_sigma ** 2))
                    wz = math.exp(-(z[ii, jj] - mean_depth) ** 2
                                  / (2.0 * depth_sigma ** 2))
                    num += g * wz * z[ii, jj]
                    den += g * wz
            out[i, j] = num / den
    return out


class TestParams:
    @pytest.mark.parametrize("kwargs", [
        {"spatial_sigma": 0.0},
        {"spatial_sigma": -1.0},
        {"depth_sigma": 0.0},
        {"window_radius": 0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(InputError):
            LevelingParams(**kwargs)

    def test_resolved_defaults(self):
        z = np.array([[0.0, 4.0], [1.0, 2.0]])
        sigma_s, sigma_d, radius = LevelingParams().resolved(z)
        assert sigma_s == 2.0
        assert sigma_d == pytest.approx(0.4)  # 10% of peak-to-valley
        assert radius == 6  # ceil(3 * spatial_sigma)

    def test_flat_map_fallback(self):
        _, sigma_d, _ = LevelingParams().resolved(np.zeros((3, 3)))
        assert sigma_d == 1.0


class TestProximityFilter:
    def test_matches_brute_force(self, rng):
        z = rng.uniform(0.0, 3.0, (6, 7))
        params = LevelingParams(spatial_sigma=1.2, depth_sigma=0.8,
                                window_radius=2)
        got = proximity_filter(z, params)
        want = brute_force_filter(z, 1.2, 0.8, 2, float(z.mean()))
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_matches_brute_force_custom_anchor(self, rng):
        z = rng.uniform(0.0, 3.0, (5, 5))
        params = LevelingParams(spatial_sigma=0.9, depth_sigma=0.5,
                                window_radius=3)
        got = proximity_filter(z, params, mean_depth=2.5)
        want = brute_force_filter(z, 0.9, 0.5, 3, 2.5)
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_constant_map_unchanged(self):
        z = np.full((9, 9), 4.25)
        out = proximity_filter(z, LevelingParams())
        np.testing.assert_allclose(out, 4.25, atol=1e-12)

    def test_outlier_pulled_down(self):
        params = LevelingParams(spatial_sigma=2.0, depth_sigma=1.0,
                                window_radius=2)
        z = np.zeros((9, 9))
        z[4, 4] = 100.0  # 100 * depth_sigma
        out = proximity_filter(z, params)
        assert out[4, 4] < z[4, 4]

    def test_degenerate_weights(self):
        z = np.zeros((8, 8))
        z[:, 4:] = 1e6
        params = LevelingParams(spatial_sigma=1.0, depth_sigma=1e-3,
                                window_radius=1)
        with pytest.raises(DegenerateWeights):
            proximity_filter(z, params)

    @given(st.integers(0, 2 ** 31), st.floats(0.5, 3.0), st.floats(0.1, 5.0))
    @settings(max_examples=25, deadline=None)
    def test_boundedness(self, seed, spatial_sigma, depth_sigma):
        z = np.random.default_rng(seed).uniform(0.0, 10.0, (7, 7))
        params = LevelingParams(spatial_sigma=spatial_sigma,
                                depth_sigma=depth_sigma, window_radius=2)
        out = proximity_filter(z, params)
        lo = minimum_filter(z, size=5, mode="nearest")
        hi = maximum_filter(z, size=5, mode="nearest")
        assert np.all(out >= lo - 1e-9)
        assert np.all(out <= hi + 1e-9)

    def test_reflection_symmetry(self, rng):
        z = rng.uniform(0.0, 2.0, (11, 13))
        params = LevelingParams(spatial_sigma=1.5, depth_sigma=0.7,
                                window_radius=3)
        out = proximity_filter(z, params)
        flipped = proximity_filter(z[::-1, ::-1], params)
        np.testing.assert_allclose(flipped, out[::-1, ::-1], atol=1e-12)


class TestDepthWeight:
    def test_strictly_decreasing_in_deviation(self):
        devs = np.array([0.0, 0.5, 1.0, 2.0, 5.0])
        w = depth_weight(3.0 + devs, mean_depth=3.0, depth_sigma=1.5)
        assert np.all(np.diff(w) < 0)
        w_neg = depth_weight(3.0 - devs, mean_depth=3.0, depth_sigma=1.5)
        np.testing.assert_allclose(w_neg, w, atol=1e-15)

    def test_peak_at_mean(self):
        assert depth_weight(np.array([7.0]), 7.0, 2.0)[0] == 1.0


class TestLevelDepth:
    def test_zero_map_stays_zero(self):
        out = level_depth(DepthMap(z=np.zeros((9, 9)), pixel_pitch=1.0))
        assert np.all(out.z == 0.0)

    def test_constant_map_rezeroed(self):
        out = level_depth(DepthMap(z=np.full((9, 9), 5.0), pixel_pitch=1.0))
        np.testing.assert_allclose(out.z, 0.0, atol=1e-12)

    def test_min_zero_and_pitch_kept(self, rng):
        dm = DepthMap(z=rng.uniform(0, 4, (12, 12)), pixel_pitch=0.5)
        out = level_depth(dm, LevelingParams(spatial_sigma=1.0))
        assert abs(out.z.min()) < 1e-9
        assert out.pixel_pitch == 0.5

    def test_edge_noise_rms_strictly_decreases(self):
        """Rim-band noise on a gentle via: leveling must move the map
        toward the clean oracle."""
        via = ViaSpec(center=(16.0, 16.0), radius_top=12.0,
                      radius_bottom=4.0, depth=5.0,
                      wall_profile="cosine-rounded-rim")
        scene = SceneSpec(width=33, height=33, pixel_pitch=1.0, vias=[via])
        clean = analytic_depth(scene).z
        clean = clean - clean.min()
        yy, xx = np.meshgrid(np.arange(33) + 0.5, np.arange(33) + 0.5,
                             indexing="ij")
        band = np.abs(np.hypot(xx - 16.0, yy - 16.0) - 12.0) < 2.0
        noise = np.where(
            band, np.random.default_rng(42).uniform(-0.5, 0.5, clean.shape),
            0.0)
        noisy = clean + noise
        params = LevelingParams(
            spatial_sigma=1.0,
            depth_sigma=10.0 * (noisy.max() - noisy.min()))
        out = level_depth(DepthMap(z=noisy, pixel_pitch=1.0), params)
        rms_before = np.sqrt(np.mean((noisy - clean) ** 2))
        rms_after = np.sqrt(np.mean((out.z - clean) ** 2))
        assert rms_after < rms_before


class TestSurfaceMean:
    def test_upper_half_mean(self):
        z = np.array([[0.0, 0.0], [10.0, 20.0]])
        # median 5: surface half is {10, 20}
        assert surface_mean(z) == 15.0

    def test_constant(self):
        assert surface_mean(np.full((4, 4), 2.0)) == 2.0
