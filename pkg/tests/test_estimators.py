"""The estimator adapters must behave like scikit-learn components and
reproduce the functional pipeline exactly."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import Pipeline

from viametry import (
    DepthLeveler,
    DepthReconstructor,
    InputError,
    NormalEstimator,
    ViaInspector,
    estimate_normals,
    integrate,
    level_depth,
    measure_via,
    normals_to_gradients,
    render_scene,
)
from viametry.errors import RankDeficientLights
from viametry.leveling import LevelingParams

from conftest import seven_lights, taper_scene


@pytest.fixture(scope="module")
def stack():
    return render_scene(taper_scene(), seven_lights())


class TestSklearnProtocol:
    @pytest.mark.parametrize("est", [
        NormalEstimator(), DepthReconstructor(), DepthLeveler(),
        ViaInspector()])
    def test_get_params_roundtrip(self, est):
        params = est.get_params()
        est.set_params(**params)
        assert est.get_params() == params

    def test_clone_preserves_params(self):
        est = NormalEstimator(lights=[[0, 0, 1], [1, 0, 1], [0, 1, 1]],
                              shadow_threshold=0.02, pixel_pitch=0.25)
        twin = clone(est)
        assert twin.get_params() == est.get_params()

    def test_fit_returns_self(self, stack):
        est = NormalEstimator(lights=seven_lights())
        assert est.fit(stack) is est

    def test_set_params_chains(self):
        est = DepthLeveler().set_params(spatial_sigma=1.5)
        assert est.spatial_sigma == 1.5

    def test_fit_validates_light_shape(self):
        bad = NormalEstimator(lights=[[0, 0], [0, 1], [1, 0]])
        with pytest.raises(InputError):
            bad.fit()

    def test_coplanar_lights_fail_at_transform(self):
        bad = NormalEstimator(lights=[[0, 0, 1], [0, 0, 1], [0, 0, 1]])
        bad.fit()
        with pytest.raises(RankDeficientLights):
            bad.transform(np.full((3, 4, 4), 0.5))

    def test_fit_validates_slice_count(self):
        with pytest.raises(InputError):
            ViaInspector(slice_count=0).fit()

    def test_fit_validates_leveler_params(self):
        with pytest.raises(InputError):
            DepthLeveler(spatial_sigma=-1.0).fit()


class TestFunctionalEquivalence:
    def test_normals_match_functional_core(self, stack):
        lights = seven_lights()
        est = NormalEstimator(lights=lights, shadow_threshold=0.005)
        field = est.fit_transform(stack)
        want = estimate_normals(stack, lights, 0.005)
        np.testing.assert_array_equal(field.normals, want.normals)
        np.testing.assert_array_equal(field.albedo, want.albedo)
        np.testing.assert_array_equal(field.mask, want.mask)

    def test_reconstructor_matches_composition(self, stack):
        lights = seven_lights()
        est = DepthReconstructor(lights=lights, shadow_threshold=0.005)
        got = est.fit_transform(stack)
        field = estimate_normals(stack, lights, 0.005)
        want = integrate(normals_to_gradients(field), stack.pixel_pitch)
        np.testing.assert_array_equal(got.z, want.z)
        assert got.pixel_pitch == stack.pixel_pitch

    def test_leveler_matches_functional_core(self, stack):
        lights = seven_lights()
        dm = DepthReconstructor(lights=lights,
                                shadow_threshold=0.005).fit_transform(stack)
        got = DepthLeveler(spatial_sigma=1.0).fit_transform(dm)
        want = level_depth(dm, LevelingParams(spatial_sigma=1.0))
        np.testing.assert_array_equal(got.z, want.z)

    def test_inspector_matches_functional_core(self, stack):
        lights = seven_lights()
        dm = DepthReconstructor(lights=lights,
                                shadow_threshold=0.005).fit_transform(stack)
        got = ViaInspector(slice_count=3).fit(dm).predict(dm)
        want = measure_via(dm, 3)
        assert got.depth == want.depth
        assert got.diameter == want.diameter
        assert len(got.profiles) == len(want.profiles)

    def test_bare_array_input(self, stack):
        lights = seven_lights()
        est = DepthReconstructor(lights=lights.directions,
                                 shadow_threshold=0.005,
                                 pixel_pitch=stack.pixel_pitch)
        got = est.fit_transform(np.asarray(stack.frames))
        want = DepthReconstructor(
            lights=lights, shadow_threshold=0.005).fit_transform(stack)
        np.testing.assert_array_equal(got.z, want.z)


class TestPipelineComposition:
    def test_sklearn_pipeline_runs_end_to_end(self, stack):
        pipe = Pipeline([
            ("reconstruct", DepthReconstructor(lights=seven_lights(),
                                               shadow_threshold=0.005)),
            ("level", DepthLeveler(spatial_sigma=1.0)),
            ("inspect", ViaInspector(slice_count=5)),
        ])
        measurement = pipe.fit(stack).predict(stack)
        assert measurement.depth == pytest.approx(50.0, rel=0.03)
        assert measurement.diameter == pytest.approx(50.0, rel=0.06)
        assert len(measurement.profiles) == 5
