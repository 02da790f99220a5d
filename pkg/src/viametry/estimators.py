"""Estimator-style adapters over the functional pipeline.

Thin scikit-learn compatible wrappers (``get_params``/``set_params``,
stateless ``fit`` returning ``self``) so the reconstruction stages compose
with sklearn tooling and pipelines.  Inputs and outputs are the library's
domain objects; ``fit`` only validates parameters, no state is learned.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .errors import InputError
from .integration import DepthMap, integrate
from .leveling import LevelingParams, level_depth
from .metrology import ViaMeasurement, measure_via
from .photometric import (
    ImageStack,
    LightSet,
    NormalField,
    estimate_normals,
    normals_to_gradients,
)


class _Stateless:
    """fit learns nothing here; every adapter is usable once parameters
    validate, which is what the fitted protocol should report."""

    def __sklearn_is_fitted__(self) -> bool:
        return True


def _as_light_set(lights) -> LightSet:
    if isinstance(lights, LightSet):
        return lights
    return LightSet(np.asarray(lights, dtype=float))


def _as_stack(X, pixel_pitch: float) -> ImageStack:
    if isinstance(X, ImageStack):
        return X
    return ImageStack(frames=np.asarray(X, dtype=float), pixel_pitch=pixel_pitch)


class NormalEstimator(_Stateless, BaseEstimator):
    """Per-pixel normals and albedo from an image stack.

    Parameters
    ----------
    lights : (K, 3) array or LightSet
        Unit illumination directions, one per frame.
    shadow_threshold : float
        Intensities at or below this are treated as shadowed.
    pixel_pitch : float
        Micrometers per pixel, used when X is a bare (K, H, W) array.
    """

    def __init__(self, lights=None, shadow_threshold=0.01, pixel_pitch=1.0):
        self.lights = lights
        self.shadow_threshold = shadow_threshold
        self.pixel_pitch = pixel_pitch

    def fit(self, X=None, y=None):
        _as_light_set(self.lights)
        return self

    def transform(self, X) -> NormalField:
        stack = _as_stack(X, self.pixel_pitch)
        return estimate_normals(
            stack, _as_light_set(self.lights), self.shadow_threshold
        )

    def fit_transform(self, X, y=None):
        return self.fit(X, y).transform(X)


class DepthReconstructor(_Stateless, BaseEstimator):
    """Image stack to detrended depth map: normal estimation, gradient
    conversion, and Poisson integration in one transform."""

    def __init__(self, lights=None, shadow_threshold=0.01, pixel_pitch=1.0):
        self.lights = lights
        self.shadow_threshold = shadow_threshold
        self.pixel_pitch = pixel_pitch

    def fit(self, X=None, y=None):
        _as_light_set(self.lights)
        return self

    def transform(self, X) -> DepthMap:
        stack = _as_stack(X, self.pixel_pitch)
        field = estimate_normals(
            stack, _as_light_set(self.lights), self.shadow_threshold
        )
        return integrate(normals_to_gradients(field), stack.pixel_pitch)

    def fit_transform(self, X, y=None):
        return self.fit(X, y).transform(X)


class DepthLeveler(_Stateless, BaseEstimator):
    """Mean-proximity smoothing of depth maps."""

    def __init__(self, spatial_sigma=2.0, depth_sigma=None, window_radius=None):
        self.spatial_sigma = spatial_sigma
        self.depth_sigma = depth_sigma
        self.window_radius = window_radius

    def _params(self) -> LevelingParams:
        return LevelingParams(
            spatial_sigma=self.spatial_sigma,
            depth_sigma=self.depth_sigma,
            window_radius=self.window_radius,
        )

    def fit(self, X=None, y=None):
        self._params()
        return self

    def transform(self, X) -> DepthMap:
        if not isinstance(X, DepthMap):
            X = DepthMap(z=np.asarray(X, dtype=float), pixel_pitch=1.0)
        return level_depth(X, self._params())

    def fit_transform(self, X, y=None):
        return self.fit(X, y).transform(X)


class ViaInspector(_Stateless, BaseEstimator):
    """Depth map to via metrics (depth, diameter, slice profiles)."""

    def __init__(self, slice_count=5):
        self.slice_count = slice_count

    def fit(self, X=None, y=None):
        if self.slice_count < 1:
            raise InputError("slice_count must be >= 1")
        return self

    def predict(self, X) -> ViaMeasurement:
        if not isinstance(X, DepthMap):
            X = DepthMap(z=np.asarray(X, dtype=float), pixel_pitch=1.0)
        return measure_via(X, self.slice_count)
