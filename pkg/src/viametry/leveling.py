"""Depth-map smoothing weighted by proximity to the average depth.

A bilateral-style filter: each output pixel is the Gaussian-windowed average
of its neighborhood, with every sample additionally weighted by how close
its depth lies to the global mean depth.  Unlike a classic bilateral filter
the range kernel is anchored at the map-wide mean, not at the center pixel,
so values near the prevailing surface level dominate and outliers (rim
artifacts, spikes) are pulled toward their surroundings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.ndimage

from .errors import DegenerateWeights, InputError
from .integration import DepthMap

_WEIGHT_FLOOR = 1e-300


@dataclass
class LevelingParams:
    """Filter geometry: spatial kernel width (pixels), depth kernel width
    (micrometers), and the half-size of the square window (pixels).

    ``depth_sigma=None`` resolves to 10% of the map's peak-to-valley range
    at filter time; ``window_radius=None`` resolves to ``ceil(3 *
    spatial_sigma)``.
    """

    spatial_sigma: float = 2.0
    depth_sigma: float | None = None
    window_radius: int | None = None

    def __post_init__(self):
        if self.spatial_sigma <= 0:
            raise InputError("spatial_sigma must be positive")
        if self.depth_sigma is not None and self.depth_sigma <= 0:
            raise InputError("depth_sigma must be positive")
        if self.window_radius is not None and self.window_radius < 1:
            raise InputError("window_radius must be >= 1")

    def resolved(self, z: np.ndarray) -> tuple[float, float, int]:
        """Concrete (spatial_sigma, depth_sigma, window_radius) for a map."""
        ds = self.depth_sigma
        if ds is None:
            span = float(z.max() - z.min())
            ds = 0.1 * span if span > 0 else 1.0
        wr = self.window_radius
        if wr is None:
            wr = math.ceil(3 * self.spatial_sigma)
        return self.spatial_sigma, ds, wr


def depth_weight(z, mean_depth: float, depth_sigma: float):
    """Range-kernel weight exp(-(z - mean)^2 / (2 sigma^2)), in (0, 1]."""
    if depth_sigma <= 0:
        raise InputError("depth_sigma must be positive")
    z = np.asarray(z, dtype=float)
    return np.exp(-((z - mean_depth) ** 2) / (2.0 * depth_sigma**2))


def proximity_filter(
    z: np.ndarray,
    params: LevelingParams,
    mean_depth: float | None = None,
) -> np.ndarray:
    """The raw weighted average, without the final zero-offset.

    Every output pixel is a convex combination of the input samples in its
    window, so it lies within that window's [min, max].
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 2 or z.size == 0:
        raise InputError("expected a non-empty 2-D raster")
    spatial_sigma, depth_sigma, radius = params.resolved(z)
    zbar = float(z.mean()) if mean_depth is None else float(mean_depth)

    w = depth_weight(z, zbar, depth_sigma)
    if scipy.ndimage.maximum_filter(w, size=2 * radius + 1).min() < _WEIGHT_FLOOR:
        raise DegenerateWeights(
            "every sample weight in some window underflowed; "
            "depth_sigma is far too small for this map"
        )

    offsets = np.arange(-radius, radius + 1, dtype=float)
    kernel = np.exp(-(offsets**2) / (2.0 * spatial_sigma**2))

    def blur(a):
        out = scipy.ndimage.convolve1d(a, kernel, axis=0, mode="constant", cval=0.0)
        return scipy.ndimage.convolve1d(out, kernel, axis=1, mode="constant", cval=0.0)

    return blur(w * z) / blur(w)


def level_depth(
    depth_map: DepthMap,
    params: LevelingParams | None = None,
    mean_depth: float | None = None,
) -> DepthMap:
    """Smooth a depth map toward its mean-proximate structure.

    ``mean_depth`` overrides the range-kernel anchor (by default the global
    mean over the full raster, via interior included).  The output is
    re-offset so its minimum is exactly zero.
    """
    if params is None:
        params = LevelingParams()
    out = proximity_filter(depth_map.z, params, mean_depth)
    out -= out.min()
    return DepthMap(z=out, pixel_pitch=depth_map.pixel_pitch)


def surface_mean(z) -> float:
    """Mean over the surface half of the raster (values at or above the
    median), the anchor used by the surface mean-region option."""
    z = np.asarray(z, dtype=float)
    return float(z[z >= np.median(z)].mean())
