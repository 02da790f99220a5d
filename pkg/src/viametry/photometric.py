"""Surface normal and albedo estimation from multi-illumination image stacks.

The Lambertian image formation model is ``I = rho * max(0, n . l)``.  With at
least three non-coplanar light directions the per-pixel moment vector
``m = rho * n`` is the least-squares solution of ``L m = I``; its norm is the
albedo and its direction the surface normal.

Coordinate frame: image x grows rightward (columns), y grows downward (rows),
z points from the wafer toward the camera.  Gradients are expressed per
pixel-pitch, so a physical 45 degree slope has ``p = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BelowPlane,
    InputError,
    RankDeficientLights,
    ShapeMismatch,
    ZeroVector,
)

MIN_LIGHTS = 3
_UNIT_TOL = 1e-9
_MIN_ALBEDO = 1e-9


@dataclass
class ImageStack:
    """K co-registered grayscale frames with a physical pixel pitch.

    Parameters
    ----------
    frames : ndarray, shape (K, H, W)
        Linear intensities in [0, 1], one raster per illumination.
    pixel_pitch : float
        Micrometers per pixel, uniform in x and y.
    """

    frames: np.ndarray
    pixel_pitch: float

    def __post_init__(self):
        # K >= 3 is enforced where it matters: the stack loader and the
        # rank-3 check of the solver.  The renderer may legitimately
        # produce single-light stacks.
        self.frames = np.asarray(self.frames, dtype=float)
        if self.frames.ndim != 3 or self.frames.shape[0] < 1:
            raise ShapeMismatch("frames must be a (K, H, W) array")
        if not np.all(np.isfinite(self.frames)):
            raise InputError("frame intensities must be finite")
        if self.frames.min() < 0.0 or self.frames.max() > 1.0:
            raise InputError("frame intensities must lie in [0, 1]")
        if self.pixel_pitch <= 0:
            raise InputError("pixel_pitch must be positive")

    @property
    def count(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]


@dataclass
class LightSet:
    """Unit illumination directions, one per frame of the paired stack."""

    directions: np.ndarray  # (K, 3)

    def __post_init__(self):
        self.directions = np.asarray(self.directions, dtype=float)
        if self.directions.ndim != 2 or self.directions.shape[1] != 3:
            raise ShapeMismatch("directions must be a (K, 3) array")
        norms = np.linalg.norm(self.directions, axis=1)
        if np.any(np.abs(norms - 1.0) > _UNIT_TOL):
            raise InputError("light directions must be unit vectors")
        if np.any(self.directions[:, 2] <= 0):
            raise BelowPlane("light directions must have positive z")

    @property
    def count(self) -> int:
        return self.directions.shape[0]


@dataclass
class NormalField:
    """Per-pixel unit normals, albedo and a validity mask.

    Where ``mask`` is False the normal holds the sentinel (0, 0, 1) and the
    albedo is 0.
    """

    normals: np.ndarray  # (H, W, 3)
    albedo: np.ndarray   # (H, W)
    mask: np.ndarray     # (H, W) bool


@dataclass
class GradientField:
    """Per-pixel depth slopes ``p = dz/dx`` and ``q = dz/dy`` (y-down frame).

    Masked-out pixels carry zero slope so the field stays finite everywhere.
    """

    p: np.ndarray
    q: np.ndarray
    mask: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        if self.p.shape != self.q.shape:
            raise ShapeMismatch("p and q must have identical shapes")
        if self.mask is None:
            self.mask = np.ones(self.p.shape, dtype=bool)
        else:
            self.mask = np.asarray(self.mask, dtype=bool)
            if self.mask.shape != self.p.shape:
                raise ShapeMismatch("mask shape must match the gradients")
            if not self.mask.all():
                self.p = np.where(self.mask, self.p, 0.0)
                self.q = np.where(self.mask, self.q, 0.0)
        if not (np.all(np.isfinite(self.p)) and np.all(np.isfinite(self.q))):
            raise InputError("gradients must be finite")


def normalize_lights(raw_positions) -> LightSet:
    """Turn physical light positions (mm, relative to the sample center)
    into unit direction vectors, preserving order.

    Raises
    ------
    ZeroVector
        If a position has norm below 1e-12.
    BelowPlane
        If a position has z <= 0 (light not above the wafer plane).
    """
    pos = np.asarray(raw_positions, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 3:
        raise ShapeMismatch("positions must be a (K, 3) array")
    norms = np.linalg.norm(pos, axis=1)
    if np.any(norms < 1e-12):
        raise ZeroVector("a light position vector has (near-)zero norm")
    if np.any(pos[:, 2] <= 0):
        raise BelowPlane("a light position lies on or below the sample plane")
    return LightSet(pos / norms[:, None])


def estimate_normals(
    stack: ImageStack,
    lights: LightSet,
    shadow_threshold: float = 0.01,
) -> NormalField:
    """Recover per-pixel surface normals and albedo by least squares.

    Every pixel with at least 3 intensities above ``shadow_threshold`` is
    solved; when 4 or more are above it, the sub-threshold samples are
    dropped from that pixel's system (shadow rejection).  With exactly 3
    usable samples the full system is solved unmodified.  Pixels with fewer
    than 3 usable samples, vanishing albedo, or a recovered normal that does
    not face the camera are masked out.

    Raises
    ------
    ShapeMismatch
        If the stack frame count differs from the light count.
    RankDeficientLights
        If the light direction matrix has rank below 3.
    """
    L = lights.directions
    if stack.count != lights.count:
        raise ShapeMismatch(
            f"stack has {stack.count} frames but light set has {lights.count}"
        )
    if np.linalg.matrix_rank(L) < 3:
        raise RankDeficientLights("light directions are coplanar (rank < 3)")

    k = stack.count
    h, w = stack.height, stack.width
    intensities = stack.frames.reshape(k, -1).T  # (n_pixels, K)
    lit = intensities > shadow_threshold
    n_lit = lit.sum(axis=1)

    moments = np.zeros((intensities.shape[0], 3))

    # Full solve: every sample usable, or exactly 3 usable (no rejection).
    full = (n_lit == k) | (n_lit == 3)
    if np.any(full):
        moments[full] = intensities[full] @ np.linalg.pinv(L).T

    # Shadow rejection: solve with the lit subset when >= 4 samples remain.
    partial = (n_lit >= 4) & (n_lit < k)
    if np.any(partial):
        rows = np.flatnonzero(partial)
        patterns, inverse = np.unique(lit[rows], axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        for i, pattern in enumerate(patterns):
            sel = rows[inverse == i]
            sub = np.flatnonzero(pattern)
            moments[sel] = intensities[np.ix_(sel, sub)] @ np.linalg.pinv(L[sub]).T

    albedo = np.linalg.norm(moments, axis=1)
    valid = (n_lit >= 3) & (albedo >= _MIN_ALBEDO) & (moments[:, 2] > 0)

    normals = np.zeros_like(moments)
    normals[:, 2] = 1.0
    normals[valid] = moments[valid] / albedo[valid, None]
    albedo = np.where(valid, albedo, 0.0)

    return NormalField(
        normals=normals.reshape(h, w, 3),
        albedo=albedo.reshape(h, w),
        mask=valid.reshape(h, w),
    )


def normals_to_gradients(field: NormalField) -> GradientField:
    """Convert unit normals to depth slopes ``p = -nx/nz``, ``q = -ny/nz``.

    The surface convention is z(x, y) with normal parallel to (-p, -q, 1);
    masked pixels get zero slope.
    """
    nz = np.where(field.mask, field.normals[..., 2], 1.0)
    p = np.where(field.mask, -field.normals[..., 0] / nz, 0.0)
    q = np.where(field.mask, -field.normals[..., 1] / nz, 0.0)
    return GradientField(p=p, q=q, mask=field.mask.copy())
