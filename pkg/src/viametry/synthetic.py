"""Synthetic Lambertian scenes of blind micro-vias with exact ground truth.

Parametric via craters (straight tapered walls, or cosine-blended walls with
smooth rim and floor transitions) are evaluated in closed form, so depth,
gradients and normals are known exactly at every pixel center.  Rendering
applies the Lambertian model per light, an optional radial horizon test for
cast shadows inside the via, and reproducible Gaussian intensity noise.

Conventions: z = 0 on the wafer surface, z = -depth on the via floor; x
grows with columns, y with rows; pixel (row, col) samples the physical point
((col + 0.5) * pitch, (row + 0.5) * pitch).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, OverlappingVias
from .integration import DepthMap
from .photometric import ImageStack, LightSet, NormalField

WALL_PROFILES = ("straight-taper", "cosine-rounded-rim")
SHADOW_MODELS = ("none", "horizon")

# Ground-truth masking limit: walls steeper than this (85 degrees from
# horizontal) are not recoverable by Lambertian photometric stereo.
MAX_TRUE_SLOPE = np.tan(np.deg2rad(85.0))

# Harmonic coefficients of the rim perturbation are fixed for
# reproducibility; eight harmonics, L1-normalized so |h| <= 1.
_RIM_HARMONICS = 8
_RIM_SEED = 714025


@dataclass
class ViaSpec:
    """One blind via: a crater of depth ``depth`` whose radius shrinks from
    ``radius_top`` at the surface to ``radius_bottom`` at the floor.

    ``rim_noise_amplitude`` perturbs the rim radius azimuthally with a fixed
    band-limited profile, imitating irregular rims of laser-drilled vias.
    All lengths in micrometers.
    """

    center: tuple[float, float]
    radius_top: float
    radius_bottom: float
    depth: float
    wall_profile: str = "straight-taper"
    rim_noise_amplitude: float = 0.0

    def __post_init__(self):
        cx, cy = self.center
        self.center = (float(cx), float(cy))
        if not (self.radius_top >= self.radius_bottom > 0):
            raise InputError("need radius_top >= radius_bottom > 0")
        if self.depth <= 0:
            raise InputError("depth must be positive")
        if self.rim_noise_amplitude < 0:
            raise InputError("rim_noise_amplitude must be >= 0")
        if self.rim_noise_amplitude > 0 and (
            self.rim_noise_amplitude >= self.radius_top - self.radius_bottom
        ):
            raise InputError(
                "rim_noise_amplitude must be smaller than the wall width "
                "(radius_top - radius_bottom)"
            )
        if self.wall_profile not in WALL_PROFILES:
            raise InputError(
                f"wall_profile must be one of {WALL_PROFILES}, "
                f"got {self.wall_profile!r}"
            )

    @property
    def max_top_radius(self) -> float:
        return self.radius_top + self.rim_noise_amplitude


@dataclass
class SceneSpec:
    """A raster of wafer surface containing non-overlapping vias."""

    width: int
    height: int
    pixel_pitch: float
    vias: list = field(default_factory=list)
    albedo: float = 0.8
    noise_sigma: float = 0.0
    shadow_model: str = "horizon"

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InputError("raster dimensions must be >= 1")
        if self.pixel_pitch <= 0:
            raise InputError("pixel_pitch must be positive")
        if not (0 < self.albedo <= 1):
            raise InputError("albedo must lie in (0, 1]")
        if self.noise_sigma < 0:
            raise InputError("noise_sigma must be >= 0")
        if self.shadow_model not in SHADOW_MODELS:
            raise InputError(
                f"shadow_model must be one of {SHADOW_MODELS}, "
                f"got {self.shadow_model!r}"
            )
        for i, a in enumerate(self.vias):
            for b in self.vias[i + 1:]:
                dist = np.hypot(
                    a.center[0] - b.center[0], a.center[1] - b.center[1]
                )
                if dist <= a.max_top_radius + b.max_top_radius:
                    raise OverlappingVias(
                        f"vias at {a.center} and {b.center} overlap"
                    )


def _pixel_grid(scene: SceneSpec):
    """Physical (x, y) micrometer coordinates of every pixel center."""
    xs = (np.arange(scene.width) + 0.5) * scene.pixel_pitch
    ys = (np.arange(scene.height) + 0.5) * scene.pixel_pitch
    return np.meshgrid(xs, ys)


def _rim_shape(phi: np.ndarray):
    """Band-limited azimuthal profile h(phi) with |h| <= 1, and dh/dphi."""
    rng = np.random.default_rng(_RIM_SEED)
    k = np.arange(1, _RIM_HARMONICS + 1, dtype=float)
    a = rng.standard_normal(_RIM_HARMONICS)
    b = rng.standard_normal(_RIM_HARMONICS)
    scale = np.sum(np.hypot(a, b))
    a /= scale
    b /= scale
    kphi = phi[..., None] * k
    cos_k, sin_k = np.cos(kphi), np.sin(kphi)
    h = cos_k @ a + sin_k @ b
    dh = cos_k @ (k * b) - sin_k @ (k * a)
    return h, dh


def _via_field(via: ViaSpec, xx: np.ndarray, yy: np.ndarray, pitch: float):
    """Closed-form (z, p, q, good) of one via sampled at pixel centers.

    z is the height (<= 0), p and q the exact slopes, good the ground-truth
    recoverability mask (False on near-vertical walls and on raster cells
    straddling a cliff).
    """
    dx = xx - via.center[0]
    dy = yy - via.center[1]
    r = np.hypot(dx, dy)
    phi = np.arctan2(dy, dx)

    if via.rim_noise_amplitude > 0:
        h, dh = _rim_shape(phi)
        rt = via.radius_top + via.rim_noise_amplitude * h
        drt = via.rim_noise_amplitude * dh
    else:
        rt = np.full_like(r, via.radius_top)
        drt = np.zeros_like(r)
    rb = via.radius_bottom

    z = np.zeros_like(r)
    p = np.zeros_like(r)
    q = np.zeros_like(r)
    good = np.ones(r.shape, dtype=bool)

    bottom = r <= rb
    z[bottom] = -via.depth

    wall = (r > rb) & (r < rt)
    if np.any(wall):
        rw = r[wall]
        width = rt[wall] - rb
        if via.wall_profile == "straight-taper":
            z[wall] = -via.depth * (rt[wall] - rw) / width
            dz_dr = via.depth / width
            dz_dphi = -via.depth * drt[wall] * (rw - rb) / width**2
        else:
            t = (rw - rb) / width
            z[wall] = -via.depth * (1.0 + np.cos(np.pi * t)) / 2.0
            dz_dt = via.depth * np.pi * np.sin(np.pi * t) / 2.0
            dz_dr = dz_dt / width
            dz_dphi = -dz_dt * (rw - rb) * drt[wall] / width**2
        cphi = np.cos(phi[wall])
        sphi = np.sin(phi[wall])
        p[wall] = dz_dr * cphi - dz_dphi * sphi / rw
        q[wall] = dz_dr * sphi + dz_dphi * cphi / rw
        good[wall] = np.hypot(p[wall], q[wall]) <= MAX_TRUE_SLOPE

    if via.radius_top == via.radius_bottom:
        # Vertical cliff: no wall band exists, so flag the cells that
        # straddle the discontinuity instead.
        good &= np.abs(r - via.radius_top) > 0.5 * pitch

    return z, p, q, good


def _scene_field(scene: SceneSpec):
    """Combined (z, p, q, good) over all vias (supports are disjoint)."""
    xx, yy = _pixel_grid(scene)
    z = np.zeros_like(xx)
    p = np.zeros_like(xx)
    q = np.zeros_like(xx)
    good = np.ones(xx.shape, dtype=bool)
    for via in scene.vias:
        vz, vp, vq, vgood = _via_field(via, xx, yy, scene.pixel_pitch)
        z += vz
        p += vp
        q += vq
        good &= vgood
    return z, p, q, good


def analytic_depth(scene: SceneSpec) -> DepthMap:
    """Exact height raster: 0 on the wafer surface, -depth on via floors."""
    z, _, _, _ = _scene_field(scene)
    return DepthMap(z=z, pixel_pitch=scene.pixel_pitch)


def _raw_normals(p: np.ndarray, q: np.ndarray):
    norm = np.sqrt(p * p + q * q + 1.0)
    n = np.empty(p.shape + (3,))
    n[..., 0] = -p / norm
    n[..., 1] = -q / norm
    n[..., 2] = 1.0 / norm
    return n


def analytic_normals(scene: SceneSpec) -> NormalField:
    """Exact unit normals with the recoverability mask applied.

    Masked pixels (walls steeper than 85 degrees, cliff cells) carry the
    (0, 0, 1) sentinel and zero albedo, like solver output.
    """
    _, p, q, good = _scene_field(scene)
    n = _raw_normals(p, q)
    n[~good] = (0.0, 0.0, 1.0)
    albedo = np.where(good, scene.albedo, 0.0)
    return NormalField(normals=n, albedo=albedo, mask=good)


def _horizon_shadow(
    via: ViaSpec,
    xx: np.ndarray,
    yy: np.ndarray,
    z: np.ndarray,
    light: np.ndarray,
) -> np.ndarray:
    """True where a via-interior pixel cannot see the light.

    Radial horizon test: the ray from the pixel toward the light is blocked
    when it crosses the cylinder through the (unperturbed) rim circle below
    the surface plane.
    """
    lx, ly, lz = light
    u2 = lx * lx + ly * ly
    inside = z < 0
    if u2 < 1e-30:
        return np.zeros_like(inside)  # vertical light reaches any floor

    dx = xx - via.center[0]
    dy = yy - via.center[1]
    b = dx * lx + dy * ly
    c = dx * dx + dy * dy - via.radius_top**2
    disc = b * b - u2 * c
    with np.errstate(invalid="ignore"):
        s = (-b + np.sqrt(np.maximum(disc, 0.0))) / u2
    crossing = (disc >= 0.0) & (s >= 0.0)
    return inside & crossing & (z + s * lz < 0.0)


def render_scene(scene: SceneSpec, lights: LightSet, seed: int = 0) -> ImageStack:
    """Render one Lambertian frame per light direction.

    Intensity is ``albedo * max(0, n . l)`` from the exact analytic normals
    (including walls too steep for the ground-truth mask); the horizon
    shadow model zeroes via-interior pixels that cannot see the light; noise
    is additive Gaussian, clamped to [0, 1], reproducible for a fixed seed.
    """
    xx, yy = _pixel_grid(scene)
    z, p, q, _ = _scene_field(scene)
    n = _raw_normals(p, q)

    frames = np.empty((lights.count, scene.height, scene.width))
    for k, light in enumerate(lights.directions):
        shading = np.maximum(0.0, n @ light)
        if scene.shadow_model == "horizon":
            for via in scene.vias:
                shading[_horizon_shadow(via, xx, yy, z, light)] = 0.0
        frames[k] = scene.albedo * shading

    if scene.noise_sigma > 0:
        rng = np.random.default_rng(seed)
        frames += rng.normal(0.0, scene.noise_sigma, size=frames.shape)
    np.clip(frames, 0.0, 1.0, out=frames)
    return ImageStack(frames=frames, pixel_pitch=scene.pixel_pitch)
