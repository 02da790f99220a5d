"""Shared builders for the test suite: light rings, reference scenes, and
the hemisphere-cap gradient field used by the integration tests."""

import math

import numpy as np
import pytest

from viametry import GradientField, LightSet, SceneSpec, ViaSpec


def ring_lights(azimuths_deg, elevation_deg=89.0, include_vertical=True):
    """Unit-vector light set: optional vertical light plus a ring at the
    given elevation."""
    vecs = []
    if include_vertical:
        vecs.append((0.0, 0.0, 1.0))
    el = math.radians(elevation_deg)
    for az_deg in azimuths_deg:
        az = math.radians(az_deg)
        vecs.append((math.cos(el) * math.cos(az),
                     math.cos(el) * math.sin(az),
                     math.sin(el)))
    return LightSet(directions=np.array(vecs, dtype=float))


def seven_lights():
    return ring_lights([k * 60.0 for k in range(6)])


def five_lights():
    return ring_lights([45.0, 135.0, 225.0, 315.0])


def taper_scene(noise_sigma=0.0):
    """Single straight-taper via, 25 to 23 um radius, 50 um deep."""
    via = ViaSpec(center=(64.0, 64.0), radius_top=25.0, radius_bottom=23.0,
                  depth=50.0, wall_profile="straight-taper")
    return SceneSpec(width=256, height=256, pixel_pitch=0.5, vias=[via],
                     albedo=1.0, noise_sigma=noise_sigma,
                     shadow_model="horizon")


def array_scene():
    """2x2 via array on a 512x512 raster."""
    centers = [(64.0, 64.0), (192.0, 64.0), (64.0, 192.0), (192.0, 192.0)]
    vias = [ViaSpec(center=c, radius_top=45.0, radius_bottom=30.0, depth=20.0,
                    wall_profile="straight-taper") for c in centers]
    return SceneSpec(width=512, height=512, pixel_pitch=0.5, vias=vias,
                     albedo=0.8, noise_sigma=0.0, shadow_model="horizon")


def angular_error(n1, n2):
    """Per-pixel angle in radians between two (..., 3) normal arrays.

    atan2 of the cross-product norm keeps full precision for tiny angles,
    where arccos of the dot product saturates near sqrt(eps)."""
    cross = np.linalg.norm(np.cross(n1, n2), axis=-1)
    dot = np.sum(n1 * n2, axis=-1)
    return np.arctan2(cross, dot)


def plane_align_rms(z, ref, mask=None):
    """RMS of (z - ref) after removing the best-fit plane a*x + b*y + c
    from the difference."""
    diff = np.asarray(z, dtype=float) - np.asarray(ref, dtype=float)
    if mask is None:
        mask = np.ones(diff.shape, dtype=bool)
    yy, xx = np.nonzero(mask)
    A = np.column_stack([xx, yy, np.ones(xx.size)])
    coef, *_ = np.linalg.lstsq(A, diff[mask], rcond=None)
    jj, ii = np.meshgrid(np.arange(diff.shape[1]), np.arange(diff.shape[0]))
    resid = diff - (coef[0] * jj + coef[1] * ii + coef[2])
    return float(np.sqrt(np.mean(resid[mask] ** 2)))


def hemisphere_cap_field(size=128, cap_radius=40.0, sphere_radius=80.0):
    """Spherical cap with compact support and its exact gradients.

    Returns (grad, z_true, cap_height). z = sqrt(R^2 - r^2) - sqrt(R^2 - a^2)
    inside r < a and 0 outside; the support stays clear of the raster border
    so the divergence has zero mean.
    """
    c = size / 2.0
    yy, xx = np.meshgrid(np.arange(size) + 0.5, np.arange(size) + 0.5,
                         indexing="ij")
    x = xx - c
    y = yy - c
    r2 = x * x + y * y
    inside = r2 < cap_radius ** 2
    root = np.sqrt(np.maximum(sphere_radius ** 2 - r2, 1e-12))
    base = math.sqrt(sphere_radius ** 2 - cap_radius ** 2)
    z = np.where(inside, root - base, 0.0)
    p = np.where(inside, -x / root, 0.0)
    q = np.where(inside, -y / root, 0.0)
    grad = GradientField(p=p, q=q, mask=np.ones_like(inside, dtype=bool))
    return grad, z, sphere_radius - base


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
