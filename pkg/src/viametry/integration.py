"""Gradient-field integration to a depth raster.

The depth map is the least-squares solution of the Poisson equation
``lap z = div (p, q)`` with homogeneous Neumann boundaries, solved spectrally
in the orthonormal DCT-II basis.  Cosine modes diagonalize the discrete
5-point Laplacian, so the solve is one forward transform, a pointwise
division by the modal eigenvalues, and one inverse transform.  A final
detrend removes any linear trend and shifts the surface so the minimum
depth is exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import DegenerateFit, EmptyRaster, InputError, ShapeMismatch
from .photometric import GradientField


@dataclass
class DepthMap:
    """A per-pixel height raster in micrometers with its pixel pitch."""

    z: np.ndarray
    pixel_pitch: float

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        if self.z.ndim != 2:
            raise ShapeMismatch("depth raster must be 2-D")
        if self.z.size == 0:
            raise EmptyRaster("depth raster is empty")
        if self.pixel_pitch <= 0:
            raise InputError("pixel_pitch must be positive")
        if not np.all(np.isfinite(self.z)):
            raise InputError("depth values must be finite")

    @property
    def height(self) -> int:
        return self.z.shape[0]

    @property
    def width(self) -> int:
        return self.z.shape[1]


def _as_raster(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ShapeMismatch(f"{name} expects a 2-D array")
    if a.size == 0:
        raise EmptyRaster(f"{name} got an empty array")
    return a


def dct2(a: np.ndarray) -> np.ndarray:
    """Orthonormal 2-D DCT-II.  Exact inverse of :func:`idct2`."""
    return scipy.fft.dctn(_as_raster(a, "dct2"), type=2, norm="ortho")


def idct2(a: np.ndarray) -> np.ndarray:
    """Orthonormal 2-D inverse DCT (DCT-III)."""
    return scipy.fft.idctn(_as_raster(a, "idct2"), type=2, norm="ortho")


def divergence(grad: GradientField) -> np.ndarray:
    """Divergence of the gradient field, the Poisson right-hand side.

    Uses central differences in the interior and one-sided differences on
    the borders; masked-out pixels contribute zero slope.  Units are
    rise per pixel-pitch, like the gradients themselves.
    """
    p = _as_raster(grad.p, "divergence")
    q = _as_raster(grad.q, "divergence")
    if p.shape != q.shape:
        raise ShapeMismatch("p and q must have identical shapes")
    dpdx = np.gradient(p, axis=1) if p.shape[1] > 1 else np.zeros_like(p)
    dqdy = np.gradient(q, axis=0) if p.shape[0] > 1 else np.zeros_like(q)
    return dpdx + dqdy


def poisson_solve(f: np.ndarray) -> np.ndarray:
    """Solve ``lap z = f`` under homogeneous Neumann boundary conditions.

    Each cosine mode (u, v) is divided by its Laplacian eigenvalue
    ``2 cos(pi u / M) + 2 cos(pi v / N) - 4``; the zero mode is pinned to 0,
    so the result has an arbitrary (zero-sum) level.
    """
    f = _as_raster(f, "poisson_solve")
    if not np.all(np.isfinite(f)):
        raise InputError("poisson_solve requires finite input")
    rows, cols = f.shape
    fhat = dct2(f)
    denom = (
        2.0 * np.cos(np.pi * np.arange(cols) / cols)[None, :]
        + 2.0 * np.cos(np.pi * np.arange(rows) / rows)[:, None]
        - 4.0
    )
    denom[0, 0] = 1.0  # avoid 0/0; the DC mode is pinned next
    zhat = fhat / denom
    zhat[0, 0] = 0.0
    return idct2(zhat)


def detrend(
    z,
    pixel_pitch: float = 1.0,
    mask: np.ndarray | None = None,
) -> DepthMap:
    """Remove the least-squares plane and shift so ``min(z) == 0``.

    The plane is fit over ``mask`` when given (True = use pixel) but
    subtracted everywhere; the final offset uses the full raster.

    Raises
    ------
    DegenerateFit
        If the fit support is smaller than 3 pixels or collinear.
    """
    if isinstance(z, DepthMap):
        pixel_pitch = z.pixel_pitch
        z = z.z
    z = _as_raster(z, "detrend")
    if not np.all(np.isfinite(z)):
        raise InputError("detrend requires finite input")
    rows, cols = z.shape
    yy, xx = np.mgrid[0:rows, 0:cols]
    if mask is None:
        sel = np.ones(z.shape, dtype=bool)
    else:
        sel = np.asarray(mask, dtype=bool)
        if sel.shape != z.shape:
            raise ShapeMismatch("mask shape must match the depth raster")
    n_sel = int(sel.sum())
    if n_sel < 3:
        raise DegenerateFit("plane fit needs at least 3 pixels")

    a = np.column_stack([xx[sel], yy[sel], np.ones(n_sel)])
    coeff, _, rank, _ = np.linalg.lstsq(a, z[sel], rcond=None)
    if rank < 3:
        raise DegenerateFit("plane fit support is collinear")

    flat = z - (coeff[0] * xx + coeff[1] * yy + coeff[2])
    flat -= flat.min()
    return DepthMap(z=flat, pixel_pitch=pixel_pitch)


def integrate(grad: GradientField, pixel_pitch: float) -> DepthMap:
    """Full integration pipeline: divergence, Poisson solve, scaling from
    per-pixel slopes to micrometers, then detrending.

    Masked pixels enter the solve with zero gradient and are excluded from
    the detrending plane fit.
    """
    if pixel_pitch <= 0:
        raise InputError("pixel_pitch must be positive")
    f = divergence(grad)
    z = poisson_solve(f) * pixel_pitch
    return detrend(z, pixel_pitch, mask=grad.mask)
