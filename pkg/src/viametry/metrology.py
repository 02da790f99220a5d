"""Depth-map metrology: slice contours, least-squares circles, roundness.

A via is measured by slicing its depth map at fixed fractions of the
detected depth, fitting the least-squares circle (LSC) to each iso-contour,
and reporting radius and peak-to-valley radial deviation (roundness) per
slice.  The LSC is the metrology-standard geometric fit: an algebraic
closed-form initialization refined by Gauss-Newton on the true radial
objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from skimage import measure

from .errors import (
    CollinearPoints,
    InputError,
    LengthMismatch,
    NoContour,
    NoVia,
    OpenContourOnly,
    TooFewPoints,
    ViametryError,
)
from .integration import DepthMap

_GN_MAX_STEPS = 50
_GN_STEP_TOL = 1e-12
_HIST_BINS = 256


@dataclass
class Circle:
    """A fitted circle: center (cx, cy) and radius r, micrometers."""

    cx: float
    cy: float
    r: float

    def __post_init__(self):
        if not np.isfinite([self.cx, self.cy, self.r]).all():
            raise InputError("circle parameters must be finite")
        if self.r <= 0:
            raise InputError("circle radius must be positive")


@dataclass
class SliceProfile:
    """Circle fit of one depth slice: level is micrometers below the
    surface reference, roundness the peak-to-valley radial deviation."""

    level: float
    circle: Circle
    roundness: float
    point_count: int

    def __post_init__(self):
        if self.level < 0:
            raise InputError("slice level must be >= 0")
        if self.roundness < 0:
            raise InputError("roundness must be >= 0")
        if self.point_count < 3:
            raise InputError("a slice profile needs at least 3 points")


@dataclass
class ViaMeasurement:
    """Depth, diameter, and the roundness-vs-depth profile of one via."""

    depth: float
    diameter: float
    profiles: list = field(default_factory=list)

    def __post_init__(self):
        if self.depth <= 0 or self.diameter <= 0:
            raise InputError("depth and diameter must be positive")
        levels = [p.level for p in self.profiles]
        if levels != sorted(levels):
            raise InputError("profiles must be sorted by ascending level")


@dataclass
class ComparisonRow:
    via_id: int
    ref_depth: float
    meas_depth: float
    ref_diameter: float
    meas_diameter: float

    @property
    def depth_error(self) -> float:
        return self.meas_depth - self.ref_depth

    @property
    def depth_error_pct(self) -> float:
        return 100.0 * self.depth_error / self.ref_depth

    @property
    def diameter_error(self) -> float:
        return self.meas_diameter - self.ref_diameter

    @property
    def diameter_error_pct(self) -> float:
        return 100.0 * self.diameter_error / self.ref_diameter


@dataclass
class ComparisonReport:
    rows: list

    @property
    def mape_depth(self) -> float:
        return float(np.mean([abs(r.depth_error_pct) for r in self.rows]))

    @property
    def mape_diameter(self) -> float:
        return float(np.mean([abs(r.diameter_error_pct) for r in self.rows]))


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InputError("points must be an (N, 2) array of (x, y)")
    if not np.all(np.isfinite(pts)):
        raise InputError("points must be finite")
    return pts


def _radial_distances(pts: np.ndarray, cx: float, cy: float) -> np.ndarray:
    return np.hypot(pts[:, 0] - cx, pts[:, 1] - cy)


def fit_lsc(points) -> Circle:
    """Least-squares circle: minimizes the sum of squared radial deviations.

    Starts from the algebraic (Kasa) closed-form fit, then refines with at
    most 50 Gauss-Newton steps on the geometric objective, halving any step
    that would increase it; stops when the accepted step norm drops below
    1e-12.

    Raises
    ------
    TooFewPoints
        Fewer than 3 points.
    CollinearPoints
        All points on one line (no finite circle).
    """
    pts = _as_points(points)
    if len(pts) < 3:
        raise TooFewPoints("circle fitting needs at least 3 points")
    centered = pts - pts.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    if svals[1] <= 1e-12 * max(svals[0], 1.0):
        raise CollinearPoints("points are collinear; no circle fits")

    # Algebraic initialization: linear in (cx, cy, cx^2 + cy^2 - r^2).
    a = np.column_stack([2.0 * pts[:, 0], 2.0 * pts[:, 1], np.ones(len(pts))])
    b = (pts**2).sum(axis=1)
    (cx, cy, c), *_ = np.linalg.lstsq(a, b, rcond=None)
    r = float(np.sqrt(max(c + cx * cx + cy * cy, 1e-300)))

    def objective(params):
        d = _radial_distances(pts, params[0], params[1])
        return float(np.sum((d - params[2]) ** 2))

    params = np.array([cx, cy, r])
    best = objective(params)
    for _ in range(_GN_MAX_STEPS):
        d = np.maximum(_radial_distances(pts, params[0], params[1]), 1e-30)
        residuals = d - params[2]
        jac = np.column_stack([
            -(pts[:, 0] - params[0]) / d,
            -(pts[:, 1] - params[1]) / d,
            -np.ones(len(pts)),
        ])
        step, *_ = np.linalg.lstsq(jac, -residuals, rcond=None)
        scale = 1.0
        accepted = None
        for _ in range(30):
            trial = params + scale * step
            if objective(trial) <= best:
                accepted = trial
                break
            scale *= 0.5
        if accepted is None:
            break
        step_norm = float(np.linalg.norm(scale * step))
        params = accepted
        best = objective(params)
        if step_norm < _GN_STEP_TOL:
            break

    return Circle(cx=float(params[0]), cy=float(params[1]), r=float(params[2]))


def roundness(points, circle: Circle) -> float:
    """Peak-to-valley radial deviation about the circle's center."""
    pts = _as_points(points)
    if len(pts) < 3:
        raise TooFewPoints("roundness needs at least 3 points")
    d = _radial_distances(pts, circle.cx, circle.cy)
    return float(d.max() - d.min())


def surface_reference(z) -> float:
    """The prevailing surface level: center of the tallest histogram bin
    (256 bins).  More robust than the raster maximum under noise."""
    z = np.asarray(z, dtype=float)
    if z.max() == z.min():
        # constant raster; histogram binning would offset the level
        return float(z.flat[0])
    counts, edges = np.histogram(z.ravel(), bins=_HIST_BINS)
    i = int(counts.argmax())
    return float(0.5 * (edges[i] + edges[i + 1]))


def extract_slice_contour(depth_map: DepthMap, level: float) -> np.ndarray:
    """Iso-contour of the depth raster ``level`` micrometers below the
    surface reference, as (N, 2) physical (x, y) micrometer points.

    Marching squares with linear interpolation; of the closed contours the
    one with the most vertices is returned.  Pixel (row, col) is taken to
    sample the physical point ((col + 0.5), (row + 0.5)) * pixel_pitch.

    Raises
    ------
    NoContour
        Level outside the raster's depth range, or no contour there.
    OpenContourOnly
        Contours exist but none is closed (via cut by the image border).
    """
    z = depth_map.z
    ref = surface_reference(z)
    max_depth = ref - float(z.min())
    if not (0.0 < level < max_depth):
        raise NoContour(
            f"slice level {level} outside the via depth range (0, {max_depth})"
        )
    contours = measure.find_contours(z, ref - level)
    closed = [c for c in contours if np.array_equal(c[0], c[-1])]
    if not closed:
        if contours:
            raise OpenContourOnly(
                "only open contours at this level; via truncated by border"
            )
        raise NoContour(f"no contour at level {level}")
    longest = max(closed, key=len)
    # find_contours yields (row, col); drop the duplicated closing vertex.
    pts = longest[:-1]
    return (pts[:, ::-1] + 0.5) * depth_map.pixel_pitch


def measure_via(depth_map: DepthMap, slice_count: int = 5) -> ViaMeasurement:
    """Measure the dominant via of a depth map.

    Depth is the surface reference minus the 1st-percentile floor of the
    via region; diameter is twice the LSC radius at the 10%-depth slice;
    profiles are fitted at ``slice_count`` levels placed midpoint-style in
    [5%, 95%] of depth (a single slice lands at 50%).  Slices whose contour
    or fit degenerates are skipped.

    Raises
    ------
    NoVia
        Depth range indistinguishable from the map's noise floor.
    """
    if slice_count < 1:
        raise InputError("slice_count must be >= 1")
    z = depth_map.z
    ref = surface_reference(z)
    detected_range = ref - float(np.percentile(z, 1))
    noise_scale = 1.4826 * float(np.median(np.abs(z - np.median(z))))
    if detected_range <= 0 or detected_range <= 3.0 * noise_scale:
        raise NoVia("depth range is below the map's noise floor")

    region = z <= ref - 0.5 * detected_range
    depth = ref - float(np.percentile(z[region], 1))

    diameter_contour = extract_slice_contour(depth_map, 0.10 * depth)
    diameter = 2.0 * fit_lsc(diameter_contour).r

    profiles = []
    fractions = 0.05 + 0.9 * (np.arange(slice_count) + 0.5) / slice_count
    for frac in fractions:
        level = float(frac * depth)
        try:
            contour = extract_slice_contour(depth_map, level)
            circle = fit_lsc(contour)
            rnd = roundness(contour, circle)
        except ViametryError:
            continue
        profiles.append(
            SliceProfile(
                level=level,
                circle=circle,
                roundness=rnd,
                point_count=len(contour),
            )
        )
    return ViaMeasurement(depth=depth, diameter=diameter, profiles=profiles)


def compare_to_reference(measured, reference) -> ComparisonReport:
    """Tabulate measured depth/diameter against reference pairs, row per
    via, with signed errors; the report exposes the mean absolute
    percentage error per quantity."""
    measured = list(measured)
    reference = list(reference)
    if len(measured) != len(reference):
        raise LengthMismatch(
            f"{len(measured)} measurements vs {len(reference)} references"
        )
    if not measured:
        raise InputError("nothing to compare")
    rows = []
    for i, (m, (ref_depth, ref_diam)) in enumerate(zip(measured, reference)):
        if ref_depth <= 0 or ref_diam <= 0:
            raise InputError("reference depth and diameter must be positive")
        rows.append(
            ComparisonRow(
                via_id=i,
                ref_depth=float(ref_depth),
                meas_depth=m.depth,
                ref_diameter=float(ref_diam),
                meas_diameter=m.diameter,
            )
        )
    return ComparisonReport(rows=rows)
