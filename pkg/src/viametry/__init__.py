"""Photometric-stereo depth reconstruction and metrology for blind micro-vias."""

from .errors import ComputationError, InputError, ViametryError
from .estimators import DepthLeveler, DepthReconstructor, NormalEstimator, ViaInspector
from .geometry import ObjectiveSpec, SubstrateSpec, light_height_range
from .integration import DepthMap, dct2, detrend, divergence, idct2, integrate, poisson_solve
from .leveling import LevelingParams, level_depth, proximity_filter, surface_mean
from .metrology import (
    Circle,
    ComparisonReport,
    SliceProfile,
    ViaMeasurement,
    compare_to_reference,
    extract_slice_contour,
    fit_lsc,
    measure_via,
    roundness,
    surface_reference,
)
from .photometric import (
    GradientField,
    ImageStack,
    LightSet,
    NormalField,
    estimate_normals,
    normalize_lights,
    normals_to_gradients,
)
from .synthetic import SceneSpec, ViaSpec, analytic_depth, analytic_normals, render_scene

__version__ = "0.1.0"

__all__ = [
    "Circle",
    "ComparisonReport",
    "ComputationError",
    "DepthLeveler",
    "DepthMap",
    "DepthReconstructor",
    "GradientField",
    "ImageStack",
    "InputError",
    "LevelingParams",
    "LightSet",
    "NormalEstimator",
    "NormalField",
    "ObjectiveSpec",
    "SceneSpec",
    "SliceProfile",
    "SubstrateSpec",
    "ViaInspector",
    "ViaMeasurement",
    "ViaSpec",
    "ViametryError",
    "analytic_depth",
    "analytic_normals",
    "compare_to_reference",
    "dct2",
    "detrend",
    "divergence",
    "estimate_normals",
    "extract_slice_contour",
    "fit_lsc",
    "integrate",
    "idct2",
    "level_depth",
    "light_height_range",
    "measure_via",
    "normalize_lights",
    "normals_to_gradients",
    "poisson_solve",
    "proximity_filter",
    "render_scene",
    "roundness",
    "surface_mean",
    "surface_reference",
    "__version__",
]
