"""Dark-field illumination placement geometry.

An oblique light at lateral offset r and height h hits the sample at
incidence angle atan(r / h) from the vertical.  Dark-field imaging requires
that angle to exceed twice the objective's aperture angle (so the specular
lobe misses the aperture), while staying below the substrate's critical
angle (so refracted light enters the substrate instead of reflecting
totally).  Those two bounds translate into an admissible height interval
for a given offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidIndex, InvalidNA, NonpositiveOffset


@dataclass
class ObjectiveSpec:
    """Microscope objective: numerical aperture and immersion index."""

    numerical_aperture: float
    immersion_index: float = 1.0

    def __post_init__(self):
        if self.immersion_index <= 0 or not math.isfinite(self.immersion_index):
            raise InvalidIndex("immersion_index must be positive and finite")
        if not (0 < self.numerical_aperture < self.immersion_index):
            raise InvalidNA(
                "numerical aperture must satisfy 0 < NA < immersion_index"
            )


@dataclass
class SubstrateSpec:
    """Substrate optical data: refractive index and a display label."""

    refractive_index: float
    name: str = ""

    def __post_init__(self):
        if not (
            math.isfinite(self.refractive_index) and self.refractive_index > 1
        ):
            raise InvalidIndex("substrate refractive_index must exceed 1")


def aperture_angle(obj: ObjectiveSpec) -> float:
    """Objective half acceptance angle, asin(NA / immersion_index), radians."""
    return math.asin(obj.numerical_aperture / obj.immersion_index)


def critical_angle(sub: SubstrateSpec) -> float:
    """Total-internal-reflection angle of the substrate-air exit interface,
    asin(1 / n), radians."""
    return math.asin(1.0 / sub.refractive_index)


def critical_angle_between(n_from: float, n_to: float) -> float:
    """Critical angle for an arbitrary interface pair, asin(n_to / n_from);
    requires propagation from the denser medium (n_from > n_to > 0)."""
    if not (n_from > n_to > 0):
        raise InvalidIndex(
            "total internal reflection requires n_from > n_to > 0"
        )
    return math.asin(n_to / n_from)


def light_height_range(
    obj: ObjectiveSpec,
    sub: SubstrateSpec,
    lateral_offset: float,
) -> tuple[float, float] | None:
    """Admissible light heights (millimeters) for a lateral offset r.

    The incidence angle alpha(h) = atan(r / h) must satisfy
    2 * aperture_angle < alpha < critical_angle, so h ranges over
    (r / tan(critical_angle), r / tan(2 * aperture_angle)).  Returns None
    when no height satisfies both bounds (2-theta at or beyond the critical
    angle, or at or beyond grazing).
    """
    if lateral_offset <= 0:
        raise NonpositiveOffset("lateral offset must be positive")
    two_theta = 2.0 * aperture_angle(obj)
    theta_crit = critical_angle(sub)
    if two_theta >= theta_crit or two_theta >= math.pi / 2.0:
        return None
    return (
        lateral_offset / math.tan(theta_crit),
        lateral_offset / math.tan(two_theta),
    )
