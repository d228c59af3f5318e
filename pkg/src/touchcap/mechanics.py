"""Deflection of the edge-clamped circular diaphragm under uniform pressure.

Closed-form center deflection in the small (linear) and large (cubic
stiffening) regimes, the clamped-plate deflection profile, the geometric
contact model once the diaphragm touches the insulated bottom plate, and
classification into the four operating modes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .materials import Laminate, flexural_rigidity

# Coefficient of the cubic stiffening term in the large-deflection relation
# W0 * (1 + K*(W0/h)^2 + sigma*h*R^2/(16 D)) = P R^4 / (64 D).
STIFFENING_COEFF = 0.488


class OperatingMode(enum.IntEnum):
    """Operating regimes, ordered by increasing pressure."""

    NORMAL = 0
    TRANSITION = 1
    TOUCH = 2
    SATURATION = 3


class DeflectionRegime(enum.Enum):
    SMALL_LINEAR = "small_linear"
    LARGE_NONLINEAR = "large_nonlinear"


@dataclass(frozen=True)
class DeviceGeometry:
    """Geometry and electrostatic stack of one circular sensor element."""

    radius: float  # m
    laminate: Laminate
    gap: float  # m, electrode separation at rest
    builtin_stress: float = 0.0  # Pa, tensile
    dielectric_thickness: float = 0.0  # m, insulator on the bottom electrode
    dielectric_rel_permittivity: float = 1.0
    medium_rel_permittivity: float = 1.0

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("radius must be > 0")
        if self.gap <= 0:
            raise ValueError("gap must be > 0")
        if self.dielectric_thickness < 0:
            raise ValueError("dielectric_thickness must be >= 0")
        if self.builtin_stress < 0:
            raise ValueError("builtin_stress must be >= 0 (tensile only)")
        if self.gap <= self.dielectric_thickness:
            raise ValueError("gap must exceed dielectric_thickness")
        if self.dielectric_rel_permittivity <= 0 or self.medium_rel_permittivity <= 0:
            raise ValueError("relative permittivities must be > 0")

    @property
    def thickness(self) -> float:
        """Total diaphragm thickness h."""
        return self.laminate.total_thickness

    @property
    def travel(self) -> float:
        """Effective travel: gap minus dielectric thickness."""
        return self.gap - self.dielectric_thickness

    @property
    def flexural_rigidity(self) -> float:
        return flexural_rigidity(self.laminate)


@dataclass(frozen=True)
class ModeThresholds:
    """Configuration thresholds separating the four operating modes.

    transition_fraction: W0/travel above which normal mode ends.
    touch_onset_fraction / saturation_fraction: contact radius fractions
    a/R bounding the touch regime.
    """

    transition_fraction: float = 2.0 / 3.0
    touch_onset_fraction: float = 0.05
    saturation_fraction: float = 0.6

    def __post_init__(self) -> None:
        if not 0.0 < self.transition_fraction < 1.0:
            raise ValueError("transition_fraction must be in (0, 1)")
        if not 0.0 < self.touch_onset_fraction < self.saturation_fraction < 1.0:
            raise ValueError("need 0 < touch_onset_fraction < saturation_fraction < 1")


@dataclass(frozen=True)
class DeflectionState:
    """Solved state at one pressure.

    center_deflection is capped at the effective travel once touching;
    the unconstrained value lives on through contact_radius.
    """

    pressure: float
    center_deflection: float
    regime: DeflectionRegime
    contact_radius: float = 0.0

    def __post_init__(self) -> None:
        if self.center_deflection < 0:
            raise ValueError("center_deflection must be >= 0")
        if self.contact_radius < 0:
            raise ValueError("contact_radius must be >= 0")

    @property
    def touched(self) -> bool:
        return self.contact_radius > 0.0


def _stress_term(geom: DeviceGeometry) -> float:
    """Dimensionless built-in stress stiffening sigma*h*R^2 / (16 D)."""
    return (geom.builtin_stress * geom.thickness * geom.radius**2
            / (16.0 * geom.flexural_rigidity))


def small_deflection_center(geom: DeviceGeometry, pressure: float) -> float:
    """Linear center deflection with built-in stress stiffening.

    W0 = (P R^4 / 64 D) / (1 + sigma h R^2 / 16 D)
    """
    if pressure < 0:
        raise ValueError("pressure must be >= 0")
    load = pressure * geom.radius**4 / (64.0 * geom.flexural_rigidity)
    return load / (1.0 + _stress_term(geom))


def large_deflection_center(geom: DeviceGeometry, pressure: float) -> float:
    """Center deflection from the cubic large-deflection relation.

    Solves W0 (1 + K (W0/h)^2 + s) = P R^4 / (64 D) with K = 0.488 and
    s the built-in stress term.  Newton iteration from the linear bound
    converges monotonically (f is convex, start lies right of the root);
    the returned root has relative residual below 1e-13.
    """
    if pressure < 0:
        raise ValueError("pressure must be >= 0")
    if pressure == 0.0:
        return 0.0
    q = pressure * geom.radius**4 / (64.0 * geom.flexural_rigidity)
    c1 = 1.0 + _stress_term(geom)
    c3 = STIFFENING_COEFF / geom.thickness**2
    w = q / c1  # upper bound: cubic term only shrinks the root
    for _ in range(100):
        f = c3 * w**3 + c1 * w - q
        if abs(f) <= 1e-15 * q:
            return w
        w -= f / (3.0 * c3 * w**2 + c1)
    raise RuntimeError("large-deflection Newton iteration failed to converge")


def pressure_for_center_deflection(geom: DeviceGeometry, w0: float) -> float:
    """Exact inverse of the large-deflection relation: P such that W0(P) = w0."""
    if w0 < 0:
        raise ValueError("w0 must be >= 0")
    c1 = 1.0 + _stress_term(geom)
    c3 = STIFFENING_COEFF / geom.thickness**2
    return (c3 * w0**3 + c1 * w0) * 64.0 * geom.flexural_rigidity / geom.radius**4


def touch_onset_pressure(geom: DeviceGeometry) -> float:
    """Pressure at which the unconstrained center deflection equals the travel."""
    return pressure_for_center_deflection(geom, geom.travel)


def deflection_profile(state: DeflectionState, geom: DeviceGeometry, r: float) -> float:
    """Clamped-plate deflection W(r) = W0 (1 - (r/R)^2)^2, pre-touch only."""
    if state.touched:
        raise ValueError("profile undefined for touched states")
    if not 0.0 <= r <= geom.radius:
        raise ValueError("r must be in [0, R]")
    rho2 = (r / geom.radius) ** 2
    return state.center_deflection * (1.0 - rho2) ** 2


def contact_radius(geom: DeviceGeometry, pressure: float) -> float:
    """Radius of the touched disk under the geometric contact model.

    The unconstrained profile W0 (1 - (r/R)^2)^2 intersects the travel g
    at a = R sqrt(1 - sqrt(g / W0)); zero while W0 <= g.  Continuous at
    onset and strictly increasing with pressure once positive.
    """
    w0 = large_deflection_center(geom, pressure)
    g = geom.travel
    if w0 <= g:
        return 0.0
    return geom.radius * (1.0 - (g / w0) ** 0.5) ** 0.5


def solve_state(geom: DeviceGeometry, pressure: float) -> DeflectionState:
    """Deflection state at one pressure; W0 capped at the travel when touching."""
    w0 = large_deflection_center(geom, pressure)
    if STIFFENING_COEFF * (w0 / geom.thickness) ** 2 < 1e-5:
        regime = DeflectionRegime.SMALL_LINEAR
    else:
        regime = DeflectionRegime.LARGE_NONLINEAR
    a = contact_radius(geom, pressure)
    return DeflectionState(pressure=pressure,
                           center_deflection=min(w0, geom.travel),
                           regime=regime,
                           contact_radius=a)


def classify_mode(geom: DeviceGeometry, pressure: float,
                  thresholds: ModeThresholds = ModeThresholds()) -> OperatingMode:
    """Operating mode at one pressure under the given thresholds."""
    g = geom.travel
    w0 = large_deflection_center(geom, pressure)
    if w0 < thresholds.transition_fraction * g:
        return OperatingMode.NORMAL
    a_frac = contact_radius(geom, pressure) / geom.radius
    if a_frac < thresholds.touch_onset_fraction:
        return OperatingMode.TRANSITION
    if a_frac < thresholds.saturation_fraction:
        return OperatingMode.TOUCH
    return OperatingMode.SATURATION


def pullin_safe_deflection(geom: DeviceGeometry) -> float:
    """Normal-mode design bound: one third of the separation gap."""
    return geom.gap / 3.0
