"""Capacitance of the sensor across all four operating modes.

Normal mode integrates the deflected-gap parallel-plate density over the
disk; a closed form exists for the clamped-plate profile and is checked
against adaptive quadrature.  Touch mode splits the disk at the contact
radius: the touched part is a parallel plate through the dielectric, the
annulus is integrated numerically.  A literal evaluation of the published
touch-mode closed form is kept as a diagnostic.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass

from scipy import integrate

from . import mechanics
from .mechanics import (DeviceGeometry, DeflectionState, ModeThresholds,
                        OperatingMode)

EPSILON_0 = 8.8541878128e-12  # F/m

# Adaptive quadrature settings: the normal-mode integrand steepens sharply
# as W0 approaches the electrical gap.
QUAD_REL_TOL = 1e-10
QUAD_LIMIT = 2**20


class CapacitanceMethod(enum.Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"
    PUBLISHED_LITERAL = "published_literal"


class TouchStateError(ValueError):
    """Raised when an operation is applied in the wrong contact regime."""


@dataclass(frozen=True)
class CapacitanceBreakdown:
    """Touch-mode capacitance split into touched disk and free annulus."""

    total: float
    touched_part: float
    untouched_part: float
    method: CapacitanceMethod


@dataclass(frozen=True)
class CPPoint:
    pressure: float
    capacitance: float
    mode: OperatingMode


@dataclass(frozen=True)
class CPCurve:
    """Sampled capacitance-pressure characteristic with mode labels."""

    points: tuple[CPPoint, ...]
    geometry_id: str = ""

    def pressures(self) -> list[float]:
        return [p.pressure for p in self.points]

    def capacitances(self) -> list[float]:
        return [p.capacitance for p in self.points]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["pressure_pa", "capacitance_f", "mode"])
        for p in self.points:
            writer.writerow([repr(p.pressure), repr(p.capacitance), p.mode.name.lower()])
        return buf.getvalue()

    def to_json(self, geom: DeviceGeometry | None = None,
                thresholds: ModeThresholds | None = None) -> str:
        doc: dict = {
            "geometry_id": self.geometry_id,
            "points": [
                {"pressure_pa": p.pressure, "capacitance_f": p.capacitance,
                 "mode": p.mode.name.lower()}
                for p in self.points
            ],
        }
        if geom is not None:
            doc["geometry"] = {
                "radius_m": geom.radius,
                "gap_m": geom.gap,
                "builtin_stress_pa": geom.builtin_stress,
                "dielectric_thickness_m": geom.dielectric_thickness,
                "dielectric_rel_permittivity": geom.dielectric_rel_permittivity,
                "medium_rel_permittivity": geom.medium_rel_permittivity,
                "layers": [
                    {"name": l.name, "youngs_modulus_pa": l.youngs_modulus,
                     "poisson_ratio": l.poisson_ratio, "thickness_m": l.thickness}
                    for l in geom.laminate.layers
                ],
            }
        if thresholds is not None:
            doc["thresholds"] = {
                "transition_fraction": thresholds.transition_fraction,
                "touch_onset_fraction": thresholds.touch_onset_fraction,
                "saturation_fraction": thresholds.saturation_fraction,
            }
        return json.dumps(doc, indent=2) + "\n"


def electrical_gap(geom: DeviceGeometry) -> float:
    """Series-stack electrical separation at rest.

    Air path of (gap - t1) at eps_r plus dielectric path of t1 at eps_t1:
    d_e = (gap - t1)/eps_r + t1/eps_t1.  Equals the bare gap when t1 = 0
    and eps_r = 1.
    """
    t1 = geom.dielectric_thickness
    return ((geom.gap - t1) / geom.medium_rel_permittivity
            + t1 / geom.dielectric_rel_permittivity)


def base_capacitance(geom: DeviceGeometry) -> float:
    """Rest capacitance eps_0 * pi R^2 / d_e of the undeflected sensor."""
    return EPSILON_0 * math.pi * geom.radius**2 / electrical_gap(geom)


def _gap_density(geom: DeviceGeometry, deflection: float) -> float:
    """Local electrical separation under a diaphragm deflected by ``deflection``."""
    t1 = geom.dielectric_thickness
    air = geom.travel - deflection
    return air / geom.medium_rel_permittivity + t1 / geom.dielectric_rel_permittivity


def normal_mode_capacitance(geom: DeviceGeometry, state: DeflectionState) -> float:
    """Closed-form pre-touch capacitance.

    Substituting W(r) = W0 (1 - (r/R)^2)^2 into the deflected-gap integral
    gives C = pi eps0 R^2 atanh(sqrt(wt/d_e)) / sqrt(wt d_e) with
    wt = W0/eps_r.  Limits to the base capacitance as W0 -> 0.
    """
    if state.touched:
        raise TouchStateError("normal-mode capacitance requires an untouched state")
    return _normal_mode_closed_form(geom, state.center_deflection)


def _normal_mode_closed_form(geom: DeviceGeometry, w0: float) -> float:
    d_e = electrical_gap(geom)
    wt = w0 / geom.medium_rel_permittivity
    if wt >= d_e:
        raise TouchStateError("center deflection reaches the electrical gap")
    if w0 < 0:
        raise ValueError("center deflection must be >= 0")
    if wt == 0.0:
        return base_capacitance(geom)
    area = math.pi * geom.radius**2
    x = math.sqrt(wt / d_e)
    return EPSILON_0 * area * math.atanh(x) / math.sqrt(wt * d_e)


def normal_mode_capacitance_quadrature(geom: DeviceGeometry, w0: float,
                                       rel_tol: float = QUAD_REL_TOL) -> float:
    """Adaptive-quadrature oracle for the pre-touch capacitance integral."""
    d_e = electrical_gap(geom)
    if w0 / geom.medium_rel_permittivity >= d_e:
        raise TouchStateError("center deflection reaches the electrical gap")
    R = geom.radius

    def integrand(r: float) -> float:
        w = w0 * (1.0 - (r / R) ** 2) ** 2
        return 2.0 * math.pi * EPSILON_0 * r / _gap_density(geom, w)

    value, _ = integrate.quad(integrand, 0.0, R, epsrel=rel_tol, epsabs=0.0,
                              limit=200)
    return value


def post_touch_profile(geom: DeviceGeometry, a: float, r: float) -> float:
    """Deflection in the free annulus once touching.

    The clamped-edge profile shape rescaled to meet the plate at (a, g):
    W(r) = g [(1 - (r/R)^2) / (1 - (a/R)^2)]^2, valid for a <= r <= R.
    Continuous with the pre-touch profile at onset (a -> 0).
    """
    rho2 = (r / geom.radius) ** 2
    alpha2 = (a / geom.radius) ** 2
    return geom.travel * ((1.0 - rho2) / (1.0 - alpha2)) ** 2


def touch_mode_capacitance(geom: DeviceGeometry, pressure: float,
                           method: CapacitanceMethod = CapacitanceMethod.QUADRATURE,
                           rel_tol: float = QUAD_REL_TOL) -> CapacitanceBreakdown:
    """Touch-mode capacitance split into touched disk and free annulus.

    The canonical result integrates the series-stack density over the
    annulus (adaptive quadrature); the touched disk is a parallel plate
    through the dielectric.  ``PUBLISHED_LITERAL`` evaluates the published
    closed form verbatim for traceability, it is never asserted against
    the quadrature result.
    """
    a = mechanics.contact_radius(geom, pressure)
    if a <= 0.0:
        raise TouchStateError("touch-mode capacitance requires a touched state")
    if geom.dielectric_thickness == 0.0:
        raise ValueError("touched regime with zero dielectric thickness: "
                         "capacitance diverges; configure dielectric_thickness > 0")
    if method is CapacitanceMethod.PUBLISHED_LITERAL:
        return _touch_mode_literal(geom, pressure, a)

    t1 = geom.dielectric_thickness
    eps_t1 = geom.dielectric_rel_permittivity
    touched = EPSILON_0 * eps_t1 * math.pi * a**2 / t1

    R = geom.radius

    def integrand(r: float) -> float:
        w = post_touch_profile(geom, a, r)
        return 2.0 * math.pi * EPSILON_0 * r / _gap_density(geom, w)

    annulus, _ = integrate.quad(integrand, a, R, epsrel=rel_tol, epsabs=0.0,
                                limit=200)
    return CapacitanceBreakdown(total=touched + annulus, touched_part=touched,
                                untouched_part=annulus,
                                method=CapacitanceMethod.QUADRATURE)


def _touch_mode_literal(geom: DeviceGeometry, pressure: float,
                        a: float) -> CapacitanceBreakdown:
    """Literal published touch-mode closed form (diagnostic only).

    Interprets a as the contact radius and b as the diaphragm radius; the
    delta parameter is dimensionally suspect as printed, so the output is
    logged and compared, never trusted.
    """
    t1 = geom.dielectric_thickness
    eps_t1 = geom.dielectric_rel_permittivity
    b = geom.radius
    w0 = mechanics.large_deflection_center(geom, pressure)
    delta = EPSILON_0 * w0 / (t1 + geom.gap * eps_t1)
    sqrt_d = math.sqrt(delta)
    a1 = math.log(abs((1.0 + sqrt_d) / (1.0 - sqrt_d)))
    a2 = (1.0 / (1.0 - delta) - 2.0 * delta / (3.0 * (1.0 - delta))
          - delta * (3.0 * delta + 1.0) / (5.0 * (delta - 1.0) ** 3))
    touched = EPSILON_0 * eps_t1 * math.pi * a**2 / t1
    annulus = 2.0 * math.pi * delta * eps_t1 / w0 * (b**2 * a1 + a * b * a2)
    return CapacitanceBreakdown(total=touched + annulus, touched_part=touched,
                                untouched_part=annulus,
                                method=CapacitanceMethod.PUBLISHED_LITERAL)


def capacitance_at(geom: DeviceGeometry, pressure: float,
                   rel_tol: float = QUAD_REL_TOL) -> float:
    """Capacitance at one pressure, selecting the path by contact state."""
    state = mechanics.solve_state(geom, pressure)
    if state.touched:
        return touch_mode_capacitance(geom, pressure, rel_tol=rel_tol).total
    return normal_mode_capacitance(geom, state)


class SweepPointError(RuntimeError):
    """Sweep failure annotated with the offending point index."""

    def __init__(self, index: int, pressure: float, cause: Exception) -> None:
        super().__init__(f"point {index} (P = {pressure} Pa): {cause}")
        self.index = index
        self.pressure = pressure
        self.cause = cause


def sweep_cp_curve(geom: DeviceGeometry, pressures: list[float],
                   thresholds: ModeThresholds = ModeThresholds(),
                   geometry_id: str = "",
                   rel_tol: float = QUAD_REL_TOL) -> CPCurve:
    """Capacitance-pressure curve with per-point mode labels."""
    if any(p < 0 for p in pressures):
        raise ValueError("pressures must be >= 0")
    if any(b <= a for a, b in zip(pressures, pressures[1:])):
        raise ValueError("pressures must be strictly increasing")
    points = []
    for i, p in enumerate(pressures):
        try:
            c = capacitance_at(geom, p, rel_tol=rel_tol)
            mode = mechanics.classify_mode(geom, p, thresholds)
        except Exception as exc:  # attach the point index for diagnosis
            raise SweepPointError(i, p, exc) from exc
        points.append(CPPoint(pressure=p, capacitance=c, mode=mode))
    return CPCurve(points=tuple(points), geometry_id=geometry_id)
