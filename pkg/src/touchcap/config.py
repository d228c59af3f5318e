"""Device configuration: JSON schema with explicit SI units in field names.

A config document carries named device profiles (geometry plus material
layers), mode thresholds, servo-map endpoints and solver settings.  The
bundled default encodes the full-scale device (1 cm sensing radius,
25 um PI + 0.2 um Al diaphragm, about 400 um separation gap) calibrated
so its model response reproduces the observed mode boundaries, alongside
the scaled validation geometry and an uncalibrated air-gap variant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .materials import Laminate, MaterialLayer
from .mechanics import DeviceGeometry, ModeThresholds
from .servo import ServoMap

DEFAULT_CONFIG_RESOURCE = "default_device.json"


class ConfigError(ValueError):
    """Invalid or inconsistent device configuration."""


@dataclass(frozen=True)
class SolverSettings:
    grid_nodes: int = 201
    quadrature_rel_tol: float = 1e-10
    fit_bounds: dict[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.grid_nodes < 16:
            raise ConfigError("solver.grid_nodes must be >= 16")
        if not 0.0 < self.quadrature_rel_tol <= 1e-6:
            raise ConfigError("solver.quadrature_rel_tol must be in (0, 1e-6]")


@dataclass(frozen=True)
class DeviceConfig:
    profiles: dict[str, DeviceGeometry]
    thresholds: ModeThresholds
    servo: ServoMap
    solver: SolverSettings

    def geometry(self, profile: str = "default") -> DeviceGeometry:
        try:
            return self.profiles[profile]
        except KeyError:
            raise ConfigError(
                f"unknown profile {profile!r}; available: {sorted(self.profiles)}"
            ) from None


def _parse_layer(doc: dict, where: str) -> MaterialLayer:
    try:
        return MaterialLayer(
            name=str(doc["name"]),
            youngs_modulus=float(doc["youngs_modulus_pa"]),
            poisson_ratio=float(doc["poisson_ratio"]),
            thickness=float(doc["thickness_m"]),
        )
    except KeyError as exc:
        raise ConfigError(f"{where}: missing layer field {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _parse_geometry(doc: dict, where: str) -> DeviceGeometry:
    try:
        layers = tuple(_parse_layer(l, where) for l in doc["layers"])
        return DeviceGeometry(
            radius=float(doc["radius_m"]),
            laminate=Laminate(layers),
            gap=float(doc["gap_m"]),
            builtin_stress=float(doc.get("builtin_stress_pa", 0.0)),
            dielectric_thickness=float(doc.get("dielectric_thickness_m", 0.0)),
            dielectric_rel_permittivity=float(
                doc.get("dielectric_rel_permittivity", 1.0)),
            medium_rel_permittivity=float(doc.get("medium_rel_permittivity", 1.0)),
        )
    except KeyError as exc:
        raise ConfigError(f"{where}: missing field {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def parse_config(doc: dict) -> DeviceConfig:
    if "profiles" not in doc or not isinstance(doc["profiles"], dict):
        raise ConfigError("config must contain a 'profiles' object")
    profiles = {name: _parse_geometry(g, f"profiles.{name}")
                for name, g in doc["profiles"].items()}
    if "default" not in profiles:
        raise ConfigError("config must define a 'default' profile")

    th = doc.get("thresholds", {})
    try:
        thresholds = ModeThresholds(
            transition_fraction=float(th.get("transition_fraction", 2.0 / 3.0)),
            touch_onset_fraction=float(th.get("touch_onset_fraction", 0.05)),
            saturation_fraction=float(th.get("saturation_fraction", 0.6)),
        )
    except ValueError as exc:
        raise ConfigError(f"thresholds: {exc}") from None

    sv = doc.get("servo", {})
    try:
        servo = ServoMap(
            p_min=float(sv.get("pressure_min_pa", 10e3)),
            p_max=float(sv.get("pressure_max_pa", 40e3)),
            angle_min=float(sv.get("angle_min_deg", 0.0)),
            angle_max=float(sv.get("angle_max_deg", 90.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"servo: {exc}") from None

    so = doc.get("solver", {})
    bounds = {name: (float(lo), float(hi))
              for name, (lo, hi) in so.get("fit_bounds", {}).items()}
    solver = SolverSettings(
        grid_nodes=int(so.get("grid_nodes", 201)),
        quadrature_rel_tol=float(so.get("quadrature_rel_tol", 1e-10)),
        fit_bounds=bounds,
    )
    return DeviceConfig(profiles=profiles, thresholds=thresholds,
                        servo=servo, solver=solver)


def load_config(path: str | Path | None = None) -> DeviceConfig:
    """Load a config file, or the bundled default when no path is given."""
    if path is None:
        text = resources.files("touchcap.data").joinpath(
            DEFAULT_CONFIG_RESOURCE).read_text()
    else:
        text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(doc)
