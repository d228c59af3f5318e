"""Affine pressure-to-servo-angle mapping over the linear sensing range."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ServoMap:
    """Endpoints of the affine pressure-to-angle map, clamped outside."""

    p_min: float  # Pa
    p_max: float
    angle_min: float  # degrees
    angle_max: float

    def __post_init__(self) -> None:
        if self.p_min >= self.p_max:
            raise ValueError("p_min must be < p_max")
        if self.angle_min >= self.angle_max:
            raise ValueError("angle_min must be < angle_max")


def servo_angle(servo_map: ServoMap, pressure: float) -> float:
    """Servo angle for a pressure, clamped to the map's angle range."""
    span = servo_map.p_max - servo_map.p_min
    frac = (pressure - servo_map.p_min) / span
    frac = min(1.0, max(0.0, frac))
    return servo_map.angle_min + (servo_map.angle_max - servo_map.angle_min) * frac
