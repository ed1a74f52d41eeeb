"""Physical constants of the longitudinal world.  All configurable."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicsParams:
    dt: float = 0.1  # s per tick
    v_max: float = 12.0  # m/s hard speed cap
    a_max: float = 3.0  # m/s^2 full-throttle acceleration
    b_max: float = 6.0  # m/s^2 full-brake deceleration
    car_length: float = 4.0  # m
    d_min: float = 5.0  # m, bumper-to-bumper distance the gap rule keeps
    k_gap: float = 0.6  # 1/s, gap-to-speed gain of the car-following rule
    light_margin: float = 4.0  # m of slack added to the kinematic stopping distance

    def __post_init__(self) -> None:
        for name in ("dt", "v_max", "a_max", "b_max", "car_length", "d_min", "k_gap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.light_margin < 0:
            raise ValueError("light_margin must be >= 0")
