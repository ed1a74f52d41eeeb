"""Town layouts and navigation tasks, with JSON round-tripping."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from cimlab.simworld.params import PhysicsParams


@dataclass(frozen=True)
class TownConfig:
    """A procedural one-lane route: lights, traffic, scenery, cruise speed.

    ``light_cycles`` holds one (red_s, green_s, phase_s) triple per entry of
    ``light_positions``.  ``curvature_profile`` bends the rendered road only;
    dynamics stay one-dimensional.
    """

    town_id: str
    route_length: float
    light_positions: tuple[float, ...]
    light_cycles: tuple[tuple[float, float, float], ...]
    traffic_density: float  # expected cars per 100 m
    nuisance_density: float  # expected roadside objects per 100 m
    cruise_speed: float  # v*, m/s
    curvature_profile: tuple[float, ...] = ()  # per-50m lateral drift, render-only
    nuisance_styles: tuple[int, ...] = (0, 1, 2)
    physics: PhysicsParams = field(default_factory=PhysicsParams)

    def __post_init__(self) -> None:
        if self.route_length <= 0:
            raise ValueError("route_length must be > 0")
        if len(self.light_positions) != len(self.light_cycles):
            raise ValueError("one cycle per light required")
        for pos in self.light_positions:
            if not 0 <= pos <= self.route_length:
                raise ValueError(f"light at {pos} outside route [0, {self.route_length}]")
        for red, green, _phase in self.light_cycles:
            if red <= 0 or green <= 0:
                raise ValueError("light durations must be > 0")
        if self.traffic_density < 0 or self.nuisance_density < 0:
            raise ValueError("densities must be >= 0")
        if self.cruise_speed <= 0:
            raise ValueError("cruise_speed must be > 0")
        if not self.nuisance_styles:
            raise ValueError("need at least one nuisance style")

    def light_is_red(self, index: int, time_s: float) -> bool:
        red, green, phase = self.light_cycles[index]
        return (time_s + phase) % (red + green) < red

    def to_dict(self) -> dict:
        return {
            "town_id": self.town_id,
            "route_length": self.route_length,
            "light_positions": list(self.light_positions),
            "light_cycles": [list(c) for c in self.light_cycles],
            "traffic_density": self.traffic_density,
            "nuisance_density": self.nuisance_density,
            "cruise_speed": self.cruise_speed,
            "curvature_profile": list(self.curvature_profile),
            "nuisance_styles": list(self.nuisance_styles),
            "physics": vars(self.physics).copy(),
        }

    @staticmethod
    def from_dict(d: dict) -> "TownConfig":
        return TownConfig(
            town_id=str(d["town_id"]),
            route_length=float(d["route_length"]),
            light_positions=tuple(float(p) for p in d["light_positions"]),
            light_cycles=tuple(tuple(float(v) for v in c) for c in d["light_cycles"]),
            traffic_density=float(d["traffic_density"]),
            nuisance_density=float(d["nuisance_density"]),
            cruise_speed=float(d["cruise_speed"]),
            curvature_profile=tuple(float(c) for c in d.get("curvature_profile", ())),
            nuisance_styles=tuple(int(s) for s in d.get("nuisance_styles", (0, 1, 2))),
            physics=PhysicsParams(**d["physics"]) if "physics" in d else PhysicsParams(),
        )

    @staticmethod
    def from_json(path: str | Path) -> "TownConfig":
        return TownConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )


@dataclass(frozen=True)
class TaskSpec:
    """One navigation task: drive from start_s to goal_s before the timeout."""

    town: TownConfig
    start_s: float
    goal_s: float
    timeout: float  # seconds
    seed: int

    def __post_init__(self) -> None:
        if not (0 <= self.start_s < self.goal_s <= self.town.route_length):
            raise ValueError(
                f"need 0 <= start ({self.start_s}) < goal ({self.goal_s}) "
                f"<= route ({self.town.route_length})"
            )
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return {
            "town": self.town.to_dict(),
            "start_s": self.start_s,
            "goal_s": self.goal_s,
            "timeout": self.timeout,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "TaskSpec":
        return TaskSpec(
            town=TownConfig.from_dict(d["town"]),
            start_s=float(d["start_s"]),
            goal_s=float(d["goal_s"]),
            timeout=float(d["timeout"]),
            seed=int(d["seed"]),
        )

    @staticmethod
    def from_json(path: str | Path) -> "TaskSpec":
        return TaskSpec.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def builtin_towns() -> dict[str, TownConfig]:
    """Three procedural towns: train (A), shifted (B), strongly shifted (C)."""
    town_a = TownConfig(
        town_id="town-a",
        route_length=500.0,
        light_positions=(140.0, 290.0, 430.0),
        light_cycles=((12.0, 18.0, 0.0), (12.0, 18.0, 7.0), (12.0, 18.0, 14.0)),
        traffic_density=2.0,
        nuisance_density=3.0,
        cruise_speed=8.0,
        curvature_profile=(0.0, 0.04, -0.03, 0.02, 0.0, -0.04, 0.03, 0.0, 0.02, -0.02),
    )
    town_b = TownConfig(
        town_id="town-b",
        route_length=500.0,
        light_positions=(100.0, 220.0, 350.0, 460.0),
        light_cycles=((15.0, 15.0, 5.0), (15.0, 15.0, 14.0), (15.0, 15.0, 23.0), (15.0, 15.0, 2.0)),
        traffic_density=3.0,
        nuisance_density=4.0,
        cruise_speed=8.0,
        curvature_profile=(0.02, -0.04, 0.04, 0.0, -0.02, 0.03, -0.03, 0.01, 0.0, 0.02),
    )
    town_c = TownConfig(
        town_id="town-c",
        route_length=500.0,
        light_positions=(80.0, 200.0, 310.0, 420.0),
        light_cycles=((15.0, 13.0, 0.0), (15.0, 13.0, 11.0), (15.0, 13.0, 22.0), (15.0, 13.0, 5.0)),
        traffic_density=3.5,
        nuisance_density=6.0,
        cruise_speed=6.0,
        curvature_profile=(-0.03, 0.05, 0.0, -0.05, 0.04, 0.0, 0.03, -0.04, 0.02, 0.0),
        nuisance_styles=(0, 1, 2, 3, 4),
    )
    return {t.town_id: t for t in (town_a, town_b, town_c)}
