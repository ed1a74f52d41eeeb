"""Episode logs: the unit of training data, evaluation, and persistence.

Observations are stored palette-quantized as uint8 "percent" codes; the
rendered intensities (0, 0.25, 0.4, 0.5, 0.75, 1.0) survive the round trip
bit-exactly, so training from a reloaded log equals training from memory.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from cimlab.simworld.render import RenderConfig, render
from cimlab.simworld.town import TaskSpec
from cimlab.simworld.world import WorldState, expert_target_speed, init_world, step
from cimlab.control import ControllerGains, longitudinal_control, speed_error

MAGIC = b"CIMEPLG1"
VERSION = 1

_F_COLLIDED = 1
_F_ARRIVED = 2
_F_TIMED_OUT = 4


class ExpertCollisionError(RuntimeError):
    """The rule-based expert collided: a simulator bug, never expected."""


def quantize_obs(obs: np.ndarray) -> np.ndarray:
    return np.round(obs * 100.0).astype(np.uint8)


def decode_obs(codes: np.ndarray) -> np.ndarray:
    return codes.astype(np.float64) / 100.0


@dataclass
class EpisodeLog:
    town_id: str
    seed: int
    dt: float
    grid_side: int
    ticks: np.ndarray  # int32 (T,)
    positions: np.ndarray  # float64 (T,)
    speeds: np.ndarray  # float64 (T,) ego speed when the tick began
    targets: np.ndarray  # float64 (T,) commanded/predicted speed at the tick
    throttles: np.ndarray
    brakes: np.ndarray
    collided: np.ndarray  # bool (T,)
    arrived: np.ndarray
    timed_out: np.ndarray
    obs_codes: np.ndarray  # uint8 (T, G, G); (T, 0, 0) when not recorded

    @property
    def n_ticks(self) -> int:
        return int(self.ticks.size)

    @property
    def has_observations(self) -> bool:
        return self.obs_codes.shape[1] > 0

    @property
    def observations(self) -> np.ndarray:
        return decode_obs(self.obs_codes)

    def flat_observations(self) -> np.ndarray:
        return self.observations.reshape(self.n_ticks, -1)


@dataclass
class FactorTrace:
    """Ground-truth generative factors probed each tick (for oracle mode)."""

    front_gap: np.ndarray  # visible gap to lead, saturated at half window
    light_red_proximity: np.ndarray  # 0 unless a red light is visibly close ahead
    rear_gap: np.ndarray  # visible gap to follower, saturated
    lead_dist: np.ndarray  # unclipped distance to lead front bumper (inf if none)
    lead_speed: np.ndarray  # lead speed (nan if none)


def _probe_factors(world: WorldState, view_m: float) -> tuple[float, float, float, float, float]:
    p = world.physics
    half = view_m / 2.0
    cars = world.cars
    ahead = int(np.searchsorted(cars.position, world.ego_pos, side="right"))

    front_gap = half
    lead_dist = np.inf
    lead_speed = np.nan
    if ahead < cars.count:
        front_gap = min(half, float(cars.position[ahead] - cars.length[ahead] - world.ego_pos))
        lead_dist = float(cars.position[ahead] - world.ego_pos)
        lead_speed = float(cars.speed[ahead])

    rear_gap = half
    if ahead - 1 >= 0:
        rear_gap = min(half, float(world.ego_pos - p.car_length - cars.position[ahead - 1]))

    light_prox = 0.0
    lights = world.task.town.light_positions
    for i, s in enumerate(lights):
        d = s - world.ego_pos
        if 0 <= d <= half and world.light_colors[i] == "red":
            light_prox = max(light_prox, 1.0 - d / half)
    return front_gap, light_prox, rear_gap, lead_dist, lead_speed


def run_expert_episode(
    task: TaskSpec,
    gains: ControllerGains = ControllerGains(),
    render_cfg: RenderConfig = RenderConfig(),
    record_obs: bool = True,
    probe_factors: bool = False,
) -> EpisodeLog | tuple[EpisodeLog, FactorTrace]:
    """Drive the rule-based expert through the controller until arrival/timeout.

    Raises ExpertCollisionError if the expert ever collides.
    """
    world = init_world(task)
    rows: list[tuple] = []
    obs_list: list[np.ndarray] = []
    factors: list[tuple] = []

    while True:
        if record_obs:
            obs_list.append(quantize_obs(render(world, render_cfg)))
        if probe_factors:
            factors.append(_probe_factors(world, render_cfg.window_m))
        target = expert_target_speed(world)
        cmd = longitudinal_control(speed_error(target, world.ego_speed), gains)
        new_world, events = step(world, cmd)
        rows.append(
            (
                world.tick,
                world.ego_pos,
                world.ego_speed,
                target,
                cmd.throttle,
                cmd.brake,
                events.collided,
                events.arrived,
                events.timed_out,
            )
        )
        if events.collided:
            raise ExpertCollisionError(
                f"expert collided at tick {world.tick} (task seed {task.seed}, "
                f"town {task.town.town_id})"
            )
        world = new_world
        if events.terminal:
            break

    T = len(rows)
    g = render_cfg.grid_side if record_obs else 0
    log = EpisodeLog(
        town_id=task.town.town_id,
        seed=task.seed,
        dt=task.town.physics.dt,
        grid_side=render_cfg.grid_side,
        ticks=np.array([r[0] for r in rows], dtype=np.int32),
        positions=np.array([r[1] for r in rows]),
        speeds=np.array([r[2] for r in rows]),
        targets=np.array([r[3] for r in rows]),
        throttles=np.array([r[4] for r in rows]),
        brakes=np.array([r[5] for r in rows]),
        collided=np.array([r[6] for r in rows], dtype=bool),
        arrived=np.array([r[7] for r in rows], dtype=bool),
        timed_out=np.array([r[8] for r in rows], dtype=bool),
        obs_codes=(
            np.stack(obs_list) if record_obs and obs_list else np.zeros((T, g, g), dtype=np.uint8)
        ),
    )
    if probe_factors:
        arr = np.array(factors)
        trace = FactorTrace(
            front_gap=arr[:, 0],
            light_red_proximity=arr[:, 1],
            rear_gap=arr[:, 2],
            lead_dist=arr[:, 3],
            lead_speed=arr[:, 4],
        )
        return log, trace
    return log


def save_episode(log: EpisodeLog, path: str | Path) -> None:
    town_bytes = log.town_id.encode("utf-8")
    if len(town_bytes) > 16:
        raise ValueError(f"town_id {log.town_id!r} longer than 16 bytes")
    town_bytes = town_bytes.ljust(16, b"\x00")
    flags = (
        log.collided.astype(np.uint8) * _F_COLLIDED
        | log.arrived.astype(np.uint8) * _F_ARRIVED
        | log.timed_out.astype(np.uint8) * _F_TIMED_OUT
    )
    obs_side = log.obs_codes.shape[1]
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IIdQ", VERSION, log.grid_side, log.dt, log.seed))
        f.write(town_bytes)
        f.write(struct.pack("<II", log.n_ticks, obs_side))
        f.write(np.ascontiguousarray(log.ticks, dtype="<i4").tobytes())
        for arr in (log.positions, log.speeds, log.targets, log.throttles, log.brakes):
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        f.write(flags.tobytes())
        f.write(np.ascontiguousarray(log.obs_codes, dtype=np.uint8).tobytes())


def load_episode(path: str | Path) -> EpisodeLog:
    with open(path, "rb") as f:
        if f.read(8) != MAGIC:
            raise ValueError(f"{path}: not an episode log")
        version, grid_side, dt, seed = struct.unpack("<IIdQ", f.read(24))
        if version != VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        town_id = f.read(16).rstrip(b"\x00").decode("utf-8")
        n_ticks, obs_side = struct.unpack("<II", f.read(8))
        ticks = np.frombuffer(f.read(4 * n_ticks), dtype="<i4").astype(np.int32)
        floats = [
            np.frombuffer(f.read(8 * n_ticks), dtype="<f8").astype(np.float64) for _ in range(5)
        ]
        flags = np.frombuffer(f.read(n_ticks), dtype=np.uint8)
        obs = np.frombuffer(f.read(n_ticks * obs_side * obs_side), dtype=np.uint8)
        obs = obs.reshape(n_ticks, obs_side, obs_side).copy()
    return EpisodeLog(
        town_id=town_id,
        seed=seed,
        dt=dt,
        grid_side=grid_side,
        ticks=ticks,
        positions=floats[0],
        speeds=floats[1],
        targets=floats[2],
        throttles=floats[3],
        brakes=floats[4],
        collided=(flags & _F_COLLIDED) > 0,
        arrived=(flags & _F_ARRIVED) > 0,
        timed_out=(flags & _F_TIMED_OUT) > 0,
        obs_codes=obs,
    )


def export_csv(log: EpisodeLog, path: str | Path) -> None:
    """Lossless one-row-per-tick CSV (observation cells as integer codes)."""
    n_px = log.obs_codes.shape[1] * log.obs_codes.shape[2]
    header = "tick,position,speed,target,throttle,brake,collided,arrived,timed_out"
    header += "".join(f",obs{j:04d}" for j in range(n_px))
    with open(path, "w", encoding="utf-8") as f:
        f.write(header + "\n")
        for t in range(log.n_ticks):
            row = [
                str(int(log.ticks[t])),
                repr(float(log.positions[t])),
                repr(float(log.speeds[t])),
                repr(float(log.targets[t])),
                repr(float(log.throttles[t])),
                repr(float(log.brakes[t])),
                str(int(log.collided[t])),
                str(int(log.arrived[t])),
                str(int(log.timed_out[t])),
            ]
            row.extend(str(int(v)) for v in log.obs_codes[t].ravel())
            f.write(",".join(row) + "\n")
