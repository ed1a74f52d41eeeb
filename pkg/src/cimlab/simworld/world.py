"""World state, initialization, the tick update, and the rule-based expert.

Positions are front-bumper arc lengths along the route; a car occupies the
interval [position - length, position].  Everything is a value: ``step``
returns a fresh ``WorldState`` and never mutates its input.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

import numpy as np

from cimlab.simworld.params import PhysicsParams
from cimlab.simworld.town import TaskSpec

# Cars never spawn with their interval closer than this to another interval.
_SPAWN_BUFFER = 0.5
# No traffic spawns inside [start - behind, start + ahead] around the ego.
# The wide rear zone keeps followers loosely coupled to the ego, so the
# rear-gap series stays statistically irrelevant to the ego's speed.
_EGO_CLEAR_BEHIND = 45.0
_EGO_CLEAR_AHEAD = 15.0


@dataclass(frozen=True)
class ControlCommand:
    """Mutually exclusive throttle/brake pair, both in [0, 1]."""

    throttle: float
    brake: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.throttle <= 1.0 and 0.0 <= self.brake <= 1.0):
            raise ValueError(f"command out of range: throttle={self.throttle}, brake={self.brake}")
        if self.throttle * self.brake != 0.0:
            raise ValueError("throttle and brake are mutually exclusive")


@dataclass(frozen=True)
class StepEvents:
    collided: bool = False
    arrived: bool = False
    timed_out: bool = False

    @property
    def terminal(self) -> bool:
        return self.collided or self.arrived or self.timed_out


@dataclass(frozen=True)
class Cars:
    """Traffic as parallel arrays, always sorted by position ascending.

    Behavior profile per car: cruise wobbles as
    ``base * (1 + amp * sin(omega * t + phase))`` and the car otherwise obeys
    the same gap/light rule as the expert, except that each driver keeps its
    own comfort headway (>= the expert's d_min, so still collision-free).
    """

    position: np.ndarray  # front bumper, m
    speed: np.ndarray  # m/s
    length: np.ndarray  # m
    base_cruise: np.ndarray  # m/s
    wobble_amp: np.ndarray
    wobble_omega: np.ndarray  # rad/s
    wobble_phase: np.ndarray
    headway: np.ndarray  # m, per-driver gap the car-following rule keeps

    @property
    def count(self) -> int:
        return int(self.position.size)

    def cruise_at(self, time_s: float) -> np.ndarray:
        return self.base_cruise * (
            1.0 + self.wobble_amp * np.sin(self.wobble_omega * time_s + self.wobble_phase)
        )


@dataclass(frozen=True)
class Nuisances:
    """Static roadside objects: position, lateral side (+-1), style code."""

    position: np.ndarray
    side: np.ndarray  # +1 right, -1 left
    style: np.ndarray  # int codes

    @property
    def count(self) -> int:
        return int(self.position.size)


@dataclass(frozen=True)
class WorldState:
    tick: int
    ego_pos: float  # front bumper, m
    ego_speed: float  # m/s
    cars: Cars
    nuisances: Nuisances
    light_colors: tuple[str, ...]  # "red" | "green", parallel to town.light_positions
    task: TaskSpec
    rng_state: dict  # opaque generator state captured after initialization

    @property
    def time_s(self) -> float:
        return self.tick * self.task.town.physics.dt

    @property
    def physics(self) -> PhysicsParams:
        return self.task.town.physics


def state_digest(world: WorldState) -> str:
    """SHA-256 over every dynamic field; equal digests mean bit-identical states."""
    h = hashlib.sha256()
    h.update(np.float64(world.ego_pos).tobytes())
    h.update(np.float64(world.ego_speed).tobytes())
    h.update(world.tick.to_bytes(8, "little"))
    for arr in (
        world.cars.position,
        world.cars.speed,
        world.cars.length,
        world.cars.base_cruise,
        world.cars.wobble_amp,
        world.cars.wobble_omega,
        world.cars.wobble_phase,
        world.cars.headway,
        world.nuisances.position,
        world.nuisances.side.astype(np.int64),
        world.nuisances.style.astype(np.int64),
    ):
        h.update(np.ascontiguousarray(arr).tobytes())
    h.update("|".join(world.light_colors).encode())
    h.update(repr(sorted(world.rng_state.items(), key=lambda kv: kv[0])).encode())
    return h.hexdigest()


def _light_colors(task: TaskSpec, time_s: float) -> tuple[str, ...]:
    town = task.town
    return tuple(
        "red" if town.light_is_red(i, time_s) else "green"
        for i in range(len(town.light_positions))
    )


def _red_positions(world: WorldState) -> np.ndarray:
    pos = np.asarray(world.task.town.light_positions)
    red = np.array([c == "red" for c in world.light_colors], dtype=bool)
    return pos[red]


def _rule_target(
    cruise: float,
    speed: float,
    gap_to_lead: float | None,
    dist_to_red: float | None,
    p: PhysicsParams,
    d_keep: float | None = None,
) -> float:
    """min(cruise, gap-keeping term, red-light stop term)."""
    target = cruise
    if gap_to_lead is not None:
        keep = p.d_min if d_keep is None else d_keep
        target = min(target, max(0.0, p.k_gap * (gap_to_lead - keep)))
    if dist_to_red is not None:
        stop_dist = speed * speed / (2.0 * p.b_max) + p.light_margin
        if dist_to_red <= stop_dist:
            target = 0.0
    return target


def expert_target_speed(world: WorldState) -> float:
    """Speed the rule-based expert wants next; reads only the road ahead."""
    p = world.physics
    town = world.task.town
    gap = None
    ahead = np.searchsorted(world.cars.position, world.ego_pos, side="right")
    if ahead < world.cars.count:
        lead_rear = world.cars.position[ahead] - world.cars.length[ahead]
        gap = float(lead_rear - world.ego_pos)
    reds = _red_positions(world)
    reds_ahead = reds[reds >= world.ego_pos]
    dist_red = float(reds_ahead[0] - world.ego_pos) if reds_ahead.size else None
    return _rule_target(town.cruise_speed, world.ego_speed, gap, dist_red, p)


def init_world(task: TaskSpec) -> WorldState:
    """Place traffic and scenery by seeded Poisson processes; ego at rest.

    The same TaskSpec always produces a bit-identical WorldState.  Spawned
    cars never overlap each other, the ego, or its immediate surroundings.
    """
    town = task.town
    p = town.physics
    if not (0 <= task.start_s < task.goal_s <= town.route_length):
        raise ValueError("task start/goal outside route")

    rng = np.random.default_rng(task.seed)

    n_cars = int(rng.poisson(town.traffic_density / 100.0 * town.route_length))
    raw_pos = np.sort(rng.uniform(0.0, town.route_length, size=n_cars))
    base = rng.uniform(0.55, 0.95, size=n_cars) * town.cruise_speed
    amp = rng.uniform(0.03, 0.12, size=n_cars)
    omega = rng.uniform(0.1, 0.5, size=n_cars)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=n_cars)
    headway = rng.uniform(12.0, 25.0, size=n_cars)

    keep: list[int] = []
    last_front = -np.inf
    for i in range(n_cars):
        pos = raw_pos[i]
        rear = pos - p.car_length
        if task.start_s - _EGO_CLEAR_BEHIND < pos and rear < task.start_s + _EGO_CLEAR_AHEAD:
            continue  # too close to the ego spawn
        if rear < last_front + _SPAWN_BUFFER:
            continue  # would crowd the previous kept car
        keep.append(i)
        last_front = pos
    idx = np.array(keep, dtype=int)

    cars = Cars(
        position=raw_pos[idx].copy(),
        speed=np.zeros(idx.size),
        length=np.full(idx.size, p.car_length),
        base_cruise=base[idx].copy(),
        wobble_amp=amp[idx].copy(),
        wobble_omega=omega[idx].copy(),
        wobble_phase=phase[idx].copy(),
        headway=headway[idx].copy(),
    )

    n_nuis = int(rng.poisson(town.nuisance_density / 100.0 * town.route_length))
    nuis = Nuisances(
        position=np.sort(rng.uniform(0.0, town.route_length, size=n_nuis)),
        side=rng.choice(np.array([-1, 1]), size=n_nuis),
        style=rng.choice(np.array(town.nuisance_styles), size=n_nuis),
    )

    colors = _light_colors(task, 0.0)
    world = WorldState(
        tick=0,
        ego_pos=task.start_s,
        ego_speed=0.0,
        cars=cars,
        nuisances=nuis,
        light_colors=colors,
        task=task,
        rng_state=rng.bit_generator.state,
    )
    # give traffic its rule-consistent starting speed (depends only on geometry)
    v0 = _npc_targets(world)
    return replace(world, cars=replace(cars, speed=np.minimum(v0, p.v_max)))


def _npc_targets(world: WorldState) -> np.ndarray:
    """Rule target speed for every traffic car, reading the pre-tick state."""
    p = world.physics
    cars = world.cars
    n = cars.count
    if n == 0:
        return np.zeros(0)

    cruise = np.clip(cars.cruise_at(world.time_s), 0.0, p.v_max)

    # lead rear bumper for each car: the next car ahead, or the ego if it
    # sits between this car and the next one
    lead_rear = np.full(n, np.inf)
    if n > 1:
        lead_rear[:-1] = cars.position[1:] - cars.length[1:]
    ego_rear = world.ego_pos - p.car_length
    behind_ego = int(np.searchsorted(cars.position, world.ego_pos, side="right")) - 1
    if behind_ego >= 0:
        lead_rear[behind_ego] = min(lead_rear[behind_ego], ego_rear)
    gaps = lead_rear - cars.position

    reds = _red_positions(world)
    targets = np.empty(n)
    for i in range(n):
        gap_i = None if np.isinf(gaps[i]) else float(gaps[i])
        d_red = None
        if reds.size:
            j = int(np.searchsorted(reds, cars.position[i]))
            if j < reds.size:
                d_red = float(reds[j] - cars.position[i])
        targets[i] = _rule_target(
            float(cruise[i]), float(cars.speed[i]), gap_i, d_red, p,
            d_keep=float(cars.headway[i]),
        )
    return targets


def step(world: WorldState, cmd: ControlCommand) -> tuple[WorldState, StepEvents]:
    """Advance one tick: ego from the command, traffic from its rule, lights by dt."""
    p = world.physics
    task = world.task

    accel = p.a_max * cmd.throttle - p.b_max * cmd.brake
    ego_speed = float(np.clip(world.ego_speed + accel * p.dt, 0.0, p.v_max))
    ego_pos = world.ego_pos + ego_speed * p.dt

    targets = _npc_targets(world)
    cars = world.cars
    new_speed = np.clip(
        targets, cars.speed - p.b_max * p.dt, cars.speed + p.a_max * p.dt
    )
    new_speed = np.clip(new_speed, 0.0, p.v_max)
    new_pos = cars.position + new_speed * p.dt
    new_cars = replace(cars, position=new_pos, speed=new_speed)

    tick = world.tick + 1
    colors = _light_colors(task, tick * p.dt)

    collided = False
    if new_cars.count:
        overlap = (new_cars.position > ego_pos - p.car_length) & (
            new_cars.position - new_cars.length < ego_pos
        )
        collided = bool(overlap.any())
    arrived = (not collided) and ego_pos >= task.goal_s
    timed_out = (not collided) and (not arrived) and tick * p.dt >= task.timeout

    new_world = replace(
        world,
        tick=tick,
        ego_pos=ego_pos,
        ego_speed=ego_speed,
        cars=new_cars,
        light_colors=colors,
    )
    return new_world, StepEvents(collided=collided, arrived=arrived, timed_out=timed_out)
