"""Longitudinal control: speed error -> throttle/brake, plus the route plan.

The accelerator magnitude is proportional to |speed error| and the sign picks
exactly one of throttle or brake, so the two are never active together.  The
reference plan is the deterministic stand-in for a learned trajectory model:
lane-center waypoints every meter from start to goal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from cimlab.simworld.render import RenderConfig, render
from cimlab.simworld.town import TaskSpec
from cimlab.simworld.world import ControlCommand, WorldState

WINDOW = 3  # latent frames the speed predictor consumes


@dataclass(frozen=True)
class ControllerGains:
    k_p: float = 0.3  # per (m/s)

    def __post_init__(self) -> None:
        if self.k_p <= 0:
            raise ValueError("k_p must be > 0")


@dataclass(frozen=True)
class ReferencePlan:
    """Lane-center waypoints (arc length, lateral offset 0) ending at the goal."""

    waypoints: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        s_vals = [w[0] for w in self.waypoints]
        if any(b <= a for a, b in zip(s_vals, s_vals[1:])):
            raise ValueError("waypoint arc lengths must strictly increase")


def plan_reference(task: TaskSpec) -> ReferencePlan:
    """Waypoints every 1 m along the lane center from start to goal."""
    span = task.goal_s - task.start_s
    n_full = int(np.floor(span + 1e-9))
    s_vals = [task.start_s + i for i in range(n_full + 1)]
    if s_vals[-1] < task.goal_s - 1e-9:
        s_vals.append(task.goal_s)
    else:
        s_vals[-1] = task.goal_s
    return ReferencePlan(tuple((s, 0.0) for s in s_vals))


def speed_error(s_pred: float, s_current: float) -> float:
    """Signed error: predicted forward speed minus current speed."""
    return s_pred - s_current


def longitudinal_control(e: float, gains: ControllerGains = ControllerGains()) -> ControlCommand:
    """throttle = 1(e > 0) * U, brake = 1(e <= 0) * U with U = clamp(k_p|e|, 0, 1)."""
    u = min(max(gains.k_p * abs(e), 0.0), 1.0)
    if e > 0:
        return ControlCommand(throttle=u, brake=0.0)
    return ControlCommand(throttle=0.0, brake=u)


LatentBuffer = tuple[np.ndarray, ...]


def push_latent(buffer: LatentBuffer, code: np.ndarray) -> LatentBuffer:
    """Append the newest latent frame; cold start repeats it to fill the window."""
    if not buffer:
        return (code,) * WINDOW
    return (buffer + (code,))[-WINDOW:]


def cause_windows(buffer: LatentBuffer, cause_indices: Optional[Sequence[int]]) -> np.ndarray:
    """(m, 3) windows, oldest to newest, of the selected latent coordinates."""
    if len(buffer) < WINDOW:
        raise ValueError(f"latent buffer needs {WINDOW} frames, has {len(buffer)}")
    mat = np.stack(buffer[-WINDOW:], axis=1)  # (k, 3), column 0 oldest
    if cause_indices is None:
        return mat
    return mat[np.asarray(cause_indices, dtype=int), :]


def drive_tick(
    world: WorldState,
    perc_params,
    vae_cfg,
    cause_indices: Optional[Sequence[int]],
    pred_params,
    pred_cfg,
    buffer: LatentBuffer,
    gains: ControllerGains = ControllerGains(),
    render_cfg: RenderConfig = RenderConfig(),
) -> tuple[ControlCommand, LatentBuffer]:
    """One perception-to-command tick of the full pipeline."""
    cmd, new_buffer, _ = drive_tick_verbose(
        world, perc_params, vae_cfg, cause_indices, pred_params, pred_cfg,
        buffer, gains, render_cfg,
    )
    return cmd, new_buffer


def drive_tick_verbose(
    world: WorldState,
    perc_params,
    vae_cfg,
    cause_indices: Optional[Sequence[int]],
    pred_params,
    pred_cfg,
    buffer: LatentBuffer,
    gains: ControllerGains = ControllerGains(),
    render_cfg: RenderConfig = RenderConfig(),
) -> tuple[ControlCommand, LatentBuffer, float]:
    """drive_tick plus the predicted speed, for logging."""
    from cimlab.perception.vae import encode
    from cimlab.speedpred.model import predict_speed

    obs = render(world, render_cfg)
    code = encode(perc_params, vae_cfg, obs.ravel())
    new_buffer = push_latent(buffer, code)
    windows = cause_windows(new_buffer, cause_indices)
    predicted = predict_speed(pred_params, pred_cfg, windows)
    cmd = longitudinal_control(speed_error(predicted, world.ego_speed), gains)
    return cmd, new_buffer, predicted
