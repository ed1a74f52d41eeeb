"""Deterministic longitudinal driving world with rendering and a rule-based expert."""

from cimlab.simworld.params import PhysicsParams
from cimlab.simworld.town import TownConfig, TaskSpec, builtin_towns
from cimlab.simworld.world import (
    ControlCommand,
    StepEvents,
    WorldState,
    expert_target_speed,
    init_world,
    state_digest,
    step,
)
from cimlab.simworld.render import RenderConfig, render, road_mask
from cimlab.simworld.episode import (
    EpisodeLog,
    ExpertCollisionError,
    FactorTrace,
    export_csv,
    load_episode,
    run_expert_episode,
    save_episode,
)

__all__ = [
    "PhysicsParams",
    "TownConfig",
    "TaskSpec",
    "builtin_towns",
    "WorldState",
    "ControlCommand",
    "StepEvents",
    "init_world",
    "step",
    "expert_target_speed",
    "state_digest",
    "RenderConfig",
    "render",
    "road_mask",
    "EpisodeLog",
    "FactorTrace",
    "ExpertCollisionError",
    "run_expert_episode",
    "save_episode",
    "load_episode",
    "export_csv",
]
