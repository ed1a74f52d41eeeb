"""Parameter updates: plain SGD and bias-corrected Adam, both functional."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from cimlab.nncore.net import ParameterBundle


@dataclass
class OptimizerState:
    algorithm: str = "adam"  # "sgd" | "adam"
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Optional[ParameterBundle] = None
    v: Optional[ParameterBundle] = None

    def __post_init__(self) -> None:
        if self.algorithm not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.algorithm!r}")
        if self.step < 0:
            raise ValueError("step must be >= 0")


def update(
    params: ParameterBundle, grads: ParameterBundle, opt: OptimizerState
) -> tuple[ParameterBundle, OptimizerState]:
    """One optimizer step; inputs are untouched, congruent shapes required."""
    if params.manifest != grads.manifest:
        raise ValueError("parameter and gradient shapes are not congruent")

    if opt.algorithm == "sgd":
        new = ParameterBundle(
            {k: params[k] - opt.lr * grads[k] for k in params.names}
        )
        return new, replace(opt, step=opt.step + 1)

    m = opt.m if opt.m is not None else params.zeros_like()
    v = opt.v if opt.v is not None else params.zeros_like()
    if m.manifest != params.manifest or v.manifest != params.manifest:
        raise ValueError("optimizer moments are not congruent to parameters")
    t = opt.step + 1
    new_arrays: dict[str, np.ndarray] = {}
    new_m: dict[str, np.ndarray] = {}
    new_v: dict[str, np.ndarray] = {}
    bc1 = 1.0 - opt.beta1**t
    bc2 = 1.0 - opt.beta2**t
    for k in params.names:
        g = grads[k]
        mk = opt.beta1 * m[k] + (1.0 - opt.beta1) * g
        vk = opt.beta2 * v[k] + (1.0 - opt.beta2) * g * g
        new_m[k] = mk
        new_v[k] = vk
        new_arrays[k] = params[k] - opt.lr * (mk / bc1) / (np.sqrt(vk / bc2) + opt.eps)
    return (
        ParameterBundle(new_arrays),
        replace(opt, step=t, m=ParameterBundle(new_m), v=ParameterBundle(new_v)),
    )
