"""Minimal dense-network substrate with manual backprop.

Everything is float64 and functional: forward/backward are pure, `update`
returns fresh parameter and optimizer values, and identical inputs give
bit-identical outputs.
"""

from cimlab.nncore.net import (
    ACTIVATIONS,
    LayerSpec,
    ParameterBundle,
    Tape,
    backward,
    forward,
    init_params,
)
from cimlab.nncore.optim import OptimizerState, update
from cimlab.nncore.gradcheck import grad_check
from cimlab.nncore.serialize import load_weights, save_weights

__all__ = [
    "ACTIVATIONS",
    "LayerSpec",
    "ParameterBundle",
    "Tape",
    "forward",
    "backward",
    "init_params",
    "OptimizerState",
    "update",
    "grad_check",
    "save_weights",
    "load_weights",
]
