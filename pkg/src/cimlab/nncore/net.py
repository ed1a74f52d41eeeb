"""Dense layers: specs, parameter bundles, forward pass, reverse-mode backward."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

LEAKY_SLOPE = 0.01


def _identity(x: np.ndarray) -> np.ndarray:
    return x


def _identity_deriv(x: np.ndarray) -> np.ndarray:
    return np.ones_like(x)


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def _relu_deriv(x: np.ndarray) -> np.ndarray:
    return (x > 0.0).astype(np.float64)


def _leaky_relu(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0.0, x, LEAKY_SLOPE * x)


def _leaky_relu_deriv(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0.0, 1.0, LEAKY_SLOPE)


def sigmoid(x: np.ndarray) -> np.ndarray:
    # tanh form is stable for large |x| and never overflows
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _sigmoid_deriv(x: np.ndarray) -> np.ndarray:
    s = sigmoid(x)
    return s * (1.0 - s)


ACTIVATIONS: dict[str, tuple[Callable, Callable]] = {
    "identity": (_identity, _identity_deriv),
    "relu": (_relu, _relu_deriv),
    "leaky_relu": (_leaky_relu, _leaky_relu_deriv),
    "sigmoid": (sigmoid, _sigmoid_deriv),
}


@dataclass(frozen=True)
class LayerSpec:
    """One affine layer followed by a pointwise activation."""

    in_dim: int
    out_dim: int
    activation: str = "identity"

    def __post_init__(self) -> None:
        if self.in_dim <= 0 or self.out_dim <= 0:
            raise ValueError(f"layer dims must be positive, got {self.in_dim}x{self.out_dim}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    def to_dict(self) -> dict:
        return {"in_dim": self.in_dim, "out_dim": self.out_dim, "activation": self.activation}

    @staticmethod
    def from_dict(d: dict) -> "LayerSpec":
        return LayerSpec(int(d["in_dim"]), int(d["out_dim"]), str(d["activation"]))


@dataclass
class ParameterBundle:
    """Named float64 arrays plus their shape manifest."""

    arrays: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, a in self.arrays.items():
            if a.dtype != np.float64:
                raise ValueError(f"parameter {name!r} must be float64, got {a.dtype}")

    @property
    def names(self) -> list[str]:
        return sorted(self.arrays)

    @property
    def manifest(self) -> dict[str, tuple[int, ...]]:
        return {name: tuple(self.arrays[name].shape) for name in self.names}

    @property
    def size(self) -> int:
        return sum(a.size for a in self.arrays.values())

    def copy(self) -> "ParameterBundle":
        return ParameterBundle({k: v.copy() for k, v in self.arrays.items()})

    def zeros_like(self) -> "ParameterBundle":
        return ParameterBundle({k: np.zeros_like(v) for k, v in self.arrays.items()})

    def all_finite(self) -> bool:
        return all(np.isfinite(a).all() for a in self.arrays.values())

    def to_flat(self) -> np.ndarray:
        if not self.arrays:
            return np.zeros(0)
        return np.concatenate([self.arrays[n].ravel() for n in self.names])

    def from_flat(self, flat: np.ndarray) -> "ParameterBundle":
        """New bundle with this bundle's shapes filled from a flat vector."""
        if flat.size != self.size:
            raise ValueError(f"flat vector has {flat.size} entries, expected {self.size}")
        out: dict[str, np.ndarray] = {}
        pos = 0
        for name in self.names:
            shape = self.arrays[name].shape
            n = self.arrays[name].size
            out[name] = flat[pos : pos + n].reshape(shape).astype(np.float64)
            pos += n
        return ParameterBundle(out)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        self.arrays[name] = np.asarray(value, dtype=np.float64)


def init_params(
    specs: Sequence[LayerSpec], rng: np.random.Generator, prefix: str = ""
) -> ParameterBundle:
    """Fan-in scaled Gaussian weights (1/sqrt(in_dim)), zero biases."""
    arrays: dict[str, np.ndarray] = {}
    for i, spec in enumerate(specs):
        scale = 1.0 / np.sqrt(spec.in_dim)
        arrays[f"{prefix}W{i}"] = rng.normal(0.0, scale, size=(spec.in_dim, spec.out_dim))
        arrays[f"{prefix}b{i}"] = np.zeros(spec.out_dim)
    return ParameterBundle(arrays)


@dataclass
class Tape:
    """Everything backward() needs: layer inputs and pre-activations."""

    specs: tuple[LayerSpec, ...]
    prefix: str
    inputs: list[np.ndarray]
    preacts: list[np.ndarray]
    squeezed: bool


def forward(
    params: ParameterBundle,
    specs: Sequence[LayerSpec],
    x: np.ndarray,
    prefix: str = "",
) -> tuple[np.ndarray, Tape]:
    """Affine + activation chain.  Accepts (in,) or (batch, in) input."""
    x = np.asarray(x, dtype=np.float64)
    squeezed = x.ndim == 1
    h = x[None, :] if squeezed else x
    if h.shape[1] != specs[0].in_dim:
        raise ValueError(f"input width {h.shape[1]} != first layer in_dim {specs[0].in_dim}")
    inputs: list[np.ndarray] = []
    preacts: list[np.ndarray] = []
    for i, spec in enumerate(specs):
        inputs.append(h)
        z = h @ params[f"{prefix}W{i}"] + params[f"{prefix}b{i}"]
        preacts.append(z)
        h = ACTIVATIONS[spec.activation][0](z)
    out = h[0] if squeezed else h
    return out, Tape(tuple(specs), prefix, inputs, preacts, squeezed)


def backward(
    params: ParameterBundle, tape: Tape, upstream: np.ndarray
) -> tuple[ParameterBundle, np.ndarray]:
    """Exact reverse-mode gradients of forward; returns (param grads, input grad)."""
    g = np.asarray(upstream, dtype=np.float64)
    if tape.squeezed:
        g = g[None, :]
    grads: dict[str, np.ndarray] = {}
    for i in range(len(tape.specs) - 1, -1, -1):
        spec = tape.specs[i]
        dz = g * ACTIVATIONS[spec.activation][1](tape.preacts[i])
        grads[f"{tape.prefix}W{i}"] = tape.inputs[i].T @ dz
        grads[f"{tape.prefix}b{i}"] = dz.sum(axis=0)
        g = dz @ params[f"{tape.prefix}W{i}"].T
    gx = g[0] if tape.squeezed else g
    return ParameterBundle(grads), gx
