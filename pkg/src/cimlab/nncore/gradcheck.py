"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

from cimlab.nncore.net import ParameterBundle

# Above this many parameters we only probe a seeded random subset.
SUBSET_THRESHOLD = 10_000
SUBSET_SIZE = 2_000


def grad_check(
    value_and_grad: Callable[[ParameterBundle], tuple[float, ParameterBundle]],
    params: ParameterBundle,
    h: float = 1e-5,
    subset_seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``value_and_grad`` maps a parameter bundle to (scalar loss, gradient
    bundle).  The finite-difference side re-evaluates only the loss value, so
    it is independent of the backward pass it checks.
    """
    if h <= 0:
        raise ValueError("h must be > 0")
    _, analytic = value_and_grad(params)
    flat = params.to_flat()
    grad_flat = analytic.to_flat()

    n = flat.size
    if n > SUBSET_THRESHOLD:
        idx = np.random.default_rng(subset_seed).choice(n, size=SUBSET_SIZE, replace=False)
        idx.sort()
    else:
        idx = np.arange(n)

    max_err = 0.0
    for i in idx:
        bumped = flat.copy()
        bumped[i] = flat[i] + h
        up, _ = value_and_grad(params.from_flat(bumped))
        bumped[i] = flat[i] - h
        down, _ = value_and_grad(params.from_flat(bumped))
        fd = (up - down) / (2.0 * h)
        denom = max(abs(fd), abs(grad_flat[i]), 1.0)
        max_err = max(max_err, abs(fd - grad_flat[i]) / denom)
    return max_err
