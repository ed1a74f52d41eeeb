"""Supervised samples for the speed predictor, pulled from episode logs.

One sample per valid tick t (t >= 2 with t+1 still inside the episode):
3-step windows of the selected latent coordinates, target = the ego's
realized speed at t+1.  Windows never cross episode boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from cimlab.nncore.net import ParameterBundle
from cimlab.perception.vae import VaeConfig, encode
from cimlab.speedpred.model import WINDOW


@dataclass(frozen=True)
class SpeedSample:
    windows: np.ndarray  # (m, 3), columns ordered oldest -> newest
    target: float  # m/s at t+1

    def __post_init__(self) -> None:
        if self.windows.shape[1] != WINDOW:
            raise ValueError(f"windows must have length {WINDOW}")
        if self.target < 0:
            raise ValueError("target speed must be >= 0")


@dataclass
class SpeedDataset:
    X: np.ndarray  # (n, m, 3)
    y: np.ndarray  # (n,)

    def __len__(self) -> int:
        return int(self.y.size)

    def __getitem__(self, i: int) -> SpeedSample:
        return SpeedSample(self.X[i], float(self.y[i]))

    def subsample(self, n: int, rng: np.random.Generator) -> "SpeedDataset":
        if n >= len(self):
            return SpeedDataset(self.X.copy(), self.y.copy())
        idx = np.sort(rng.choice(len(self), size=n, replace=False))
        return SpeedDataset(self.X[idx], self.y[idx])


def make_dataset_from_series(
    Z: np.ndarray, speeds: np.ndarray, coords: Optional[Sequence[int]]
) -> SpeedDataset:
    """Windows/targets from one episode's latent matrix (T, k) and speeds (T,)."""
    Z = np.asarray(Z, dtype=np.float64)
    speeds = np.asarray(speeds, dtype=np.float64).ravel()
    T = speeds.size
    cols = np.arange(Z.shape[1]) if coords is None else np.asarray(coords, dtype=int)
    if cols.size == 0:
        raise ValueError("empty cause set: no input variables to window")
    if T < WINDOW + 1:
        return SpeedDataset(np.zeros((0, cols.size, WINDOW)), np.zeros(0))
    t = np.arange(WINDOW - 1, T - 1)
    # axis 2 ordered oldest -> newest: t-2, t-1, t
    X = np.stack([Z[t - 2][:, cols], Z[t - 1][:, cols], Z[t][:, cols]], axis=2)
    y = speeds[t + 1]
    return SpeedDataset(X, y)


def make_dataset(
    logs: Iterable,
    enc_params: ParameterBundle,
    vae_cfg: VaeConfig,
    cause_indices: Optional[Sequence[int]],
) -> SpeedDataset:
    """Encode each log with the frozen perception weights and window the codes.

    ``cause_indices=None`` means ALL latent coordinates (the CIM-MLP path);
    an empty sequence is an error.
    """
    if cause_indices is not None and len(cause_indices) == 0:
        raise ValueError("empty cause set: no input variables to window")
    parts_X: list[np.ndarray] = []
    parts_y: list[np.ndarray] = []
    for log in logs:
        Z = encode(enc_params, vae_cfg, log.flat_observations())
        ds = make_dataset_from_series(Z, log.speeds, cause_indices)
        if len(ds):
            parts_X.append(ds.X)
            parts_y.append(ds.y)
    if not parts_X:
        raise ValueError("no episode long enough to produce a sample")
    return SpeedDataset(np.concatenate(parts_X), np.concatenate(parts_y))
