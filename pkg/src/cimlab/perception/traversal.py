"""Latent traversals: sweep one coordinate, decode, measure what moves."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from cimlab.nncore.net import ParameterBundle
from cimlab.perception.vae import VaeConfig, decode, encode

TRAVERSAL_VALUES = tuple(np.linspace(-3.0, 3.0, 7))


def traverse(
    params: ParameterBundle,
    cfg: VaeConfig,
    obs: np.ndarray,
    dim: int,
    values: Sequence[float] = TRAVERSAL_VALUES,
) -> np.ndarray:
    """Decode mu with coordinate ``dim`` replaced by each value.

    Returns (len(values), grid, grid) reconstructions.
    """
    if not 0 <= dim < cfg.latent_dim:
        raise IndexError(f"latent dim {dim} out of range for k={cfg.latent_dim}")
    mu = encode(params, cfg, np.asarray(obs, dtype=np.float64).ravel())
    zs = np.tile(mu, (len(values), 1))
    zs[:, dim] = np.asarray(values, dtype=np.float64)
    frames = decode(params, cfg, zs)
    return frames.reshape(len(values), cfg.grid_side, cfg.grid_side)


def region_variance(frames: np.ndarray, mask: np.ndarray) -> tuple[float, float]:
    """(mean pixel variance inside mask, outside mask) across traversal frames."""
    var = frames.var(axis=0)
    inside = float(var[mask].mean()) if mask.any() else 0.0
    outside = float(var[~mask].mean()) if (~mask).any() else 0.0
    return inside, outside


def write_pgm_strip(path: str | Path, frames: np.ndarray, pad: int = 1) -> None:
    """Write traversal frames as one horizontal 8-bit PGM strip."""
    frames = np.asarray(frames)
    n, h, w = frames.shape
    strip = np.zeros((h, n * w + (n - 1) * pad))
    for i in range(n):
        c = i * (w + pad)
        strip[:, c : c + w] = frames[i]
    img = np.clip(np.round(strip * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        f.write(img.tobytes())
