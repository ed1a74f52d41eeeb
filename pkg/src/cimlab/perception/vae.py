"""Dense beta-VAE trained by manual backprop on the nncore substrate.

The encoder emits (mu, logvar); sampling uses caller-supplied noise so every
forward pass is reproducible.  The decoder produces logits and the training
loss uses the numerically stable logits form of pixelwise binary
cross-entropy; the public reconstruction is the sigmoid of those logits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from cimlab.nncore.net import (
    LayerSpec,
    ParameterBundle,
    backward,
    forward,
    init_params,
    sigmoid,
)
from cimlab.nncore.optim import OptimizerState, update
from cimlab.nncore.serialize import load_weights, save_weights
from cimlab.seeds import derive_rng


class VaeDivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class VaeConfig:
    grid_side: int
    latent_dim: int
    beta: float
    encoder_specs: tuple[LayerSpec, ...]
    decoder_specs: tuple[LayerSpec, ...]
    epochs: int = 30
    batch_size: int = 128
    lr: float = 1e-3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.latent_dim < 2:
            raise ValueError("latent_dim must be >= 2")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        d = self.grid_side * self.grid_side
        if self.encoder_specs[0].in_dim != d:
            raise ValueError("encoder input width must equal grid_side^2")
        if self.encoder_specs[-1].out_dim != 2 * self.latent_dim:
            raise ValueError("encoder must end in 2*latent_dim units (mu, logvar)")
        if self.decoder_specs[0].in_dim != self.latent_dim:
            raise ValueError("decoder input width must equal latent_dim")
        if self.decoder_specs[-1].out_dim != d:
            raise ValueError("decoder must end in grid_side^2 units")

    def to_dict(self) -> dict:
        return {
            "grid_side": self.grid_side,
            "latent_dim": self.latent_dim,
            "beta": self.beta,
            "encoder_specs": [s.to_dict() for s in self.encoder_specs],
            "decoder_specs": [s.to_dict() for s in self.decoder_specs],
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "lr": self.lr,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "VaeConfig":
        return VaeConfig(
            grid_side=int(d["grid_side"]),
            latent_dim=int(d["latent_dim"]),
            beta=float(d["beta"]),
            encoder_specs=tuple(LayerSpec.from_dict(s) for s in d["encoder_specs"]),
            decoder_specs=tuple(LayerSpec.from_dict(s) for s in d["decoder_specs"]),
            epochs=int(d["epochs"]),
            batch_size=int(d["batch_size"]),
            lr=float(d["lr"]),
            seed=int(d["seed"]),
        )


def _dense_specs(dims: list[int], hidden_act: str = "leaky_relu") -> tuple[LayerSpec, ...]:
    specs = []
    for i in range(len(dims) - 1):
        act = hidden_act if i < len(dims) - 2 else "identity"
        specs.append(LayerSpec(dims[i], dims[i + 1], act))
    return tuple(specs)


def desk_config(
    grid_side: int = 32,
    latent_dim: int = 16,
    beta: float = 6.0,
    epochs: int = 30,
    batch_size: int = 128,
    lr: float = 1e-3,
    seed: int = 0,
) -> VaeConfig:
    """Default profile: 32x32 grids, 1024-256-128 encoder, mirrored decoder."""
    d = grid_side * grid_side
    return VaeConfig(
        grid_side=grid_side,
        latent_dim=latent_dim,
        beta=beta,
        encoder_specs=_dense_specs([d, 256, 128, 2 * latent_dim]),
        decoder_specs=_dense_specs([latent_dim, 128, 256, d]),
        epochs=epochs,
        batch_size=batch_size,
        lr=lr,
        seed=seed,
    )


def paper_scale_config(beta: float = 6.0, seed: int = 0) -> VaeConfig:
    """64x64 inputs and a 128-dim code; heavier, kept as an optional preset."""
    d = 64 * 64
    return VaeConfig(
        grid_side=64,
        latent_dim=128,
        beta=beta,
        encoder_specs=_dense_specs([d, 1024, 512, 256, 256]),
        decoder_specs=_dense_specs([128, 256, 512, 1024, d]),
        epochs=60,
        batch_size=128,
        lr=1e-3,
        seed=seed,
    )


@dataclass
class LatentVector:
    mu: np.ndarray
    logvar: np.ndarray
    z: np.ndarray


def init_vae_params(cfg: VaeConfig) -> ParameterBundle:
    rng = derive_rng(cfg.seed, "vae-init")
    enc = init_params(cfg.encoder_specs, rng, "enc_")
    dec = init_params(cfg.decoder_specs, rng, "dec_")
    return ParameterBundle({**enc.arrays, **dec.arrays})


def vae_forward(
    params: ParameterBundle, cfg: VaeConfig, obs: np.ndarray, noise: np.ndarray
) -> tuple[LatentVector, np.ndarray]:
    """(mu, logvar, z) and sigmoid reconstruction for one obs or a batch."""
    obs = np.asarray(obs, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    k = cfg.latent_dim
    enc_out, _ = forward(params, cfg.encoder_specs, obs, "enc_")
    mu = enc_out[..., :k]
    logvar = enc_out[..., k:]
    z = mu + np.exp(0.5 * logvar) * noise
    logits, _ = forward(params, cfg.decoder_specs, z, "dec_")
    return LatentVector(mu=mu, logvar=logvar, z=z), sigmoid(logits)


def vae_loss(
    obs: np.ndarray,
    reconstruction: np.ndarray,
    mu: np.ndarray,
    logvar: np.ndarray,
    beta: float,
) -> tuple[float, float, float]:
    """(total, recon_term, kl_term) for a single observation.

    recon_term is pixelwise binary cross-entropy summed over the grid;
    kl_term = 0.5 * sum(mu^2 + exp(logvar) - 1 - logvar).
    """
    obs = np.asarray(obs, dtype=np.float64).ravel()
    r = np.clip(np.asarray(reconstruction, dtype=np.float64).ravel(), 1e-12, 1.0 - 1e-12)
    recon = float(-(obs * np.log(r) + (1.0 - obs) * np.log(1.0 - r)).sum())
    mu = np.asarray(mu, dtype=np.float64).ravel()
    lv = np.asarray(logvar, dtype=np.float64).ravel()
    kl = float(0.5 * (mu * mu + np.exp(lv) - 1.0 - lv).sum())
    return recon + beta * kl, recon, kl


def _loss_and_grads(
    params: ParameterBundle, cfg: VaeConfig, xb: np.ndarray, noise: np.ndarray
) -> tuple[float, float, float, ParameterBundle]:
    """Mean per-sample loss over a batch plus exact gradients."""
    k = cfg.latent_dim
    n = xb.shape[0]
    enc_out, enc_tape = forward(params, cfg.encoder_specs, xb, "enc_")
    mu = enc_out[:, :k]
    lv = enc_out[:, k:]
    std = np.exp(0.5 * lv)
    z = mu + std * noise
    logits, dec_tape = forward(params, cfg.decoder_specs, z, "dec_")

    recon_per = (np.logaddexp(0.0, logits) - logits * xb).sum(axis=1)
    kl_per = 0.5 * (mu * mu + np.exp(lv) - 1.0 - lv).sum(axis=1)
    total = float((recon_per + cfg.beta * kl_per).mean())

    dlogits = (sigmoid(logits) - xb) / n
    dec_grads, dz = backward(params, dec_tape, dlogits)
    dmu = dz + cfg.beta * mu / n
    dlv = dz * (0.5 * std * noise) + cfg.beta * 0.5 * (np.exp(lv) - 1.0) / n
    enc_grads, _ = backward(params, enc_tape, np.concatenate([dmu, dlv], axis=1))

    grads = ParameterBundle({**enc_grads.arrays, **dec_grads.arrays})
    return total, float(recon_per.mean()), float(kl_per.mean()), grads


def vae_value_and_grad(cfg: VaeConfig, xb: np.ndarray, noise: np.ndarray):
    """Closure mapping params -> (loss, grads); feeds nncore.grad_check."""

    def fn(params: ParameterBundle) -> tuple[float, ParameterBundle]:
        total, _, _, grads = _loss_and_grads(params, cfg, xb, noise)
        return total, grads

    return fn


def train_vae(
    dataset: np.ndarray, cfg: VaeConfig
) -> tuple[ParameterBundle, list[dict]]:
    """Minibatch Adam on the beta-VAE objective; returns weights and the curve.

    The curve holds one row per epoch: mean per-sample recon, kl, total.
    Identical (dataset, config) pairs give bit-identical weights.
    """
    dataset = np.asarray(dataset, dtype=np.float64)
    if dataset.ndim != 2 or dataset.shape[0] == 0:
        raise ValueError("dataset must be a nonempty (n, grid^2) array")
    if dataset.shape[1] != cfg.grid_side * cfg.grid_side:
        raise ValueError("dataset width does not match grid_side")

    n = dataset.shape[0]
    k = cfg.latent_dim
    params = init_vae_params(cfg)
    opt = OptimizerState(algorithm="adam", lr=cfg.lr)
    curve: list[dict] = []

    for epoch in range(cfg.epochs):
        perm = derive_rng(cfg.seed, "vae-shuffle", epoch).permutation(n)
        noise_all = derive_rng(cfg.seed, "vae-noise", epoch).standard_normal((n, k))
        tot_sum = rec_sum = kl_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            total, rec, kl, grads = _loss_and_grads(
                params, cfg, dataset[idx], noise_all[start : start + len(idx)]
            )
            if not np.isfinite(total):
                raise VaeDivergenceError(
                    f"non-finite loss at epoch {epoch} (batch start {start}): {total}"
                )
            params, opt = update(params, grads, opt)
            tot_sum += total * len(idx)
            rec_sum += rec * len(idx)
            kl_sum += kl * len(idx)
        curve.append(
            {
                "epoch": epoch,
                "recon": rec_sum / n,
                "kl": kl_sum / n,
                "total": tot_sum / n,
            }
        )
    return params, curve


def encode(params: ParameterBundle, cfg: VaeConfig, obs: np.ndarray) -> np.ndarray:
    """Noise-free code: the posterior mean mu.  Deterministic."""
    enc_out, _ = forward(params, cfg.encoder_specs, np.asarray(obs, dtype=np.float64), "enc_")
    return enc_out[..., : cfg.latent_dim]


def decode(params: ParameterBundle, cfg: VaeConfig, z: np.ndarray) -> np.ndarray:
    logits, _ = forward(params, cfg.decoder_specs, np.asarray(z, dtype=np.float64), "dec_")
    return sigmoid(logits)


def save_vae(path: str | Path, params: ParameterBundle, cfg: VaeConfig) -> None:
    save_weights(path, params, meta={"kind": "vae", "config": cfg.to_dict()})


def load_vae(path: str | Path) -> tuple[ParameterBundle, VaeConfig]:
    params, meta = load_weights(path)
    if meta.get("kind") != "vae":
        raise ValueError(f"{path}: not a VAE weight file")
    return params, VaeConfig.from_dict(meta["config"])


def save_training_curve(path: str | Path, curve: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("epoch,recon,kl,total\n")
        for row in curve:
            f.write(f"{row['epoch']},{row['recon']!r},{row['kl']!r},{row['total']!r}\n")
