"""Beta-VAE perception: observations to disentangled latent codes."""

from cimlab.perception.vae import (
    LatentVector,
    VaeConfig,
    VaeDivergenceError,
    decode,
    desk_config,
    encode,
    load_vae,
    paper_scale_config,
    save_training_curve,
    save_vae,
    train_vae,
    vae_forward,
    vae_loss,
    vae_value_and_grad,
)
from cimlab.perception.traversal import (
    TRAVERSAL_VALUES,
    region_variance,
    traverse,
    write_pgm_strip,
)

__all__ = [
    "VaeConfig",
    "LatentVector",
    "VaeDivergenceError",
    "desk_config",
    "paper_scale_config",
    "vae_forward",
    "vae_loss",
    "vae_value_and_grad",
    "train_vae",
    "encode",
    "decode",
    "save_vae",
    "load_vae",
    "save_training_curve",
    "traverse",
    "TRAVERSAL_VALUES",
    "region_variance",
    "write_pgm_strip",
]
