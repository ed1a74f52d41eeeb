"""Shallow speed predictor: per-variable 3-step encoders feeding a small head.

Each input variable contributes its own linear 3 -> width encoder with ReLU;
the concatenated codes pass through one hidden ReLU layer to a scalar.  The
deployed prediction is clamped at zero.  Training never touches perception
weights: the datasets are built from frozen latent codes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from cimlab.nncore.net import LayerSpec, ParameterBundle, backward, forward, init_params
from cimlab.nncore.optim import OptimizerState, update
from cimlab.nncore.serialize import load_weights, save_weights
from cimlab.seeds import derive_rng

WINDOW = 3


class PredictorDivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class PredictorConfig:
    variant: str  # "cim" | "cim_mlp"
    enc_width: int
    head_hidden: int | None = None  # None: max(32, concat_width // 2)
    epochs: int = 100
    batch_size: int = 256
    lr: float = 1e-3
    seed: int = 0
    fewshot_epochs: int = 50
    fewshot_budget: int = 100
    window: int = WINDOW

    def __post_init__(self) -> None:
        if self.variant not in ("cim", "cim_mlp"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.window != WINDOW:
            raise ValueError(f"window length is fixed at {WINDOW}")
        if self.enc_width <= 0 or (self.head_hidden is not None and self.head_hidden <= 0):
            raise ValueError("widths must be > 0")

    def head_width(self, m: int) -> int:
        if self.head_hidden is not None:
            return self.head_hidden
        return max(32, (m * self.enc_width) // 2)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "enc_width": self.enc_width,
            "head_hidden": self.head_hidden,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "lr": self.lr,
            "seed": self.seed,
            "fewshot_epochs": self.fewshot_epochs,
            "fewshot_budget": self.fewshot_budget,
            "window": self.window,
        }

    @staticmethod
    def from_dict(d: dict) -> "PredictorConfig":
        return PredictorConfig(
            variant=str(d["variant"]),
            enc_width=int(d["enc_width"]),
            head_hidden=None if d.get("head_hidden") is None else int(d["head_hidden"]),
            epochs=int(d["epochs"]),
            batch_size=int(d["batch_size"]),
            lr=float(d["lr"]),
            seed=int(d["seed"]),
            fewshot_epochs=int(d["fewshot_epochs"]),
            fewshot_budget=int(d["fewshot_budget"]),
            window=int(d["window"]),
        )


def cim_config(seed: int = 0, **kw) -> PredictorConfig:
    return PredictorConfig(variant="cim", enc_width=16, seed=seed, **kw)


def cim_mlp_config(seed: int = 0, **kw) -> PredictorConfig:
    return PredictorConfig(variant="cim_mlp", enc_width=8, seed=seed, **kw)


def _enc_spec(cfg: PredictorConfig) -> LayerSpec:
    return LayerSpec(WINDOW, cfg.enc_width, "relu")


def _head_specs(cfg: PredictorConfig, m: int) -> tuple[LayerSpec, LayerSpec]:
    h = cfg.head_width(m)
    return (LayerSpec(m * cfg.enc_width, h, "relu"), LayerSpec(h, 1, "identity"))


def init_predictor(cfg: PredictorConfig, m: int) -> ParameterBundle:
    if m < 1:
        raise ValueError("need at least one input variable")
    rng = derive_rng(cfg.seed, "pred-init", cfg.variant, m)
    arrays: dict[str, np.ndarray] = {}
    for i in range(m):
        arrays.update(init_params([_enc_spec(cfg)], rng, f"enc{i}_").arrays)
    arrays.update(init_params(list(_head_specs(cfg, m)), rng, "head_").arrays)
    return ParameterBundle(arrays)


def n_variables(params: ParameterBundle) -> int:
    return sum(1 for name in params.names if name.startswith("enc") and name.endswith("_W0"))


def _forward_raw(
    params: ParameterBundle, cfg: PredictorConfig, X: np.ndarray
) -> tuple[np.ndarray, list, object]:
    """Unclamped scalar outputs for X of shape (n, m, 3)."""
    n, m, w = X.shape
    if w != WINDOW:
        raise ValueError(f"windows must have length {WINDOW}, got {w}")
    if m != n_variables(params):
        raise ValueError(f"predictor was built for {n_variables(params)} variables, got {m}")
    enc_spec = [_enc_spec(cfg)]
    codes = []
    enc_tapes = []
    for i in range(m):
        h, tape = forward(params, enc_spec, X[:, i, :], f"enc{i}_")
        codes.append(h)
        enc_tapes.append(tape)
    concat = np.concatenate(codes, axis=1)
    out, head_tape = forward(params, _head_specs(cfg, m), concat, "head_")
    return out[:, 0], enc_tapes, head_tape


def predict_batch(params: ParameterBundle, cfg: PredictorConfig, X: np.ndarray) -> np.ndarray:
    """Deployed predictions (clamped at zero) for a batch of window stacks."""
    raw, _, _ = _forward_raw(params, cfg, np.asarray(X, dtype=np.float64))
    return np.maximum(raw, 0.0)


def predict_speed(params: ParameterBundle, cfg: PredictorConfig, windows: np.ndarray) -> float:
    """Next-step speed (m/s, >= 0) from (m, 3) windows ordered oldest to newest."""
    windows = np.asarray(windows, dtype=np.float64)
    if windows.ndim != 2:
        raise ValueError("windows must be a (m, 3) array")
    return float(predict_batch(params, cfg, windows[None, :, :])[0])


def _mse_and_grads(
    params: ParameterBundle, cfg: PredictorConfig, X: np.ndarray, y: np.ndarray
) -> tuple[float, ParameterBundle]:
    n, m, _ = X.shape
    raw, enc_tapes, head_tape = _forward_raw(params, cfg, X)
    diff = raw - y
    mse = float((diff * diff).mean())
    dout = (2.0 * diff / n)[:, None]
    head_grads, dconcat = backward(params, head_tape, dout)
    arrays = dict(head_grads.arrays)
    w = cfg.enc_width
    for i in range(m):
        enc_grads, _ = backward(params, enc_tapes[i], dconcat[:, i * w : (i + 1) * w])
        arrays.update(enc_grads.arrays)
    return mse, ParameterBundle(arrays)


def mse_value_and_grad(cfg: PredictorConfig, X: np.ndarray, y: np.ndarray):
    """Closure mapping params -> (mse, grads); feeds nncore.grad_check."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)

    def fn(params: ParameterBundle) -> tuple[float, ParameterBundle]:
        return _mse_and_grads(params, cfg, X, y)

    return fn


def _run_epochs(
    params: ParameterBundle,
    cfg: PredictorConfig,
    X: np.ndarray,
    y: np.ndarray,
    epochs: int,
    shuffle_tag: str,
) -> tuple[ParameterBundle, list[float]]:
    n = X.shape[0]
    opt = OptimizerState(algorithm="adam", lr=cfg.lr)
    history: list[float] = []
    for epoch in range(epochs):
        perm = derive_rng(cfg.seed, shuffle_tag, epoch).permutation(n)
        sq_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            mse, grads = _mse_and_grads(params, cfg, X[idx], y[idx])
            if not np.isfinite(mse):
                raise PredictorDivergenceError(f"non-finite MSE at epoch {epoch}")
            params, opt = update(params, grads, opt)
            sq_sum += mse * len(idx)
        history.append(sq_sum / n)
    return params, history


def train_predictor(
    X: np.ndarray, y: np.ndarray, cfg: PredictorConfig
) -> tuple[ParameterBundle, list[float]]:
    """Fit from scratch by minibatch Adam on MSE; returns weights and history."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 3 or X.shape[0] == 0:
        raise ValueError("X must be a nonempty (n, m, 3) array")
    if y.size != X.shape[0]:
        raise ValueError("X and y lengths differ")
    params = init_predictor(cfg, X.shape[1])
    return _run_epochs(params, cfg, X, y, cfg.epochs, "pred-shuffle")


def finetune(
    params: ParameterBundle, X: np.ndarray, y: np.ndarray, cfg: PredictorConfig
) -> ParameterBundle:
    """Continue optimization on a small sample budget; zero samples is a no-op."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.shape[0] == 0:
        return params.copy()
    if X.shape[0] > cfg.fewshot_budget:
        raise ValueError(f"{X.shape[0]} samples exceed the few-shot budget {cfg.fewshot_budget}")
    tuned, _ = _run_epochs(params.copy(), cfg, X, y, cfg.fewshot_epochs, "finetune-shuffle")
    return tuned


def evaluate_mse(
    params: ParameterBundle, cfg: PredictorConfig, X: np.ndarray, y: np.ndarray
) -> float:
    """MSE of deployed (clamped) predictions on held-out samples."""
    pred = predict_batch(params, cfg, np.asarray(X, dtype=np.float64))
    diff = pred - np.asarray(y, dtype=np.float64).ravel()
    return float((diff * diff).mean())


def save_predictor(
    path: str | Path,
    params: ParameterBundle,
    cfg: PredictorConfig,
    cause_fingerprint: str = "",
) -> None:
    save_weights(
        path,
        params,
        meta={
            "kind": "speed_predictor",
            "config": cfg.to_dict(),
            "n_variables": n_variables(params),
            "cause_fingerprint": cause_fingerprint,
        },
    )


def load_predictor(path: str | Path) -> tuple[ParameterBundle, PredictorConfig, dict]:
    params, meta = load_weights(path)
    if meta.get("kind") != "speed_predictor":
        raise ValueError(f"{path}: not a speed predictor weight file")
    return params, PredictorConfig.from_dict(meta["config"]), meta
