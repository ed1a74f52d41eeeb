"""Windowed next-step speed prediction from cause variables."""

from cimlab.speedpred.model import (
    PredictorConfig,
    cim_config,
    cim_mlp_config,
    evaluate_mse,
    finetune,
    init_predictor,
    load_predictor,
    mse_value_and_grad,
    n_variables,
    predict_batch,
    predict_speed,
    save_predictor,
    train_predictor,
)
from cimlab.speedpred.dataset import SpeedDataset, SpeedSample, make_dataset, make_dataset_from_series

__all__ = [
    "PredictorConfig",
    "cim_config",
    "cim_mlp_config",
    "init_predictor",
    "n_variables",
    "predict_speed",
    "predict_batch",
    "train_predictor",
    "finetune",
    "evaluate_mse",
    "mse_value_and_grad",
    "save_predictor",
    "load_predictor",
    "SpeedSample",
    "SpeedDataset",
    "make_dataset",
    "make_dataset_from_series",
]
