"""Probabilistic learning vector quantization on the SPD manifold."""

from ._plrsq import (
    Error,
    Model,
    MdrmModel,
    RslvqModel,
    TrainConfig,
    dist_sq_gradient,
    exp_map,
    gen_synth,
    geo_distance,
    karcher_mean,
    kappa,
    load_model,
    log_map,
    mdrm_train,
    save_model,
    train,
)

__all__ = [
    "Error",
    "MdrmModel",
    "Model",
    "RslvqModel",
    "TrainConfig",
    "dist_sq_gradient",
    "exp_map",
    "gen_synth",
    "geo_distance",
    "kappa",
    "karcher_mean",
    "load_model",
    "log_map",
    "mdrm_train",
    "save_model",
    "train",
]
