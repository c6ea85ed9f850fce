"""Deterministic lazy landscape: parameters, generator, extremes, bins."""
from .bins import BinScanResult, BinStats, bin_scan, expected_count
from .extremes import ExtremeRecord, level_log_sums, level_sums, top_k
from .oracle import EnergyOracle, flat_level2, zero_environment
from .params import (
    BETA_STAR,
    KAPPA,
    DerivedParams,
    ModelParams,
    ParameterError,
    derive,
    load_params,
    params_from_dict,
)
from .rng import derive_seed
from .scaling import GammaWeight, gamma_log_weight, gamma_weight, u_scale, u_unscale

__all__ = [
    "BETA_STAR",
    "KAPPA",
    "BinScanResult",
    "BinStats",
    "DerivedParams",
    "EnergyOracle",
    "ExtremeRecord",
    "GammaWeight",
    "ModelParams",
    "ParameterError",
    "bin_scan",
    "derive",
    "derive_seed",
    "expected_count",
    "flat_level2",
    "gamma_log_weight",
    "gamma_weight",
    "level_log_sums",
    "level_sums",
    "load_params",
    "params_from_dict",
    "top_k",
    "u_scale",
    "u_unscale",
    "zero_environment",
]
