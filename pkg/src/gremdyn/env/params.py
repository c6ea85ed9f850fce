"""Model parameterization and derived constants.

The landscape lives on the N-dimensional hypercube split into a first block
of N1 = floor(p*N) coordinates and a second block of N2 = N - N1.  Only the
non-cascading weight region a <= p is supported; a > p is rejected outright.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

BETA_STAR = math.sqrt(2.0 * math.log(2.0))
KAPPA = math.log(math.log(2.0)) + math.log(4.0 * math.pi)


class ParameterError(ValueError):
    """Raised when a parameter combination is outside the supported region."""


@dataclass(frozen=True)
class ModelParams:
    """Complete input parameterization: everything else is derived from this."""

    N: int
    p: float
    a: float
    beta: float
    seed: int

    def __post_init__(self):
        if self.N < 2:
            raise ParameterError(f"N={self.N}: need N >= 2")
        if not 0.0 < self.p < 1.0:
            raise ParameterError(f"p={self.p}: need p in (0,1)")
        if not 0.0 < self.a <= 1.0:
            raise ParameterError(f"a={self.a}: need a in (0,1]")
        if self.a > self.p:
            raise ParameterError(
                f"a={self.a} > p={self.p}: cascading regime unsupported"
            )
        if not self.beta > 0.0:
            raise ParameterError(f"beta={self.beta}: need beta > 0")
        n1 = math.floor(self.p * self.N)
        if n1 < 1 or self.N - n1 < 1:
            raise ParameterError(
                f"N={self.N}, p={self.p}: both coordinate blocks must be nonempty"
            )


@dataclass(frozen=True)
class DerivedParams:
    """Constants derived from ModelParams, used throughout.

    beta_star is the low-temperature threshold sqrt(2 ln 2); kappa the
    constant in the max rescaling; bar_beta_FT = (1-p) beta_star / (2a) the
    fine-tuning temperature around which the dynamical regimes split;
    alpha = beta_star/beta the tail index of the limiting weight process.
    """

    N1: int
    N2: int
    beta_star: float
    kappa: float
    bar_beta_FT: float
    alpha: float
    low_temp: bool
    ft_visible: bool
    # carried through so downstream consumers (time scales, fluctuation
    # variance targets) need only a DerivedParams
    p: float
    a: float

    @property
    def N(self) -> int:
        return self.N1 + self.N2

    @property
    def beta(self) -> float:
        return self.beta_star / self.alpha


def derive(params: ModelParams) -> DerivedParams:
    """Validate params and populate every derived constant."""
    n1 = math.floor(params.p * params.N)
    bar_beta_ft = (1.0 - params.p) * BETA_STAR / (2.0 * params.a)
    return DerivedParams(
        N1=n1,
        N2=params.N - n1,
        beta_star=BETA_STAR,
        kappa=KAPPA,
        bar_beta_FT=bar_beta_ft,
        alpha=BETA_STAR / params.beta,
        low_temp=params.beta > BETA_STAR,
        ft_visible=bar_beta_ft > BETA_STAR,
        p=params.p,
        a=params.a,
    )


_CONFIG_KEYS = ("N", "p", "a", "beta", "seed")


def params_from_dict(cfg: dict) -> ModelParams:
    missing = [k for k in _CONFIG_KEYS if k not in cfg]
    if missing:
        raise ParameterError(f"config missing keys: {missing}")
    return ModelParams(
        N=int(cfg["N"]),
        p=float(cfg["p"]),
        a=float(cfg["a"]),
        beta=float(cfg["beta"]),
        seed=int(cfg["seed"]),
    )


def load_params(path: str | Path) -> ModelParams:
    """Read ModelParams from a JSON config file (keys exactly N, p, a, beta, seed)."""
    with open(path) as fh:
        return params_from_dict(json.load(fh))
