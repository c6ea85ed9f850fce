"""Observation time scales for the rescaled dynamics.

Two families, both kept as logs because they are exponential in N:

  threshold scale  log c_N(L) = beta (beta_star N - (log N + kappa)/(2 beta_star))
                                - beta (beta_star a N + sqrt(aN) L)
  ergodic scale    log cbar_N = -N2 log 2 + beta (beta_star N - (log N + kappa)/(2 beta_star))

Lowering L lengthens c_N and admits more deep states into the visited set.
The balance temperature attached to a threshold L is
beta_FT = bar_beta_FT - theta/sqrt(N) with theta = (1-p) L / (2 a^{3/2}).
The boundary case a = p only supports L < 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..env.params import DerivedParams, ParameterError


@dataclass(frozen=True)
class TimeScales:
    c_N_log: float
    bar_c_N_log: float
    L: float
    theta: float
    beta_FT: float


def timescales(d: DerivedParams, L: float) -> TimeScales:
    if d.a == d.p and L >= 0.0:
        raise ParameterError("the boundary case a = p requires L < 0")
    beta = d.beta
    lead = beta * (d.beta_star * d.N - (math.log(d.N) + d.kappa) / (2.0 * d.beta_star))
    c_log = lead - beta * (d.beta_star * d.a * d.N + math.sqrt(d.a * d.N) * L)
    bar_log = -d.N2 * math.log(2.0) + lead
    theta = (1.0 - d.p) / (2.0 * d.a ** 1.5) * L
    return TimeScales(
        c_N_log=c_log,
        bar_c_N_log=bar_log,
        L=L,
        theta=theta,
        beta_FT=d.bar_beta_FT - theta / math.sqrt(d.N),
    )


def scale_log(ts: TimeScales, selector: str) -> float:
    """Log of the physical-time multiplier for a named scale selector."""
    if selector == "c":
        return ts.c_N_log
    if selector == "cbar":
        return ts.bar_c_N_log
    if selector == "raw":
        return 0.0
    raise ValueError(f"unknown scale selector {selector!r}; use c|cbar|raw")
