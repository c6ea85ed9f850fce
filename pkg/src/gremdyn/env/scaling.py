"""Affine rescaling of extremes and the exponential weight map.

u_scale is the centering/scaling under which the maximum of 2^N iid standard
normals has a Gumbel limit; u_unscale is its exact algebraic inverse.  The
weight of a configuration on the ergodic scales is exp((beta/beta_star) *
u_unscale(value)), kept in log space because the exponent is order beta*N.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .params import DerivedParams


def u_scale(d: DerivedParams, x):
    """Map a rescaled value x to the raw scale of the maximum."""
    s = d.beta_star * math.sqrt(d.N)
    return x / s + s - (math.log(d.N) + d.kappa) / (2.0 * s)


def u_unscale(d: DerivedParams, y):
    """Exact inverse of u_scale."""
    s = d.beta_star * math.sqrt(d.N)
    return s * (y - s) + (math.log(d.N) + d.kappa) / 2.0


class GammaWeight(NamedTuple):
    value: float  # may overflow to inf for extreme arguments
    log: float    # always finite


def gamma_log_weight(d: DerivedParams, u_inv) -> float:
    return (d.beta / d.beta_star) * u_inv


def gamma_weight(d: DerivedParams, u_inv) -> GammaWeight:
    """exp((beta/beta_star) * u_inv), with its log reported alongside."""
    lw = gamma_log_weight(d, u_inv)
    with np.errstate(over="ignore"):
        return GammaWeight(value=float(np.exp(lw)), log=float(lw))
