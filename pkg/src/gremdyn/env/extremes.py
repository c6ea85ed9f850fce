"""Streaming extraction of the deepest landscape configurations.

The scan never materializes the 2^N table: level-2 values are hashed on the
fly, one first-block state at a time.  Within a block the inverse-CDF map is
monotone, so the block's k best configurations are found on raw uniforms
(cheap) and only those k get the normal transform.  A single global top-k
list is merged as blocks stream by, so memory is O(k + 2^N1).

Ties (probability zero, but floats force a total order) are broken toward
the smaller flat configuration index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import logsumexp

from .oracle import EnergyOracle
from .rng import U64, mix64, ppnd16, u01
from .scaling import u_unscale


@dataclass(frozen=True)
class ExtremeRecord:
    """One deep configuration: rank 1 is the global maximum."""

    rank: int
    sigma1: int
    sigma2: int
    xi_total: float
    xi1: float
    xi2: float
    u_inv: float
    w: float


@njit(cache=True)
def _topk_stream(key2, n1_states, n2_states, k, sqrt_a, sqrt_1ma, xi1, l2scale,
                 g_xi, g_idx, g_xi1, g_xi2):
    bu = np.empty(k)
    bi = np.empty(k, np.int64)
    nb = k if n2_states >= k else n2_states
    for b in range(n1_states):
        base = b * n2_states
        if l2scale == 0.0:
            # degenerate hook: all level-2 values tie at 0, keep smallest indices
            for j in range(nb):
                bu[j] = 0.5
                bi[j] = j
        else:
            for j in range(k):
                bu[j] = -1.0
                bi[j] = -1
            for s in range(n2_states):
                u = u01(mix64(key2 + U64(base + s)))
                if u > bu[k - 1]:
                    j = k - 1
                    while j > 0 and bu[j - 1] < u:
                        bu[j] = bu[j - 1]
                        bi[j] = bi[j - 1]
                        j -= 1
                    bu[j] = u
                    bi[j] = s
        x1c = sqrt_a * xi1[b]
        for j in range(nb):
            if bi[j] < 0:
                continue
            x2 = l2scale * ppnd16(bu[j]) if l2scale != 0.0 else 0.0
            x = x1c + sqrt_1ma * x2
            gidx = base + bi[j]
            last = k - 1
            if x > g_xi[last] or (x == g_xi[last] and gidx < g_idx[last]):
                m = last
                while m > 0 and (x > g_xi[m - 1]
                                 or (x == g_xi[m - 1] and gidx < g_idx[m - 1])):
                    g_xi[m] = g_xi[m - 1]
                    g_idx[m] = g_idx[m - 1]
                    g_xi1[m] = g_xi1[m - 1]
                    g_xi2[m] = g_xi2[m - 1]
                    m -= 1
                g_xi[m] = x
                g_idx[m] = gidx
                g_xi1[m] = xi1[b]
                g_xi2[m] = x2
    return g_xi, g_idx, g_xi1, g_xi2


def top_k(oracle: EnergyOracle, k: int) -> list[ExtremeRecord]:
    """The k largest total values over all 2^N configurations, ranked."""
    d = oracle.derived
    if k < 1:
        raise ValueError("k must be positive")
    if k > (1 << d.N):
        raise ValueError(f"k={k} exceeds the {1 << d.N} available states")
    a = oracle.params.a
    xi1 = oracle.level1_values()
    g_xi = np.full(k, -np.inf)
    g_idx = np.full(k, np.iinfo(np.int64).max, dtype=np.int64)
    g_xi1 = np.zeros(k)
    g_xi2 = np.zeros(k)
    _topk_stream(oracle.level2_key, 1 << d.N1, 1 << d.N2, k,
                 math.sqrt(a), math.sqrt(1.0 - a), xi1, oracle.level2_scale,
                 g_xi, g_idx, g_xi1, g_xi2)
    center = math.sqrt(a * d.N) * d.beta_star
    records = []
    for i in range(k):
        records.append(ExtremeRecord(
            rank=i + 1,
            sigma1=int(g_idx[i]) >> d.N2,
            sigma2=int(g_idx[i]) & ((1 << d.N2) - 1),
            xi_total=float(g_xi[i]),
            xi1=float(g_xi1[i]),
            xi2=float(g_xi2[i]),
            u_inv=float(u_unscale(d, g_xi[i])),
            w=float(g_xi1[i] - center),
        ))
    return records


def level_log_sums(oracle: EnergyOracle, records: list[ExtremeRecord]) -> np.ndarray:
    """log of sum_{sigma2} exp((beta/beta_star) u_unscale(xi)) per record's block."""
    d = oracle.derived
    sigma1s = [r.sigma1 for r in records]
    if len(set(sigma1s)) != len(sigma1s):
        raise ValueError("records must carry distinct sigma1 values")
    a = oracle.params.a
    ratio = d.beta / d.beta_star
    out = np.empty(len(records))
    for i, r in enumerate(records):
        xi2 = oracle.level2_block(r.sigma1)
        xi = math.sqrt(a) * r.xi1 + math.sqrt(1.0 - a) * xi2
        out[i] = logsumexp(ratio * u_unscale(d, xi))
    return out


def level_sums(oracle: EnergyOracle, records: list[ExtremeRecord]) -> np.ndarray:
    """Per-block weight sums (linear scale; may overflow to inf for huge beta*N)."""
    with np.errstate(over="ignore"):
        return np.exp(level_log_sums(oracle, records))
