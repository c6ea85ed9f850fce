"""Resolution-delta binning of the first-level values around their peak.

Blocks are assigned to intervals of width N^-(1/2+delta) centered on
sqrt(a N) beta_star, scanning |j| <= N^(1/2+delta+eps).  Each bin reports
how many first-block states it holds and the largest total value among
them; the scan also keeps the per-bin best candidates so the binned top-k
can be compared exactly against the global one whenever every deep block
falls inside the scanned range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .extremes import ExtremeRecord
from .oracle import EnergyOracle
from .rng import U64, mix64, ppnd16, u01
from .scaling import u_unscale


@dataclass(frozen=True)
class BinStats:
    j: int
    count: int
    bin_max: float | None  # None is the empty sentinel, never -inf/NaN
    delta: float
    eps: float


@dataclass(frozen=True)
class BinScanResult:
    bins: list[BinStats]
    top_records: list[ExtremeRecord]  # merged per-bin candidates, ranked
    j_limit: int
    delta: float
    eps: float

    def counts_total(self) -> int:
        return sum(b.count for b in self.bins)


@njit(cache=True)
def _block_candidates(key2, n2_states, k, sqrt_a, sqrt_1ma, xi1, l2scale,
                      in_range, cand_xi, cand_x2, cand_s2):
    n1_states = xi1.size
    bu = np.empty(k)
    bi = np.empty(k, np.int64)
    nb = k if n2_states >= k else n2_states
    for b in range(n1_states):
        if not in_range[b]:
            continue
        base = b * n2_states
        if l2scale == 0.0:
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
        for j in range(nb):
            if bi[j] < 0:
                continue
            x2 = l2scale * ppnd16(bu[j]) if l2scale != 0.0 else 0.0
            cand_xi[b, j] = sqrt_a * xi1[b] + sqrt_1ma * x2
            cand_x2[b, j] = x2
            cand_s2[b, j] = bi[j]


def bin_scan(oracle: EnergyOracle, delta: float, eps: float,
             k: int = 5) -> BinScanResult:
    """Per-bin counts and maxima, plus the merged per-bin top-k records."""
    if not 0.0 < eps < 0.5:
        raise ValueError(f"eps={eps}: need 0 < eps < 1/2")
    if delta <= 0.0:
        raise ValueError(f"delta={delta}: need delta > 0")
    d = oracle.derived
    a = oracle.params.a
    xi1 = oracle.level1_values()
    center = math.sqrt(a * d.N) * d.beta_star
    inv_width = d.N ** (0.5 + delta)
    j_limit = int(d.N ** (0.5 + delta + eps))
    j_of = np.floor((xi1 - center) * inv_width).astype(np.int64)
    in_range = np.abs(j_of) <= j_limit

    cand_xi = np.full((xi1.size, k), -np.inf)
    cand_x2 = np.zeros((xi1.size, k))
    cand_s2 = np.full((xi1.size, k), -1, dtype=np.int64)
    _block_candidates(oracle.level2_key, 1 << d.N2, k, math.sqrt(a),
                      math.sqrt(1.0 - a), xi1, oracle.level2_scale,
                      in_range, cand_xi, cand_x2, cand_s2)

    bins = []
    for j in range(-j_limit, j_limit + 1):
        sel = in_range & (j_of == j)
        n = int(sel.sum())
        mx = float(cand_xi[sel, 0].max()) if n else None
        bins.append(BinStats(j=j, count=n, bin_max=mx, delta=delta, eps=eps))

    blocks = np.nonzero(in_range)[0]
    flat_xi = cand_xi[blocks].ravel()
    flat_x2 = cand_x2[blocks].ravel()
    flat_s2 = cand_s2[blocks].ravel()
    flat_b = np.repeat(blocks, k)
    keep = flat_s2 >= 0
    flat_xi, flat_x2, flat_s2, flat_b = (flat_xi[keep], flat_x2[keep],
                                         flat_s2[keep], flat_b[keep])
    gidx = (flat_b << d.N2) | flat_s2
    order = np.lexsort((gidx, -flat_xi))[:k]
    records = []
    for rank, o in enumerate(order, start=1):
        b = int(flat_b[o])
        records.append(ExtremeRecord(
            rank=rank,
            sigma1=b,
            sigma2=int(flat_s2[o]),
            xi_total=float(flat_xi[o]),
            xi1=float(xi1[b]),
            xi2=float(flat_x2[o]),
            u_inv=float(u_unscale(d, flat_xi[o])),
            w=float(xi1[b] - center),
        ))
    return BinScanResult(bins=bins, top_records=records, j_limit=j_limit,
                         delta=delta, eps=eps)


def expected_count(oracle: EnergyOracle, stats: BinStats) -> float:
    """2^N1 times the standard-normal mass of the bin's interval."""
    from scipy.stats import norm

    d = oracle.derived
    center = math.sqrt(oracle.params.a * d.N) * d.beta_star
    width = d.N ** -(0.5 + stats.delta)
    lo = center + stats.j * width
    return (1 << d.N1) * (norm.cdf(lo + width) - norm.cdf(lo))
