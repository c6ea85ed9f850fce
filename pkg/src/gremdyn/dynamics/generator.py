"""Dense small-volume oracle: exact stationary law and mean hitting times.

Assembles the full rate matrix from the same per-neighbor rates the engines
use and solves for the stationary distribution with the
Grassmann-Taksar-Heyman elimination, which uses no subtractions and so keeps
componentwise relative accuracy even though the rates span tens of orders of
magnitude.  Detailed balance makes the answer the exponential-weight law
exp(beta sqrt(N) xi)/Z; the solve is the independent check of that.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..env.oracle import EnergyOracle
from .engine import build_tables

_MAX_STATES = 4096


@njit(cache=True)
def _fill_rates(A, xi2t, log_pref, b2, p1f, N1, N2):
    # off-diagonal generator entries; A[i, j] = rate i -> j
    n = A.shape[0]
    for sigma in range(n):
        s1 = sigma >> N2
        # total exit rate = 1 / holding mean; split by level
        total = math.exp(-(log_pref[s1] + b2 * xi2t[sigma]))
        r1 = total * p1f[s1] / N1
        r2 = total * (1.0 - p1f[s1]) / N2
        for k in range(N1):
            A[sigma, sigma ^ (1 << (N2 + k))] = r1
        for k in range(N2):
            A[sigma, sigma ^ (1 << k)] = r2


@njit(cache=True)
def _gth(A):
    """Stationary law of the Metzler matrix A (off-diagonals only used).

    Grassmann-Taksar-Heyman elimination: state i is folded into the states
    above it, then the solution is rebuilt by backward substitution.  No
    subtractions occur, so componentwise relative accuracy survives rate
    ranges of many orders of magnitude.
    """
    n = A.shape[0]
    x = np.zeros(n)
    for i in range(n - 1):
        scale = 0.0
        for j in range(i + 1, n):
            scale += A[i, j]
        if scale <= 0.0:
            n = i + 1
            break
        for r in range(i + 1, n):
            A[r, i] /= scale
        for r in range(i + 1, n):
            f = A[r, i]
            if f != 0.0:
                for c in range(i + 1, n):
                    A[r, c] += f * A[i, c]
    x[n - 1] = 1.0
    for i in range(n - 2, -1, -1):
        s = 0.0
        for r in range(i + 1, n):
            s += x[r] * A[r, i]
        x[i] = s
    total = 0.0
    for i in range(n):
        total += x[i]
    for i in range(n):
        x[i] /= total
    return x


@dataclass(frozen=True)
class GeneratorSolution:
    stationary: np.ndarray
    gibbs: np.ndarray
    n_states: int

    @property
    def max_rel_error(self) -> float:
        return float(np.max(np.abs(self.stationary - self.gibbs) / self.gibbs))


def gibbs_law(oracle: EnergyOracle) -> np.ndarray:
    """exp(beta sqrt(N) xi_total) / Z over all states, via a stable softmax."""
    d = oracle.derived
    xi2t, _, _, _ = build_tables(oracle)
    xi1 = oracle.level1_values()
    xi = (math.sqrt(oracle.params.a) * np.repeat(xi1, 1 << d.N2)
          + math.sqrt(1.0 - oracle.params.a) * xi2t)
    lw = d.beta * math.sqrt(d.N) * xi
    lw -= lw.max()
    w = np.exp(lw)
    return w / w.sum()


def exact_generator(oracle: EnergyOracle) -> GeneratorSolution:
    """Assemble the full generator and solve for its stationary law."""
    d = oracle.derived
    n = 1 << d.N
    if n > _MAX_STATES:
        raise ValueError(f"2^N = {n} exceeds the dense-solve cap {_MAX_STATES}")
    xi2t, p1f, log_pref, b2 = build_tables(oracle)
    A = np.zeros((n, n))
    _fill_rates(A, xi2t, log_pref, b2, p1f, d.N1, d.N2)
    pi = _gth(A)  # A is consumed by the elimination
    return GeneratorSolution(stationary=pi, gibbs=gibbs_law(oracle), n_states=n)


def mean_hitting_times(oracle: EnergyOracle, target: int) -> np.ndarray:
    """E_sigma[time to reach target] for every start state (dense solve)."""
    d = oracle.derived
    n = 1 << d.N
    if n > _MAX_STATES:
        raise ValueError(f"2^N = {n} exceeds the dense-solve cap {_MAX_STATES}")
    xi2t, p1f, log_pref, b2 = build_tables(oracle)
    A = np.zeros((n, n))
    _fill_rates(A, xi2t, log_pref, b2, p1f, d.N1, d.N2)
    np.fill_diagonal(A, -A.sum(axis=1))
    keep = np.arange(n) != target
    h = np.zeros(n)
    h[keep] = np.linalg.solve(A[np.ix_(keep, keep)], -np.ones(n - 1))
    return h
