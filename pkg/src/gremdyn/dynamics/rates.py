"""Exact jump rates and a single-step reference implementation.

A configuration sigma packs the first block into the high N1 bits.  From
sigma, each of the N1 first-block neighbors is entered at rate
exp(-beta sqrt(N) xi_total) / N and each of the N2 second-block neighbors at
rate exp(-beta sqrt((1-a) N) xi2) / N; both are departure-only (no
Metropolis factor).  The chance that a given jump flips a first-block
coordinate is 1/mu(sigma1), mu = 1 + (N2/N1) exp(beta sqrt(aN) xi1),
independent of the second block.

This module is the slow, obviously-correct reference; the event-driven
engines reproduce it exactly and are cross-validated against it in tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..env.oracle import EnergyOracle
from ..env.rng import U64, keyed_u01, stream_key
from ..env.rng import STREAM_TRAJECTORY


@dataclass(frozen=True)
class Rates:
    """Per-neighbor rates out of one configuration."""

    r1: float  # each of the N1 first-block neighbors
    r2: float  # each of the N2 second-block neighbors
    log_r1: float
    log_r2: float
    n1: int
    n2: int

    @property
    def total_exit(self) -> float:
        return self.n1 * self.r1 + self.n2 * self.r2

    @property
    def level1_prob(self) -> float:
        from scipy.special import expit

        lr1 = math.log(self.n1) + self.log_r1
        lr2 = math.log(self.n2) + self.log_r2
        return float(expit(lr1 - lr2))

    @property
    def mean_holding(self) -> float:
        lr1 = math.log(self.n1) + self.log_r1
        lr2 = math.log(self.n2) + self.log_r2
        return math.exp(-np.logaddexp(lr1, lr2))


def mu_geometric(oracle: EnergyOracle, sigma1: int) -> float:
    """Mean number of jumps spent at sigma1 before a first-block flip."""
    d = oracle.derived
    b1 = d.beta * math.sqrt(d.a * d.N)
    return 1.0 + (d.N2 / d.N1) * math.exp(b1 * oracle.gaussian(1, sigma1))


def rates(oracle: EnergyOracle, sigma: int) -> Rates:
    """Exact per-neighbor rates at sigma, exponents kept in log space."""
    d = oracle.derived
    n2 = d.N2
    s1, s2 = sigma >> n2, sigma & ((1 << n2) - 1)
    tot, _, x2 = oracle.energy_parts(s1, s2)
    log_r1 = -d.beta * math.sqrt(d.N) * tot - math.log(d.N)
    log_r2 = -d.beta * math.sqrt((1.0 - d.a) * d.N) * x2 - math.log(d.N)
    with np.errstate(over="ignore"):
        return Rates(r1=float(np.exp(log_r1)), r2=float(np.exp(log_r2)),
                     log_r1=log_r1, log_r2=log_r2, n1=d.N1, n2=n2)


@dataclass
class DynState:
    """Configuration plus process clock; the clock never decreases."""

    sigma: int
    t: float = 0.0


class TrajectoryStream:
    """Counter-based uniform stream for one trajectory (replayable)."""

    def __init__(self, seed: int):
        self.key = U64(stream_key(seed, STREAM_TRAJECTORY))
        self.counter = 0

    def uniform(self) -> float:
        u = float(keyed_u01(self.key, self.counter))
        self.counter += 1
        return u


def uniform_state(oracle: EnergyOracle, stream: TrajectoryStream) -> DynState:
    d = oracle.derived
    s1 = int(stream.uniform() * (1 << d.N1))
    s2 = int(stream.uniform() * (1 << d.N2))
    return DynState(sigma=(s1 << d.N2) | s2)


def step(oracle: EnergyOracle, state: DynState,
         stream: TrajectoryStream) -> tuple[DynState, float]:
    """One jump: exponential holding, level choice, uniform coordinate flip."""
    d = oracle.derived
    r = rates(oracle, state.sigma)
    holding = -math.log(stream.uniform()) * r.mean_holding
    sigma = state.sigma
    if stream.uniform() < r.level1_prob:
        coord = int(stream.uniform() * d.N1)
        sigma ^= 1 << (d.N2 + coord)
    else:
        coord = int(stream.uniform() * d.N2)
        sigma ^= 1 << coord
    return DynState(sigma=sigma, t=state.t + holding), holding
