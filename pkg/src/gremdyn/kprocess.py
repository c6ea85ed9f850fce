"""Truncated uniform-reentry process: the scaling limit of the dynamics.

Finitely many states x = 1..M, exponential holdings with state-dependent
means gamma_x, and a jump chain that is uniform over all M states.
Self-jumps are allowed (the simplest uniform transition); they leave
occupation fractions untouched, and each holding period is still exactly
exponential with mean gamma_x, so holding periods are what visit-duration
comparisons use.  The infinite construction enters only through finite
truncations plus a stability diagnostic driven by the discarded tail mass.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import chisquare, ks_2samp

from .dynamics.engine import TrajectoryReport


@dataclass(frozen=True)
class KParams:
    """Finite truncation of the limiting weight sequence."""

    gamma: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        object.__setattr__(self, "gamma", g)
        if g.ndim != 1 or g.size < 1:
            raise ValueError("gamma must be a nonempty vector")
        if not np.all(g > 0):
            raise ValueError("all holding means must be positive")

    @property
    def M(self) -> int:
        return self.gamma.size

    @property
    def total(self) -> float:
        return float(self.gamma.sum())


def kparams_from_json(path: str | Path) -> KParams:
    """Read weights from JSON: either {"gamma": [...]} or a sampler spec
    {"ppp": {"K":, "xmin":, "alpha":, "seed":, "max_states":}} mapping the
    exponential-intensity points x to weights e^{x/alpha}."""
    with open(path) as fh:
        cfg = json.load(fh)
    if "gamma" in cfg:
        return KParams(gamma=np.asarray(cfg["gamma"], dtype=float))
    if "ppp" in cfg:
        spec = cfg["ppp"]
        from .pointproc import sample_ppp

        rng = np.random.default_rng(int(spec.get("seed", 0)))
        sample = sample_ppp(float(spec["K"]), rng,
                            xmin=float(spec.get("xmin", -10.0)))
        gamma = np.exp(sample.points / float(spec["alpha"]))
        cap = int(spec.get("max_states", 64))
        return KParams(gamma=gamma[:cap])
    raise ValueError("config needs a 'gamma' list or a 'ppp' sampler spec")


@dataclass(frozen=True)
class KTrajectoryReport:
    occupation: np.ndarray      # per state, sums to the horizon exactly
    visits: np.ndarray          # completed holding periods per state
    jumps: int
    horizon: float
    states: np.ndarray          # completed-holding state sequence
    holdings: np.ndarray        # completed-holding durations

    @property
    def occupation_fractions(self) -> np.ndarray:
        return self.occupation / self.horizon

    def holdings_for(self, state: int) -> np.ndarray:
        return self.holdings[self.states == state]


def exact_k_stationary(gamma) -> np.ndarray:
    """Stationary law of the uniform-jump chain by a dense linear solve.

    Kept as an independent oracle; the closed form is gamma/sum(gamma).
    """
    g = np.asarray(gamma, dtype=float)
    m = g.size
    if m == 1:
        return np.ones(1)
    Q = np.empty((m, m))
    for x in range(m):
        Q[x, :] = 1.0 / (m * g[x])
        Q[x, x] = -(m - 1.0) / (m * g[x])
    A = np.vstack([Q.T, np.ones(m)])
    b = np.zeros(m + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    return pi


def simulate_k(params: KParams, horizon: float, rng: np.random.Generator,
               init: int | str = "uniform") -> KTrajectoryReport:
    """Run the process to ``horizon``; the clipped final holding keeps the
    occupation identity exact."""
    if params.M < 1:
        raise ValueError("need at least one state")
    g = params.gamma
    m = params.M
    if init == "uniform":
        state = int(rng.integers(0, m))
    else:
        state = int(init)
        if not 0 <= state < m:
            raise ValueError(f"init state {state} out of range")
    occ = np.zeros(m)
    states_out = []
    holds_out = []
    t = 0.0
    jumps = 0
    chunk = 4096
    done = False
    while not done:
        nxt = rng.integers(0, m, size=chunk)
        u = rng.exponential(1.0, size=chunk)
        for i in range(chunk):
            dt = u[i] * g[state]
            if t + dt >= horizon:
                occ[state] += horizon - t
                done = True
                break
            occ[state] += dt
            states_out.append(state)
            holds_out.append(dt)
            t += dt
            state = int(nxt[i])
            jumps += 1
    return KTrajectoryReport(
        occupation=occ,
        visits=np.bincount(np.asarray(states_out, dtype=int), minlength=m),
        jumps=jumps,
        horizon=horizon,
        states=np.asarray(states_out, dtype=int),
        holdings=np.asarray(holds_out, dtype=float),
    )


@dataclass(frozen=True)
class TruncationReport:
    levels: np.ndarray
    observable: np.ndarray
    successive_diffs: np.ndarray
    tail_mass: np.ndarray       # weight mass beyond each level


def truncation_diagnostic(gamma_full, levels,
                          observable=None) -> TruncationReport:
    """Stability of an observable as the truncation level grows.

    ``observable`` maps a truncated weight vector to a number; default is
    the stationary share of the deepest state from the exact solve.
    """
    g = np.asarray(gamma_full, dtype=float)
    levels = np.asarray(list(levels), dtype=int)
    if np.any(np.diff(levels) <= 0):
        raise ValueError("levels must be strictly increasing")
    if levels[-1] > g.size:
        raise ValueError("levels exceed the supplied weight sequence")
    if observable is None:
        observable = lambda gg: float(exact_k_stationary(gg)[0])  # noqa: E731
    vals = np.array([observable(g[:m]) for m in levels])
    tail = np.array([g[m:].sum() for m in levels])
    return TruncationReport(
        levels=levels,
        observable=vals,
        successive_diffs=np.diff(vals),
        tail_mass=tail,
    )


@dataclass(frozen=True)
class LimitComparison:
    occupation_dyn: np.ndarray
    occupation_k: np.ndarray
    occupation_abs_diff: np.ndarray
    duration_ks: np.ndarray      # per state: (statistic, p-value)
    jump_chi2: float
    jump_chi2_p: float

    def max_occupation_diff(self) -> float:
        return float(np.max(self.occupation_abs_diff))


def compare_limit(dyn_report: TrajectoryReport, k_report: KTrajectoryReport,
                  mapping: dict[int, int]) -> LimitComparison:
    """Tabulate a rescaled trajectory against a truncated-limit run.

    ``mapping`` sends tracked slots to limit states; it must cover every
    state of the truncated process.  Dynamics visit durations are rescaled
    by the report's scale factor before the per-state two-sample tests.
    """
    m = k_report.occupation.size
    covered = sorted(mapping.values())
    if covered != list(range(m)):
        raise ValueError("mapping must cover every limit state exactly once")
    occ_dyn = np.empty(m)
    ks_rows = np.full((m, 2), np.nan)
    rescale = math.exp(-dyn_report.scale_log)
    for slot, state in mapping.items():
        occ_dyn[state] = dyn_report.occupation_fractions[slot]
        psi = dyn_report.visit_psi[slot] * rescale
        kh = k_report.holdings_for(state)
        if psi.size and kh.size:
            stat, p = ks_2samp(psi, kh)
            ks_rows[state] = (stat, p)
    occ_k = k_report.occupation_fractions
    entries = k_report.visits
    if entries.sum() > 0:
        chi2, chi2_p = chisquare(entries)
    else:
        chi2, chi2_p = math.nan, math.nan
    return LimitComparison(
        occupation_dyn=occ_dyn,
        occupation_k=occ_k,
        occupation_abs_diff=np.abs(occ_dyn - occ_k),
        duration_ks=ks_rows,
        jump_chi2=float(chi2),
        jump_chi2_p=float(chi2_p),
    )
