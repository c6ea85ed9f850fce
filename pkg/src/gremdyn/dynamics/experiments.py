"""Batch experiments over trajectories: occupation, visit laws, renewals.

Finite-volume predictions come from the landscape itself (per-class weight
sums), not from their infinite-volume limits: the expected physical time of
one visit to class i is (N/N1) 2^{-N2} sum_{s2} exp(beta sqrt(N) xi), which
in rescaled form is (N/N1) e^{log weight sum} on the ergodic scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..env.oracle import EnergyOracle
from ..env.rng import derive_seed
from ..hitting import no_hit
from ..pointproc import FitReport, ks_fit
from .engine import TrajectoryReport, build_tables, simulate
from .timescales import scale_log, timescales
from .tracking import TrackedSet


def occupation_prediction(oracle: EnergyOracle, tracked: TrackedSet,
                          slots) -> np.ndarray:
    """Weight-sum shares of the given slots, normalized within the subset."""
    lls = tracked.level_log_sums(oracle)
    sel = np.asarray(list(slots), dtype=int)
    lw = lls[sel]
    w = np.exp(lw - lw.max())
    return w / w.sum()


def visit_mean_prediction(oracle: EnergyOracle, tracked: TrackedSet,
                          slot: int, scale: str) -> float:
    """Expected duration of one visit to ``slot``, in units of the scale."""
    d = oracle.derived
    ts = timescales(d, tracked.L)
    lls = tracked.level_log_sums(oracle)
    log_mean = (math.log(d.N / d.N1) + float(lls[slot])
                + ts.bar_c_N_log - scale_log(ts, scale))
    return math.exp(log_mean)


@dataclass
class VisitReport:
    slot: int
    scale: str
    psi: np.ndarray            # completed visit durations, rescaled
    upsilon: np.ndarray        # matched-configuration share, rescaled
    predicted_mean: float
    exp_fit: FitReport
    ups_zero_fraction: float
    no_hit_predicted: float
    trajectories: int
    budget_exhausted: bool

    @property
    def mean(self) -> float:
        return float(self.psi.mean())

    @property
    def mean_rel_error(self) -> float:
        return abs(self.mean - self.predicted_mean) / self.predicted_mean


def visit_experiment(oracle: EnergyOracle, tracked: TrackedSet, slot: int,
                     scale: str, visits: int = 300, trajectories: int = 4,
                     budget: int = 10**9, seed: int = 0,
                     engine: str = "aggregated") -> VisitReport:
    """Pool completed visits to one class from independent trajectories.

    Each trajectory runs until it has collected its share of ``visits`` (or
    exhausts its event budget); durations are rescaled by the selected
    scale and fitted against the exponential law with the finite-volume
    predicted mean.
    """
    if visits < 100:
        raise ValueError("need at least 100 visits for a stable law estimate")
    d = oracle.derived
    tables = build_tables(oracle)
    per_traj = -(-visits // trajectories)
    psis = []
    upses = []
    exhausted = False
    for j in range(trajectories):
        rep = simulate(
            oracle, tracked, seed=derive_seed(seed, j, "visit-trajectory"),
            horizon=math.inf, scale="raw", engine=engine, budget=budget,
            stop_slot=slot, stop_visits=per_traj, tables=tables)
        psis.append(rep.visit_psi[slot])
        upses.append(rep.visit_ups[slot])
        exhausted |= rep.budget_exhausted
    ts = timescales(d, tracked.L)
    slog = scale_log(ts, scale)
    psi = np.concatenate(psis) * math.exp(-slog)
    ups = np.concatenate(upses) * math.exp(-slog)
    if psi.size == 0:
        raise RuntimeError("no completed visits within the event budget")
    pred = visit_mean_prediction(oracle, tracked, slot, scale)
    fit = ks_fit(psi, lambda x: -np.expm1(-x / pred),
                 target=f"exponential(mean={pred:.6g})")
    return VisitReport(
        slot=slot, scale=scale, psi=psi, upsilon=ups, predicted_mean=pred,
        exp_fit=fit, ups_zero_fraction=float(np.mean(ups == 0.0)),
        no_hit_predicted=no_hit(d, tracked.classes[slot].record.xi1),
        trajectories=trajectories, budget_exhausted=exhausted)


@dataclass
class RenewalReport:
    reference_slot: int
    n_excursions: int
    slots_above: tuple[int, ...]
    slots_below: tuple[int, ...]
    mean_time: np.ndarray        # per tracked slot, time per excursion
    mean_visits: np.ndarray      # per tracked slot, arrivals per excursion
    mean_R: float
    time_share: np.ndarray       # mean_time / mean_R
    gamma_share: np.ndarray      # weight-sum prediction for time_share
    expected_F: np.ndarray       # closed-form physical E[time at slot per excursion]
    report: TrajectoryReport

    def share_rel_error(self, slot: int) -> float:
        return abs(self.time_share[slot] - self.gamma_share[slot]) / self.gamma_share[slot]


def renewal_experiment(oracle: EnergyOracle, tracked: TrackedSet,
                       excursions: int = 500, budget: int = 10**9,
                       seed: int = 0, engine: str = "aggregated") -> RenewalReport:
    """Excursion statistics between returns to the reference class.

    The reference is the threshold-exceeding class with the smallest
    fluctuation.  Closed-form targets: E[time at slot m per excursion] =
    (N/N1) 2^{-N2} sum exp(beta sqrt N xi), and the share of slot m in the
    total tracked time equals its weight-sum share.
    """
    if len(tracked.I_M) < 1 or len(tracked.J_M) < 1:
        raise ValueError("tracked set must have members on both sides of L")
    d = oracle.derived
    w = tracked.w
    ref = min(tracked.I_M, key=lambda s: w[s])
    rep = simulate(oracle, tracked, seed=seed, horizon=math.inf, scale="raw",
                   engine=engine, budget=budget, renewal_reference=ref,
                   stop_excursions=excursions)
    if rep.renewal_time is None or rep.renewal_time.shape[0] < 2:
        raise RuntimeError("reference class never revisited within the budget")
    times = rep.renewal_time
    visits = rep.renewal_visits
    mean_time = times.mean(axis=0)
    mean_r = float(times.sum(axis=1).mean())
    lls = tracked.level_log_sums(oracle)
    lw = lls - lls.max()
    gamma_share = np.exp(lw) / np.exp(lw).sum()
    ts = timescales(d, tracked.L)
    expected_f = np.exp(math.log(d.N / d.N1) + lls + ts.bar_c_N_log)
    return RenewalReport(
        reference_slot=ref,
        n_excursions=times.shape[0],
        slots_above=tracked.I_M,
        slots_below=tracked.J_M,
        mean_time=mean_time,
        mean_visits=visits.mean(axis=0),
        mean_R=mean_r,
        time_share=mean_time / mean_r,
        gamma_share=gamma_share,
        expected_F=expected_f,
        report=rep)


@dataclass
class OccupationReport:
    horizon: float
    scale: str
    fractions: np.ndarray          # per slot, of total time
    other_fraction: float
    below_fraction: float          # total share of J_M slots
    predicted: np.ndarray          # weight-share prediction within I_M
    slots_above: tuple[int, ...]
    reports: list[TrajectoryReport]

    @property
    def above_fractions(self) -> np.ndarray:
        return self.fractions[list(self.slots_above)]


def occupation_experiment(oracle: EnergyOracle, tracked: TrackedSet,
                          scale: str, horizon: float, replicas: int = 1,
                          budget: int = 10**9, seed: int = 0,
                          engine: str = "aggregated") -> OccupationReport:
    """Occupation fractions over ``replicas`` independent trajectories."""
    tables = build_tables(oracle)
    reports = []
    for j in range(replicas):
        reports.append(simulate(
            oracle, tracked, seed=derive_seed(seed, j, "occupation-trajectory"),
            horizon=horizon, scale=scale, budget=budget, engine=engine,
            tables=tables))
    total = sum(r.end_time for r in reports)
    occ = np.sum([r.occupation for r in reports], axis=0) / total
    below = float(occ[list(tracked.J_M)].sum()) if tracked.J_M else 0.0
    return OccupationReport(
        horizon=horizon, scale=scale,
        fractions=occ[:-1], other_fraction=float(occ[-1]),
        below_fraction=below,
        predicted=occupation_prediction(oracle, tracked, tracked.I_M),
        slots_above=tracked.I_M,
        reports=reports)
