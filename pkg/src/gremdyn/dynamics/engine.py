"""Event-driven jump dynamics with occupation, visit, and renewal accounting.

Two engines produce the same law by different routes and are cross-validated
against each other:

* the *naive* engine simulates every jump: exponential holding from the
  exact exit rate, then a level choice, then a uniform coordinate flip;
* the *aggregated* engine walks first-block sojourns: the number of jumps
  spent at a first-block state is geometric and independent of everything
  else, so it is drawn up front and only the second-block path is stepped.

Both read the landscape from precomputed tables (the table build is the
only place energies are evaluated, so engines and extreme scans see
bit-identical values) and draw from a counter-based stream, making every
trajectory replayable from (landscape seed, trajectory seed).

Accounting: occupation time per tracked class plus "other"; completed visit
durations per class with the matched-partner split (time at the exact
matched configuration vs the rest); and, when a reference class is set,
per-excursion time and arrival counts between returns of the first-block
walk to the reference, with the reference sojourn opening each excursion.
Interrupted visits and excursions are dropped from the lists but their time
still counts toward occupation.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.special import expit

from ..env.oracle import EnergyOracle
from ..env.rng import U64, mix64, stream_key, u01, STREAM_TRAJECTORY
from .timescales import TimeScales, scale_log, timescales
from .tracking import TrackedSet

# full level-2 table is 2^N doubles; cap keeps it under ~70 MB
_MAX_TABLE_N = 23

STOP_BUDGET = 0
STOP_HORIZON = 1
STOP_VISITS = 2
STOP_EXCURSIONS = 3


def build_tables(oracle: EnergyOracle):
    """(xi2t, p1f, log_pref, b2): everything the kernels need."""
    d = oracle.derived
    if d.N > _MAX_TABLE_N:
        raise ValueError(f"dynamics tables limited to N <= {_MAX_TABLE_N}")
    xi1 = oracle.level1_values()
    xi2t = np.empty(1 << d.N)
    for s1 in range(1 << d.N1):
        xi2t[s1 << d.N2:(s1 + 1) << d.N2] = oracle.level2_block(s1)
    b1 = d.beta * math.sqrt(d.a * d.N)
    b2 = d.beta * math.sqrt((1.0 - d.a) * d.N)
    # flip probability 1/mu and holding prefactor, both via stable logs
    lr1 = math.log(d.N1) - b1 * xi1
    p1f = expit(lr1 - math.log(d.N2))
    log_pref = math.log(d.N) - np.logaddexp(lr1, math.log(d.N2))
    return xi2t, p1f, log_pref, b2


@njit(cache=True)
def _run_naive(xi2t, p1f, log_pref, b2, N1, N2, class_of, matched_s2, ref_slot,
               horizon, budget, key,
               occ, psi_buf, ups_buf, vcount,
               exc_time, exc_vis,
               stop_slot, stop_visits, stop_excursions):
    nclass = occ.shape[0] - 1
    vcap = psi_buf.shape[1]
    ecap = exc_time.shape[0]
    ctr = U64(0)
    s1 = np.int64(u01(mix64(key + ctr)) * (1 << N1)); ctr += U64(1)
    s2 = np.int64(u01(mix64(key + ctr)) * (1 << N2)); ctr += U64(1)
    cur = class_of[s1]
    vis_psi = 0.0
    vis_ups = 0.0
    in_ren = False
    n_exc = 0
    if ref_slot >= 0 and cur == ref_slot:
        in_ren = True
        exc_vis[0, ref_slot] += 1
    t = 0.0
    events = np.int64(0)
    hold_sum = 0.0
    hold_n = np.int64(0)
    reason = STOP_BUDGET
    while events < budget:
        m = math.exp(log_pref[s1] + b2 * xi2t[(s1 << N2) | s2])
        dt = -math.log(u01(mix64(key + ctr))) * m; ctr += U64(1)
        clipped = False
        if t + dt >= horizon:
            dt = horizon - t
            clipped = True
        t += dt
        occ[cur if cur >= 0 else nclass] += dt
        if cur >= 0:
            vis_psi += dt
            if s2 == matched_s2[cur]:
                vis_ups += dt
            if in_ren and n_exc < ecap:
                exc_time[n_exc, cur] += dt
        if clipped:
            reason = STOP_HORIZON
            break
        hold_sum += dt
        hold_n += 1
        u_lvl = u01(mix64(key + ctr)); ctr += U64(1)
        if u_lvl < p1f[s1]:
            k = np.int64(u01(mix64(key + ctr)) * N1); ctr += U64(1)
            new_s1 = s1 ^ (np.int64(1) << k)
            newc = class_of[new_s1]
            if cur >= 0:
                if vcount[cur] < vcap:
                    psi_buf[cur, vcount[cur]] = vis_psi
                    ups_buf[cur, vcount[cur]] = vis_ups
                vcount[cur] += 1
                if cur == stop_slot and vcount[cur] >= stop_visits:
                    events += 1
                    reason = STOP_VISITS
                    break
            vis_psi = 0.0
            vis_ups = 0.0
            if ref_slot >= 0 and newc == ref_slot:
                if in_ren:
                    n_exc += 1
                    if 0 < stop_excursions <= n_exc:
                        s1 = new_s1
                        cur = newc
                        events += 1
                        reason = STOP_EXCURSIONS
                        break
                in_ren = True
            if in_ren and newc >= 0 and n_exc < ecap:
                exc_vis[n_exc, newc] += 1
            s1 = new_s1
            cur = newc
        else:
            k = np.int64(u01(mix64(key + ctr)) * N2); ctr += U64(1)
            s2 ^= np.int64(1) << k
        events += 1
    return t, events, n_exc, hold_sum, hold_n, reason


@njit(cache=True)
def _run_aggregated(xi2t, p1f, log_pref, b2, N1, N2, class_of, matched_s2,
                    ref_slot, horizon, budget, key,
                    occ, psi_buf, ups_buf, vcount,
                    exc_time, exc_vis,
                    stop_slot, stop_visits, stop_excursions):
    nclass = occ.shape[0] - 1
    vcap = psi_buf.shape[1]
    ecap = exc_time.shape[0]
    ctr = U64(0)
    s1 = np.int64(u01(mix64(key + ctr)) * (1 << N1)); ctr += U64(1)
    s2 = np.int64(u01(mix64(key + ctr)) * (1 << N2)); ctr += U64(1)
    cur = class_of[s1]
    vis_psi = 0.0
    vis_ups = 0.0
    in_ren = False
    n_exc = 0
    if ref_slot >= 0 and cur == ref_slot:
        in_ren = True
        exc_vis[0, ref_slot] += 1
    t = 0.0
    events = np.int64(0)
    hold_sum = 0.0
    hold_n = np.int64(0)
    reason = STOP_BUDGET
    running = True
    while running and events < budget:
        # sojourn at s1: geometric number of jumps, the last one flips level 1
        p = p1f[s1]
        lg = math.log1p(-p)
        if lg < 0.0:
            ratio = math.log(u01(mix64(key + ctr))) / lg
            g = np.int64(ratio) + 1 if ratio < 9.0e18 else np.int64(9223372036854775000)
        else:
            g = np.int64(1)
        ctr += U64(1)
        pref = log_pref[s1]
        base = s1 << N2
        mst = matched_s2[cur] if cur >= 0 else np.int64(-1)
        j = np.int64(0)
        while j < g:
            m = math.exp(pref + b2 * xi2t[base | s2])
            dt = -math.log(u01(mix64(key + ctr))) * m; ctr += U64(1)
            clipped = False
            if t + dt >= horizon:
                dt = horizon - t
                clipped = True
            t += dt
            occ[cur if cur >= 0 else nclass] += dt
            if cur >= 0:
                vis_psi += dt
                if s2 == mst:
                    vis_ups += dt
                if in_ren and n_exc < ecap:
                    exc_time[n_exc, cur] += dt
            if clipped:
                reason = STOP_HORIZON
                running = False
                break
            hold_sum += dt
            hold_n += 1
            events += 1
            if events >= budget:
                running = False
                break
            j += 1
            if j < g:
                k = np.int64(u01(mix64(key + ctr)) * N2); ctr += U64(1)
                s2 ^= np.int64(1) << k
        if not running:
            break
        # the sojourn's final jump flips a first-block coordinate
        k = np.int64(u01(mix64(key + ctr)) * N1); ctr += U64(1)
        new_s1 = s1 ^ (np.int64(1) << k)
        newc = class_of[new_s1]
        if cur >= 0:
            if vcount[cur] < vcap:
                psi_buf[cur, vcount[cur]] = vis_psi
                ups_buf[cur, vcount[cur]] = vis_ups
            vcount[cur] += 1
            if cur == stop_slot and vcount[cur] >= stop_visits:
                reason = STOP_VISITS
                break
        vis_psi = 0.0
        vis_ups = 0.0
        if ref_slot >= 0 and newc == ref_slot:
            if in_ren:
                n_exc += 1
                if 0 < stop_excursions <= n_exc:
                    reason = STOP_EXCURSIONS
                    break
            in_ren = True
        if in_ren and newc >= 0 and n_exc < ecap:
            exc_vis[n_exc, newc] += 1
        s1 = new_s1
        cur = newc
    return t, events, n_exc, hold_sum, hold_n, reason


_KERNELS = {"naive": _run_naive, "aggregated": _run_aggregated}


@dataclass
class TrajectoryReport:
    """Everything one run measured; times are physical (unrescaled)."""

    n_classes: int
    occupation: np.ndarray          # per tracked slot, last entry = other
    end_time: float
    horizon: float
    scale: str
    scale_log: float
    event_count: int
    reached_horizon: bool
    budget_exhausted: bool
    stop_reason: int
    hold_mean: float
    engine: str
    seed: int
    wall_time: float
    visit_psi: list[np.ndarray] = field(default_factory=list)
    visit_ups: list[np.ndarray] = field(default_factory=list)
    visit_counts: np.ndarray | None = None
    renewal_time: np.ndarray | None = None    # (excursions, classes)
    renewal_visits: np.ndarray | None = None
    renewal_reference: int | None = None

    @property
    def occupation_fractions(self) -> np.ndarray:
        return self.occupation / self.end_time

    @property
    def other_fraction(self) -> float:
        return float(self.occupation[-1] / self.end_time)

    def visit_gamma(self, slot: int) -> np.ndarray:
        """Per-visit time away from the matched configuration."""
        return self.visit_psi[slot] - self.visit_ups[slot]

    @property
    def excursion_totals(self) -> np.ndarray:
        """R_k: per-excursion total tracked time (exact row sums)."""
        if self.renewal_time is None:
            raise ValueError("renewal accounting was not enabled")
        return self.renewal_time.sum(axis=1)


def simulate(oracle: EnergyOracle, tracked: TrackedSet, seed: int,
             horizon: float, scale: str = "raw", engine: str = "aggregated",
             budget: int = 10**9, renewal_reference: int | None = None,
             max_visits: int = 200_000, max_excursions: int = 50_000,
             stop_slot: int | None = None, stop_visits: int = 0,
             stop_excursions: int = 0,
             tables=None) -> TrajectoryReport:
    """Run one trajectory to ``horizon`` (in units of the selected scale).

    ``scale`` is one of raw|c|cbar; the threshold L of the tracked set fixes
    the c scale.  The run also stops when the event budget is exhausted
    (reported, partial results flagged) or when the optional visit/excursion
    targets are met.
    """
    if engine not in _KERNELS:
        raise ValueError(f"unknown engine {engine!r}")
    d = oracle.derived
    ts = timescales(d, tracked.L)
    slog = scale_log(ts, scale)
    with np.errstate(over="ignore"):
        horizon_phys = float(horizon * np.exp(slog))
    if tables is None:
        tables = build_tables(oracle)
    xi2t, p1f, log_pref, b2 = tables
    nclass = len(tracked)
    class_of = tracked.class_map(1 << d.N1)
    matched = tracked.matched_sigma2 if nclass else np.zeros(0, dtype=np.int64)
    occ = np.zeros(nclass + 1)
    vcap = max_visits
    psi_buf = np.zeros((max(nclass, 1), vcap))
    ups_buf = np.zeros((max(nclass, 1), vcap))
    vcount = np.zeros(max(nclass, 1), dtype=np.int64)
    ref = -1 if renewal_reference is None else int(renewal_reference)
    ecap = max_excursions if ref >= 0 else 1
    exc_time = np.zeros((ecap, max(nclass, 1)))
    exc_vis = np.zeros((ecap, max(nclass, 1)), dtype=np.int64)
    key = U64(stream_key(seed, STREAM_TRAJECTORY))
    t0 = time.perf_counter()
    t, events, n_exc, hold_sum, hold_n, reason = _KERNELS[engine](
        xi2t, p1f, log_pref, b2, d.N1, d.N2, class_of, matched, ref,
        horizon_phys, budget, key, occ, psi_buf, ups_buf, vcount,
        exc_time, exc_vis,
        -1 if stop_slot is None else int(stop_slot),
        np.int64(stop_visits), np.int64(stop_excursions))
    wall = time.perf_counter() - t0
    report = TrajectoryReport(
        n_classes=nclass,
        occupation=occ,
        end_time=float(t),
        horizon=horizon_phys,
        scale=scale,
        scale_log=slog,
        event_count=int(events),
        reached_horizon=reason == STOP_HORIZON,
        budget_exhausted=reason == STOP_BUDGET,
        stop_reason=int(reason),
        hold_mean=float(hold_sum / hold_n) if hold_n else math.nan,
        engine=engine,
        seed=seed,
        wall_time=wall,
        visit_counts=vcount[:nclass].copy(),
    )
    for c in range(nclass):
        n_rec = min(int(vcount[c]), vcap)
        report.visit_psi.append(psi_buf[c, :n_rec].copy())
        report.visit_ups.append(ups_buf[c, :n_rec].copy())
    if ref >= 0:
        report.renewal_time = exc_time[:n_exc].copy()
        report.renewal_visits = exc_vis[:n_exc].copy()
        report.renewal_reference = ref
    return report
