"""Batch experiment driver.

Every experiment is a pure function of its JSON config (model keys N, p, a,
beta, seed plus experiment-specific keys); outputs land in --out as
delimited/JSON data files, a rendered figure per data family (disable with
--no-figures), and a manifest echoing the config, the derived per-replica
seeds, and summary statistics.  Re-running from a manifest reproduces the
data files byte for byte.

Exit codes: 0 success, 1 validation error, 2 event budget exhausted with
partial results written (flagged in the manifest).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .env import (
    EnergyOracle,
    ModelParams,
    ParameterError,
    bin_scan,
    derive,
    derive_seed,
    params_from_dict,
    top_k,
)
from .dynamics import (
    build_tracked,
    exact_generator,
    occupation_experiment,
    renewal_experiment,
    simulate,
    timescales,
    visit_experiment,
)
from .hitting import KempermanInput, brute_force_gf, kemperman_gf, log_denominator_exact
from .kprocess import KParams, kparams_from_json, simulate_k, truncation_diagnostic
from .pointproc import thm1_suite
from . import figures, report
from .report import GF_HEADER, RECORD_HEADER, write_csv, write_json

_DEFAULT_BUDGET = 10**9
_Q_GRID = (0.01, 0.05, 0.1, 0.3, 0.5, 0.9)


class RunContext:
    def __init__(self, out: Path, fmt: str, render: bool, workers: int,
                 budget: int):
        self.out = out
        self.fmt = fmt
        self.render = render
        self.workers = workers
        self.budget = budget
        self.files: list[str] = []
        self.replica_seeds: list[int] = []
        self.incomplete = False

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.out / name

    def emit(self, stem: str, header, rows, json_payload) -> None:
        if self.fmt == "csv":
            write_csv(self.path(f"{stem}.csv"), header, rows)
        else:
            write_json(self.path(f"{stem}.json"), json_payload)

    def figure(self, name: str):
        if not self.render:
            return None
        return self.path(name)


def _env_seed(cfg, replica: int) -> int:
    return derive_seed(cfg["seed"], replica, "env")


def _dyn_seed(cfg, replica: int, traj: int = 0) -> int:
    return derive_seed(cfg["seed"], (replica << 20) | traj, "dyn")


def _model(cfg, seed=None) -> ModelParams:
    base = dict(cfg)
    if seed is not None:
        base["seed"] = seed
    return params_from_dict(base)


def _require(cfg, keys, experiment):
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ParameterError(f"experiment {experiment!r} needs keys {missing}")


# --------------------------------------------------------------------------
# experiment runners


def run_params(cfg, ctx: RunContext):
    d = derive(_model(cfg))
    out = {
        "N1": d.N1, "N2": d.N2, "beta_star": d.beta_star, "kappa": d.kappa,
        "bar_beta_FT": d.bar_beta_FT, "alpha": d.alpha,
        "low_temp": d.low_temp, "ft_visible": d.ft_visible,
    }
    if "L" in cfg:
        ts = timescales(d, float(cfg["L"]))
        out.update({"L": ts.L, "theta": ts.theta, "beta_FT": ts.beta_FT,
                    "c_N_log": ts.c_N_log, "bar_c_N_log": ts.bar_c_N_log})
    ctx.emit("params", list(out), [list(out.values())], out)
    print(f"beta_star = {d.beta_star:.7f}  bar_beta_FT = {d.bar_beta_FT:.7f}  "
          f"ft_visible = {d.ft_visible}")
    return out


def _topk_one(args):
    cfg, k, replica = args
    oracle = EnergyOracle(_model(cfg, seed=_env_seed(cfg, replica)))
    return top_k(oracle, k)


def _fan_out(ctx, fn, arglist):
    if ctx.workers > 1 and len(arglist) > 1:
        with ProcessPoolExecutor(max_workers=ctx.workers) as pool:
            return list(pool.map(fn, arglist))
    return [fn(a) for a in arglist]


def run_env_topk(cfg, ctx: RunContext):
    _require(cfg, ["k"], "env-topk")
    k = int(cfg["k"])
    replicas = int(cfg.get("replicas", 1))
    ctx.replica_seeds = [_env_seed(cfg, r) for r in range(replicas)]
    all_records = _fan_out(ctx, _topk_one, [(cfg, k, r) for r in range(replicas)])
    for r, records in enumerate(all_records):
        stem = "records" if replicas == 1 else f"records_r{r}"
        ctx.emit(stem, RECORD_HEADER, report.record_rows(records),
                 report.records_to_json(records))
    if fig := ctx.figure("records.png"):
        figures.records_figure([rec for recs in all_records for rec in recs], fig)
    top1 = all_records[0][0]
    return {"replicas": replicas, "k": k, "rank1_xi": top1.xi_total,
            "rank1_u_inv": top1.u_inv, "rank1_w": top1.w}


def run_env_bins(cfg, ctx: RunContext):
    _require(cfg, ["delta", "eps"], "env-bins")
    oracle = EnergyOracle(_model(cfg))
    res = bin_scan(oracle, float(cfg["delta"]), float(cfg["eps"]),
                   k=int(cfg.get("k", 5)))
    rows = [(b.j, b.count, None if b.bin_max is None else repr(b.bin_max),
             b.delta, b.eps) for b in res.bins]
    payload = [{"j": b.j, "count": b.count, "bin_max": b.bin_max,
                "delta": b.delta, "eps": b.eps} for b in res.bins]
    ctx.emit("bins", report.BIN_HEADER, rows, payload)
    ctx.emit("bin_top_records", RECORD_HEADER, report.record_rows(res.top_records),
             report.records_to_json(res.top_records))
    if fig := ctx.figure("bins.png"):
        figures.bins_figure(res, fig)
    occupied = sum(1 for b in res.bins if b.count)
    return {"j_limit": res.j_limit, "bins_occupied": occupied,
            "states_in_range": res.counts_total()}


def run_thm1(cfg, ctx: RunContext):
    _require(cfg, ["replicas"], "thm1")
    replicas = int(cfg["replicas"])
    ctx.replica_seeds = [_env_seed(cfg, r) for r in range(replicas)]
    recs = _fan_out(ctx, _topk_one, [(cfg, 1, r) for r in range(replicas)])
    d = derive(_model(cfg))
    case = "a=p" if cfg["a"] == cfg["p"] else "a<p"
    rep = thm1_suite(recs, d, case=case)
    rows = [(r, recs[r][0].u_inv, recs[r][0].w) for r in range(replicas)]
    ctx.emit("rank1", ("replica", "u_inv", "w"), rows,
             [{"replica": r, "u_inv": u, "w": w} for r, u, w in rows])
    write_json(ctx.path("law_report.json"), rep.to_dict())
    if fig := ctx.figure("law.png"):
        u1 = [rr[0].u_inv for rr in recs]
        w1 = [rr[0].w for rr in recs]
        figures.extremes_law_figure(u1, w1, rep, fig)
    return rep.to_dict()


def run_gibbs_check(cfg, ctx: RunContext):
    oracle = EnergyOracle(_model(cfg))
    sol = exact_generator(oracle)
    rows = [(s, repr(float(sol.stationary[s])), repr(float(sol.gibbs[s])))
            for s in range(sol.n_states)]
    ctx.emit("stationary", ("sigma", "solved", "weight_law"), rows,
             {"solved": sol.stationary, "weight_law": sol.gibbs})
    if fig := ctx.figure("stationary.png"):
        figures.gibbs_figure(sol, fig)
    out = {"n_states": sol.n_states, "max_rel_error": sol.max_rel_error}
    print(f"max relative stationary error = {sol.max_rel_error:.3e}")
    return out


def _tracked_for(cfg, oracle):
    return build_tracked(oracle, n_classes=int(cfg.get("k", 8)),
                         L=float(cfg.get("L", 0.0)),
                         M=int(cfg["M"]) if "M" in cfg else None)


def run_simulate(cfg, ctx: RunContext):
    _require(cfg, ["horizon", "scale", "k"], "simulate")
    oracle = EnergyOracle(_model(cfg))
    tracked = _tracked_for(cfg, oracle)
    rep = simulate(oracle, tracked, seed=_dyn_seed(cfg, 0),
                   horizon=float(cfg["horizon"]), scale=str(cfg["scale"]),
                   engine=str(cfg.get("engine", "aggregated")),
                   budget=ctx.budget)
    ctx.incomplete |= rep.budget_exhausted
    labels = [c.label for c in tracked.classes]
    occ_rows = [(labels[s], repr(float(rep.occupation[s])))
                for s in range(len(tracked))]
    occ_rows.append(("other", repr(float(rep.occupation[-1]))))
    ctx.emit("occupation", ("class_label", "time"), occ_rows, {
        "labels": labels, "occupation": rep.occupation,
        "end_time": rep.end_time})
    report.write_visits_csv(
        ctx.path("visits.csv"),
        [(labels[s], rep.visit_psi[s], rep.visit_ups[s])
         for s in range(len(tracked))])
    write_json(ctx.path("trajectory.json"), {
        "end_time": rep.end_time, "horizon": rep.horizon,
        "events": rep.event_count, "reached_horizon": rep.reached_horizon,
        "budget_exhausted": rep.budget_exhausted, "engine": rep.engine,
        "hold_mean": rep.hold_mean, "scale": rep.scale,
        "scale_log": rep.scale_log,
        "occupation_fractions": rep.occupation_fractions,
        "visit_counts": rep.visit_counts,
    })
    if fig := ctx.figure("occupation.png"):
        from .dynamics import occupation_prediction
        pred_all = occupation_prediction(oracle, tracked, range(len(tracked)))
        figures.occupation_figure(labels, rep.occupation_fractions[:-1],
                                  pred_all * (1 - rep.other_fraction),
                                  rep.other_fraction, fig)
    return {"events": rep.event_count, "end_time": rep.end_time,
            "reached_horizon": rep.reached_horizon,
            "other_fraction": rep.other_fraction}


def run_occupation(cfg, ctx: RunContext):
    _require(cfg, ["horizon", "scale", "k", "L", "M", "replicas"], "occupation")
    replicas = int(cfg["replicas"])
    rows = []
    above_shares = []
    preds = []
    leaks = []
    summaries = []
    for r in range(replicas):
        oracle = EnergyOracle(_model(cfg, seed=_env_seed(cfg, r)))
        ctx.replica_seeds.append(_env_seed(cfg, r))
        tracked = _tracked_for(cfg, oracle)
        if len(tracked.I_M) < int(cfg["M"]):
            raise ParameterError(
                f"replica {r}: only {len(tracked.I_M)} classes above L")
        rep = occupation_experiment(
            oracle, tracked, scale=str(cfg["scale"]),
            horizon=float(cfg["horizon"]),
            replicas=int(cfg.get("trajectories", 2)),
            budget=ctx.budget, seed=_dyn_seed(cfg, r))
        ctx.incomplete |= any(t.budget_exhausted for t in rep.reports)
        above = rep.above_fractions
        share = above / above.sum()
        above_shares.append(share)
        preds.append(rep.predicted)
        leak = 1.0 - above.sum()
        leaks.append(leak)
        for i, slot in enumerate(tracked.I_M):
            rows.append((r, tracked.classes[slot].label,
                         repr(float(tracked.w[slot])),
                         repr(float(above[i])), repr(float(share[i])),
                         repr(float(rep.predicted[i]))))
        summaries.append({"replica": r, "leak": leak,
                          "other": rep.other_fraction})
    ctx.emit("occupation", ("replica", "class_label", "w", "fraction",
                            "share_within_above", "weight_share"),
             rows, summaries)
    mean_share = np.mean(above_shares, axis=0)
    mean_pred = np.mean(preds, axis=0)
    if fig := ctx.figure("occupation.png"):
        figures.occupation_figure(
            [f"slot{i}" for i in range(mean_share.size)], mean_share,
            mean_pred, float(np.mean(leaks)), fig,
            title="share within above-threshold set")
    return {"replicas": replicas,
            "mean_share": mean_share, "mean_weight_share": mean_pred,
            "share_rel_err": np.abs(mean_share - mean_pred) / mean_pred,
            "mean_outside_fraction": float(np.mean(leaks))}


def run_visits(cfg, ctx: RunContext):
    _require(cfg, ["scale", "k", "rank"], "visits")
    oracle = EnergyOracle(_model(cfg))
    tracked = _tracked_for(cfg, oracle)
    slot = int(cfg["rank"]) - 1
    if not 0 <= slot < len(tracked):
        raise ParameterError(f"rank {cfg['rank']} outside the tracked list")
    rep = visit_experiment(
        oracle, tracked, slot=slot, scale=str(cfg["scale"]),
        visits=int(cfg.get("visits", 300)),
        trajectories=int(cfg.get("trajectories", 4)),
        budget=ctx.budget, seed=_dyn_seed(cfg, 0),
        engine=str(cfg.get("engine", "aggregated")))
    ctx.incomplete |= rep.budget_exhausted
    report.write_visits_csv(ctx.path("visits.csv"),
                            [(slot + 1, rep.psi, rep.upsilon)])
    out = {"rank": slot + 1, "n_visits": rep.psi.size, "mean": rep.mean,
           "predicted_mean": rep.predicted_mean,
           "mean_rel_error": rep.mean_rel_error,
           "ks_statistic": rep.exp_fit.statistic,
           "ks_p_value": rep.exp_fit.p_value,
           "ups_zero_fraction": rep.ups_zero_fraction,
           "no_hit_predicted": rep.no_hit_predicted}
    write_json(ctx.path("visits_report.json"), out)
    if fig := ctx.figure("visits.png"):
        figures.visits_figure(rep, fig)
    return out


def run_renewal(cfg, ctx: RunContext):
    _require(cfg, ["k", "L", "M"], "renewal")
    oracle = EnergyOracle(_model(cfg))
    tracked = _tracked_for(cfg, oracle)
    rep = renewal_experiment(oracle, tracked,
                             excursions=int(cfg.get("excursions", 500)),
                             budget=ctx.budget, seed=_dyn_seed(cfg, 0))
    rows = []
    for k_exc in range(rep.report.renewal_time.shape[0]):
        for slot in range(len(tracked)):
            rows.append((k_exc, tracked.classes[slot].label,
                         repr(float(rep.report.renewal_time[k_exc, slot])),
                         int(rep.report.renewal_visits[k_exc, slot])))
    ctx.emit("excursions", ("excursion", "class_label", "time", "visits"),
             rows, {"mean_time": rep.mean_time, "mean_R": rep.mean_R})
    out = {"reference_slot": rep.reference_slot,
           "n_excursions": rep.n_excursions,
           "mean_time": rep.mean_time, "mean_visits": rep.mean_visits,
           "mean_R": rep.mean_R, "time_share": rep.time_share,
           "gamma_share": rep.gamma_share, "expected_F": rep.expected_F}
    write_json(ctx.path("renewal_report.json"), out)
    if fig := ctx.figure("renewal.png"):
        figures.renewal_figure(rep, fig)
    return {"reference_slot": rep.reference_slot,
            "n_excursions": rep.n_excursions,
            "max_share_rel_err": float(np.max(
                np.abs(rep.time_share - rep.gamma_share) / rep.gamma_share))}


def run_kproc(cfg, ctx: RunContext):
    _require(cfg, ["horizon"], "kproc")
    if "gamma" in cfg:
        params = KParams(gamma=np.asarray(cfg["gamma"], dtype=float))
    elif "gamma_file" in cfg:
        params = kparams_from_json(cfg["gamma_file"])
    else:
        raise ParameterError(
            "kproc needs a 'gamma' list or a 'gamma_file' KParams JSON")
    rng = np.random.default_rng(derive_seed(cfg["seed"], 0, "kproc"))
    rep = simulate_k(params, horizon=float(cfg["horizon"]), rng=rng,
                     init=cfg.get("init", "uniform"))
    rows = [(x, repr(float(params.gamma[x])),
             repr(float(rep.occupation_fractions[x])),
             repr(float(params.gamma[x] / params.total)), int(rep.visits[x]))
            for x in range(params.M)]
    ctx.emit("kproc", ("state", "gamma", "occupation", "gamma_share", "visits"),
             rows, {"gamma": params.gamma,
                    "occupation_fractions": rep.occupation_fractions})
    trunc = None
    if "levels" in cfg:
        trunc = truncation_diagnostic(params.gamma, [int(m) for m in cfg["levels"]])
        write_json(ctx.path("truncation.json"), {
            "levels": trunc.levels, "observable": trunc.observable,
            "successive_diffs": trunc.successive_diffs,
            "tail_mass": trunc.tail_mass})
    if fig := ctx.figure("kproc.png"):
        figures.kprocess_figure(rep, params.gamma, trunc, fig)
    return {"M": params.M, "jumps": rep.jumps,
            "max_abs_err": float(np.max(np.abs(
                rep.occupation_fractions - params.gamma / params.total)))}


def run_kemperman(cfg, ctx: RunContext):
    n_max = int(cfg.get("n_max", 12))
    qs = [float(q) for q in cfg.get("q_grid", _Q_GRID)]
    rows = []
    worst = 0.0
    for n in range(1, n_max + 1):
        for q in qs:
            inp = KempermanInput(n=n, q=q)
            formula = kemperman_gf(inp)
            exact = (brute_force_gf(n, q) if n <= 12
                     else math.exp(-log_denominator_exact(n, inp.lam)))
            err = abs(formula - exact) / exact
            worst = max(worst, err)
            rows.append((n, q, inp.lam, repr(exact), repr(formula), repr(err)))
    ctx.emit("kemperman", GF_HEADER, rows,
             [dict(zip(GF_HEADER, r)) for r in rows])
    if fig := ctx.figure("kemperman.png"):
        figures.kemperman_figure(
            [(r[0], r[1], r[2], float(r[3]), float(r[4]), float(r[5]))
             for r in rows], fig)
    return {"n_max": n_max, "grid_points": len(rows), "max_rel_err": worst}


EXPERIMENTS = {
    "params": run_params,
    "env-topk": run_env_topk,
    "env-bins": run_env_bins,
    "thm1": run_thm1,
    "gibbs-check": run_gibbs_check,
    "simulate": run_simulate,
    "occupation": run_occupation,
    "visits": run_visits,
    "renewal": run_renewal,
    "kproc": run_kproc,
    "kemperman": run_kemperman,
}

# experiments that never touch the model keys beyond validation
_MODEL_FREE = {"kproc", "kemperman"}


def load_config(path: str | Path) -> dict:
    with open(path) as fh:
        cfg = json.load(fh)
    if "config" in cfg and isinstance(cfg["config"], dict):
        cfg = cfg["config"]  # accept a manifest for replay
    return cfg


def validate_config(cfg: dict) -> None:
    if "experiment" not in cfg:
        raise ParameterError("config needs an 'experiment' key")
    name = cfg["experiment"]
    if name not in EXPERIMENTS:
        raise ParameterError(
            f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    if name not in _MODEL_FREE:
        params_from_dict(cfg)  # full model validation, rejects a > p etc.
        if "L" in cfg:
            timescales(derive(params_from_dict(cfg)), float(cfg["L"]))
    elif "seed" not in cfg:
        raise ParameterError("config needs a 'seed'")
    if "replicas" in cfg and int(cfg["replicas"]) < 1:
        raise ParameterError("replicas must be positive")


def run(cfg: dict, out: Path, fmt: str = "csv", render: bool = True,
        workers: int = 1, budget: int | None = None) -> tuple[int, dict]:
    """Execute one experiment; returns (exit code, manifest dict)."""
    validate_config(cfg)
    out.mkdir(parents=True, exist_ok=True)
    ctx = RunContext(out=out, fmt=fmt, render=render, workers=workers,
                     budget=int(budget if budget is not None
                                else cfg.get("budget", _DEFAULT_BUDGET)))
    t0 = time.perf_counter()
    summary = EXPERIMENTS[cfg["experiment"]](cfg, ctx)
    wall = time.perf_counter() - t0
    manifest = {
        "config": cfg,
        "version": __version__,
        "experiment": cfg["experiment"],
        "replica_seeds": ctx.replica_seeds,
        "files": ctx.files,
        "wall_time_s": wall,
        "incomplete": ctx.incomplete,
        "summary": summary,
    }
    write_json(out / "manifest.json", manifest)
    return (2 if ctx.incomplete else 0), manifest


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="gremdyn",
        description="two-level landscape and hopping-dynamics experiments")
    ap.add_argument("--config", required=True, help="JSON config (or manifest)")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--budget", type=int, default=None,
                    help="event budget override for dynamics runs")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--no-figures", action="store_true",
                    help="skip figure rendering")
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config)
        code, manifest = run(cfg, Path(args.out), fmt=args.format,
                             render=not args.no_figures, workers=args.workers,
                             budget=args.budget)
    except (ParameterError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if manifest["incomplete"]:
        print("warning: event budget exhausted; partial results written",
              file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
