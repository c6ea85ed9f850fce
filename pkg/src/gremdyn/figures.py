"""Figure rendering for the report path.

Every experiment that emits a delimited file can also render a PNG next to
it.  Figures are diagnostic, not publication-grade: one panel per question,
reference curves drawn from the same predictions the tests use.
"""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def records_figure(records, path: Path) -> Path:
    u = np.array([r.u_inv for r in records])
    w = np.array([r.w for r in records])
    ranks = np.array([r.rank for r in records])
    fig, ax = plt.subplots(figsize=(6, 4.2))
    sc = ax.scatter(u, w, c=ranks, cmap="viridis", s=18)
    fig.colorbar(sc, ax=ax, label="rank")
    ax.set_xlabel("rescaled value")
    ax.set_ylabel("first-level fluctuation w")
    ax.set_title("deep configurations")
    return _save(fig, path)


def bins_figure(result, path: Path) -> Path:
    js = [b.j for b in result.bins]
    counts = [b.count for b in result.bins]
    maxima = [(b.j, b.bin_max) for b in result.bins if b.bin_max is not None]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.5, 5.5), sharex=True)
    ax1.bar(js, counts, width=0.9)
    ax1.set_ylabel("count")
    ax1.set_yscale("log")
    if maxima:
        ax2.plot([m[0] for m in maxima], [m[1] for m in maxima], ".")
    ax2.set_xlabel("bin index j")
    ax2.set_ylabel("bin max")
    fig.suptitle(f"first-level bins (delta={result.delta}, eps={result.eps})")
    return _save(fig, path)


def extremes_law_figure(u1, w1, report, path: Path) -> Path:
    u1 = np.asarray(u1)
    w1 = np.asarray(w1)
    k = 1.0 if report.case == "a<p" else 0.5
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.8))
    xs = np.sort(u1)
    ax1.step(xs, np.arange(1, xs.size + 1) / xs.size, where="post",
             label="empirical")
    grid = np.linspace(xs[0] - 0.5, xs[-1] + 0.5, 300)
    ax1.plot(grid, np.exp(-k * np.exp(-grid)), "--", label="limit law")
    ax1.set_xlabel("rank-1 rescaled value")
    ax1.set_ylabel("CDF")
    ax1.legend(loc="lower right", fontsize=8)
    ax1.set_title(f"KS D={report.gumbel.statistic:.4f} p={report.gumbel.p_value:.3f}")
    ax2.hist(w1, bins=30, density=True, alpha=0.7)
    g = np.linspace(w1.min() - 0.5, w1.max() + 0.5, 200)
    ax2.plot(g, np.exp(-g**2 / (2 * report.w_var)) / math.sqrt(2 * math.pi * report.w_var),
             "--", label="normal, sample var")
    ax2.set_xlabel("rank-1 fluctuation w")
    ax2.legend(fontsize=8)
    ax2.set_title(f"var={report.w_var:.3f} corr={report.corr:+.3f}")
    return _save(fig, path)


def gibbs_figure(solution, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    ax.loglog(solution.gibbs, solution.stationary, ".", ms=3)
    lims = [solution.gibbs.min() * 0.5, solution.gibbs.max() * 2]
    ax.plot(lims, lims, "--", lw=1)
    ax.set_xlabel("exponential-weight law")
    ax.set_ylabel("solved stationary law")
    ax.set_title(f"max rel err = {solution.max_rel_error:.2e}")
    return _save(fig, path)


def occupation_figure(labels, empirical, predicted, other_fraction,
                      path: Path, title="occupation") -> Path:
    x = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(x - 0.2, empirical, width=0.4, label="simulated")
    ax.bar(x + 0.2, predicted, width=0.4, label="weight-sum prediction")
    ax.set_xticks(x, [str(l) for l in labels])
    ax.set_xlabel("class label (rank)")
    ax.set_ylabel("fraction of time")
    ax.set_title(f"{title} (other: {other_fraction:.3f})")
    ax.legend(fontsize=8)
    return _save(fig, path)


def visits_figure(report, path: Path) -> Path:
    psi = np.sort(report.psi)
    surv = 1.0 - np.arange(psi.size) / psi.size
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    ax.semilogy(psi, surv, ".", ms=3, label="visits")
    grid = np.linspace(0, psi[-1], 200)
    ax.semilogy(grid, np.exp(-grid / report.predicted_mean), "--",
                label="exponential, predicted mean")
    ax.set_xlabel("rescaled visit duration")
    ax.set_ylabel("survival")
    ax.set_title(f"mean={report.mean:.3g} pred={report.predicted_mean:.3g} "
                 f"KS p={report.exp_fit.p_value:.3f}")
    ax.legend(fontsize=8)
    return _save(fig, path)


def renewal_figure(report, path: Path) -> Path:
    m = report.mean_time.size
    x = np.arange(m)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(x - 0.2, report.time_share, width=0.4, label="time share")
    ax.bar(x + 0.2, report.gamma_share, width=0.4, label="weight share")
    ax.set_xlabel("tracked slot")
    ax.set_ylabel("share of tracked time per excursion")
    ax.set_title(f"{report.n_excursions} excursions, "
                 f"reference slot {report.reference_slot}")
    ax.legend(fontsize=8)
    return _save(fig, path)


def kprocess_figure(k_report, gamma, trunc, path: Path) -> Path:
    g = np.asarray(gamma)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.8))
    x = np.arange(g.size)
    ax1.bar(x - 0.2, k_report.occupation_fractions, width=0.4, label="simulated")
    ax1.bar(x + 0.2, g / g.sum(), width=0.4, label="gamma / total")
    ax1.set_xlabel("state")
    ax1.set_ylabel("occupation fraction")
    ax1.legend(fontsize=8)
    if trunc is not None:
        ax2.plot(trunc.levels, trunc.observable, "o-", label="observable")
        ax2.plot(trunc.levels, trunc.tail_mass, "s--", label="tail mass")
        ax2.set_xlabel("truncation level")
        ax2.legend(fontsize=8)
    return _save(fig, path)


def kemperman_figure(rows, path: Path) -> Path:
    rows = sorted(rows, key=lambda r: (r[0], r[1]))
    ns = sorted({r[0] for r in rows})
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.8))
    for n in ns:
        qs = [r[1] for r in rows if r[0] == n]
        gf = [r[4] for r in rows if r[0] == n]
        err = [r[5] for r in rows if r[0] == n]
        ax1.plot(qs, gf, "o-", ms=3, label=f"n={n}")
        ax2.semilogy(qs, np.maximum(err, 1e-18), ".-", ms=3)
    ax1.set_xlabel("stopping probability q")
    ax1.set_ylabel("survival-weighted hit functional")
    ax1.legend(fontsize=7)
    ax2.set_xlabel("q")
    ax2.set_ylabel("formula vs oracle rel err")
    return _save(fig, path)
