import math

import numpy as np
import pytest

from gremdyn.env import ModelParams, derive
from gremdyn.env.extremes import ExtremeRecord
from gremdyn.pointproc import (
    gumbel_fit,
    ks_fit,
    sample_ppp,
    thm1_suite,
    to_gamma,
)


def rng(seed=0):
    return np.random.default_rng(seed)


def test_points_decreasing_above_floor():
    s = sample_ppp(1.0, rng(1), xmin=-3.0)
    assert np.all(np.diff(s.points) < 0)
    assert np.all(s.points > s.xmin)


def test_count_is_poisson_of_tail_mass():
    K, xmin = 1.0, -2.0
    mean = K * math.exp(-xmin)
    counts = np.array([sample_ppp(K, rng(2000 + i), xmin=xmin).points.size
                       for i in range(4000)])
    se = math.sqrt(mean / counts.size)
    assert abs(counts.mean() - mean) < 4 * se
    assert abs(counts.var() / mean - 1.0) < 0.1


def test_void_probability_of_positive_axis():
    # P[max <= 0] = e^{-K}
    g = rng(3)
    hits = sum(sample_ppp(1.0, g, xmin=-3.0).max <= 0.0 for _ in range(10**5))
    freq = hits / 10**5
    se = math.sqrt(math.exp(-1) * (1 - math.exp(-1)) / 10**5)
    assert abs(freq - math.exp(-1.0)) < 4 * se


def test_mean_number_of_positive_points():
    g = rng(4)
    n_pos = [int(np.sum(sample_ppp(1.0, g, xmin=-2.0).points > 0.0))
             for _ in range(20000)]
    assert abs(np.mean(n_pos) - 1.0) < 4 / math.sqrt(len(n_pos))


def test_transformed_gaps_are_exponential():
    # y = e^{-x} maps the process to unit-rate arrivals: gaps are iid Exp(K)
    K = 1.0
    gaps = []
    g = rng(5)
    while len(gaps) < 10**4:
        pts = sample_ppp(K, g, xmin=-4.0).points
        y = np.exp(-pts)  # increasing arrival times
        gaps.extend(np.diff(y))
    gaps = np.array(gaps[:10**4])
    fit = ks_fit(gaps, lambda x: 1.0 - np.exp(-K * x), target="exp")
    assert fit.p_value > 0.01


def test_counts_above_levels_poisson():
    # N((x, inf)) ~ Poisson(K e^{-x}) at several levels
    from scipy.stats import chisquare, poisson

    g = rng(6)
    samples = [sample_ppp(1.0, g, xmin=-2.0).points for _ in range(10**4)]
    for x in (-1.0, 0.0, 1.0):
        mean = math.exp(-x)
        counts = np.array([int(np.sum(p > x)) for p in samples])
        kmax = int(poisson.ppf(0.999, mean)) + 1
        obs = np.bincount(np.minimum(counts, kmax), minlength=kmax + 1)
        probs = poisson.pmf(np.arange(kmax + 1), mean)
        probs[-1] += poisson.sf(kmax, mean)
        stat, p = chisquare(obs, probs * counts.size)
        assert p > 1e-3


def d_for(beta, a=0.2, p=0.5, N=16):
    return derive(ModelParams(N=N, p=p, a=a, beta=beta, seed=0))


def test_to_gamma_mapping():
    d = d_for(beta=2 * math.sqrt(2 * math.log(2)))  # alpha = 1/2
    assert d.alpha == pytest.approx(0.5)
    s = sample_ppp(1.0, rng(7), xmin=-2.0)
    gam = to_gamma(s, d)
    assert gam.size == s.points.size
    assert np.all(np.diff(gam) < 0)
    # bijection on points: recover them
    back = (d.beta_star / d.beta) * np.log(gam)
    assert np.allclose(back, s.points, rtol=1e-12)


def test_to_gamma_warns_at_high_temperature():
    d = d_for(beta=1.0)  # beta < beta_star
    with pytest.warns(UserWarning, match="summable"):
        to_gamma(sample_ppp(1.0, rng(8), xmin=-1.0), d)


def test_gamma_count_above_one():
    # E#{gamma_i > 1} = 1 for K = 1 (points > 0 map to weights > 1)
    d = d_for(beta=2.0)
    g = rng(9)
    counts = [int(np.sum(to_gamma(sample_ppp(1.0, g, xmin=-2.0), d) > 1.0))
              for _ in range(20000)]
    assert abs(np.mean(counts) - 1.0) < 4 / math.sqrt(len(counts))


def test_gamma_tail_counts():
    # #{gamma_i > y} ~ Poisson(y^{-alpha})
    d = d_for(beta=2 * math.sqrt(2 * math.log(2)))
    g = rng(10)
    for y in (2.0, 5.0):
        mean = y ** -d.alpha
        counts = np.array([int(np.sum(to_gamma(sample_ppp(1.0, g, xmin=-2.0), d) > y))
                           for _ in range(10**4)])
        se = math.sqrt(mean / counts.size)
        assert abs(counts.mean() - mean) < 3 * se


def test_gamma_partial_sums_monotone():
    d = d_for(beta=2.0)
    gam = to_gamma(sample_ppp(1.0, rng(11), xmin=-6.0), d)
    tails = np.cumsum(gam[::-1])[::-1]  # tail sums from each M on
    assert np.all(np.diff(tails) < 0)


def test_gumbel_fit_null_calibration():
    # samples drawn from the target law itself: p-values uniform on [0,1]
    g = rng(12)
    pvals = []
    for _ in range(200):
        u = g.uniform(size=400)
        x = -np.log(-np.log(u))
        pvals.append(gumbel_fit(x, K=1.0).p_value)
    fit = ks_fit(np.array(pvals), lambda t: np.clip(t, 0, 1), target="uniform")
    assert fit.p_value > 0.01


def test_gumbel_fit_detects_shift():
    g = rng(13)
    x = -np.log(-np.log(g.uniform(size=10**4))) + 1.0
    fit = gumbel_fit(x, K=1.0)
    # analytic KS distance between the law and its unit shift exceeds 0.3
    t = np.linspace(-3, 8, 20001)
    analytic = np.max(np.abs(np.exp(-np.exp(-t)) - np.exp(-np.exp(-(t - 1.0)))))
    assert analytic >= 0.3
    assert fit.statistic >= 0.3
    assert fit.p_value < 1e-6


def test_gumbel_fit_permutation_invariant():
    g = rng(14)
    x = -np.log(-np.log(g.uniform(size=500)))
    f1 = gumbel_fit(x, K=1.0)
    f2 = gumbel_fit(x[::-1].copy(), K=1.0)
    assert f1 == f2


def test_gumbel_fit_input_validation():
    with pytest.raises(ValueError):
        gumbel_fit(np.ones(10), K=1.0)


def fake_records(u, w):
    return [[ExtremeRecord(rank=1, sigma1=0, sigma2=0, xi_total=0.0, xi1=0.0,
                           xi2=0.0, u_inv=float(ui), w=float(wi))]
            for ui, wi in zip(u, w)]


def test_suite_null_calibration():
    # synthetic draws from the limit law itself: every test passes
    g = rng(15)
    n = 2000
    u = -np.log(-np.log(g.uniform(size=n)))
    w = g.normal(0.0, math.sqrt(0.8), size=n)
    rep = thm1_suite(fake_records(u, w), d_for(beta=1.4), case="a<p")
    assert rep.gumbel.p_value > 0.01
    assert rep.mean_ok() and rep.var_ok() and rep.corr_ok()


def test_suite_boundary_case_sign_structure():
    # w conditioned negative: sign fraction ~1, unconditioned mean test fails
    g = rng(16)
    n = 2000
    u = -np.log(-np.log(g.uniform(size=n))) - math.log(2.0)  # K = 1/2 shift
    w = -np.abs(g.normal(0.0, math.sqrt(0.8), size=n))
    rep = thm1_suite(fake_records(u, w), d_for(beta=1.4, a=0.5, p=0.5), case="a=p")
    assert rep.neg_fraction == 1.0
    assert rep.gumbel.p_value > 0.01
    assert not rep.mean_ok()


def test_suite_validates():
    with pytest.raises(ValueError):
        thm1_suite(fake_records([0.0] * 10, [0.0] * 10), d_for(1.4))
    with pytest.raises(ValueError):
        thm1_suite(fake_records([0.0] * 50, [0.0] * 50), d_for(1.4), case="bogus")
