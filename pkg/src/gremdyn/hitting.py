"""First-passage generating function for a vertex of the hypercube.

For simple random walk on the n-cube killed at per-step probability q, the
survival-weighted hitting functional E[(1-q)^theta] of a fixed target from a
uniform start has the closed form

    (1 / B_0(lambda)) 2^-n sum_i C(n,i) B_i(lambda),
    B_i(lambda) = int_0^1 (1-u)^i (1+u)^(n-i) u^(lambda-1) du,
    lambda = (n/2) q / (1-q).

Averaging the binomial factor under the integral collapses the double sum to
1 / (lambda B_0(lambda)) with lambda B_0(lambda) = 1 + lambda sum_{i>=1}
C(n,i)/(i+lambda); both forms are computed here (the first as stated for
n <= 60, the collapsed one beyond, where the explicit beta terms overflow
even in log space bookkeeping cost) and they agree to roundoff.  All gamma
ratios go through log-gamma.

The walk's period-2 parity plays no role in the generating function and is
ignored throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .env.params import DerivedParams

# beyond this the explicit double sum is pointless; the collapsed form is
# exact and stable at any n
_DOUBLE_SUM_MAX_N = 60


@dataclass(frozen=True)
class KempermanInput:
    n: int
    q: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 < self.q < 1.0:
            raise ValueError("q must lie in (0, 1)")

    @property
    def lam(self) -> float:
        return 0.5 * self.n * self.q / (1.0 - self.q)


def _log_binom(n, k):
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


def _log_b_terms(n: int, i: np.ndarray, lam: float) -> np.ndarray:
    """log B_i(lambda) for each i, via the beta-function expansion."""
    out = np.empty(i.size)
    for idx, ii in enumerate(i):
        j = np.arange(n - ii + 1)
        terms = (_log_binom(n - ii, j) + gammaln(ii + 1.0) + gammaln(lam + j)
                 - gammaln(lam + ii + j + 1.0))
        out[idx] = logsumexp(terms)
    return out


def log_denominator_exact(n: int, lam: float) -> float:
    """log(lambda B_0(lambda)) = log(1 + lambda sum_i C(n,i)/(i+lambda))."""
    i = np.arange(1, n + 1)
    body = logsumexp(_log_binom(n, i) - np.log(i + lam)) + math.log(lam)
    return float(np.logaddexp(0.0, body))


def kemperman_gf(inp: KempermanInput) -> float:
    """E[(1-q)^theta] from a uniform start, theta the hitting time of a vertex."""
    n, lam = inp.n, inp.lam
    if n > _DOUBLE_SUM_MAX_N:
        return math.exp(-log_denominator_exact(n, lam))
    i = np.arange(n + 1)
    log_b = _log_b_terms(n, i, lam)
    log_num = logsumexp(_log_binom(n, i) + log_b) - n * math.log(2.0)
    return float(math.exp(log_num - log_b[0]))


def brute_force_gf(n: int, q: float) -> float:
    """Distance-chain oracle for the same functional (n <= 12).

    h(d) = (1-q) [ (d/n) h(d-1) + ((n-d)/n) h(d+1) ], h(0) = 1, solved as a
    tridiagonal system; the uniform start averages h against Binomial(n, 1/2).
    """
    if n > 12:
        raise ValueError("brute force limited to n <= 12")
    inp = KempermanInput(n=n, q=q)  # validates q
    a = np.zeros((n, n))
    b = np.zeros(n)
    for d in range(1, n + 1):
        row = d - 1
        a[row, row] = 1.0
        if d - 1 >= 1:
            a[row, d - 2] -= (1.0 - q) * d / n
        else:
            b[row] += (1.0 - q) * d / n  # h(0) = 1
        if d + 1 <= n:
            a[row, d] -= (1.0 - q) * (n - d) / n
    h = np.linalg.solve(a, b)
    h = np.concatenate([[1.0], h])
    weights = np.exp(_log_binom(n, np.arange(n + 1)) - n * math.log(2.0))
    return float(weights @ h)


@dataclass(frozen=True)
class DenominatorReport:
    exact: float
    approx: float
    rel_gap: float


def denominator_asymptotic(n: int, lam: float) -> DenominatorReport:
    """lambda B_0(lambda) exactly and its 1 + lambda 2^(n+1)/n approximation."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if lam == 0.0:
        return DenominatorReport(exact=1.0, approx=1.0, rel_gap=0.0)
    exact = math.exp(log_denominator_exact(n, lam))
    approx = 1.0 + lam * 2.0 ** (n + 1) / n
    return DenominatorReport(exact=exact, approx=approx,
                             rel_gap=abs(approx - exact) / exact)


def no_hit(d: DerivedParams, xi1: float) -> float:
    """Probability a first-block sojourn ends before the matched partner is hit.

    The sojourn length is geometric with success probability q = 1/mu(sigma1),
    so lambda = (N2/2) q/(1-q) = (N1/2) exp(-beta sqrt(aN) xi1) and the
    no-hit probability is 1 - E[(1-q)^theta].  Evaluated through the collapsed
    denominator form, which equals the full Kemperman evaluation exactly and
    stays finite for any lambda.
    """
    expo = -d.beta * math.sqrt(d.a * d.N) * xi1
    if expo > 700.0:  # instant departure: the partner is never found
        return 1.0
    lam = 0.5 * d.N1 * math.exp(expo)
    if lam == 0.0:  # unbounded sojourn: the partner is always found
        return 0.0
    return -math.expm1(-log_denominator_exact(d.N2, lam))
