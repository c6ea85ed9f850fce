"""Counter-based randomness: keyed hashing to uniforms and normals.

Every random quantity in the landscape is a pure function of
``(seed, stream, counter)``.  A splitmix64-style avalanche maps the 64-bit
counter under a per-stream key to a uniform in (0, 1); normals come from the
inverse CDF evaluated with Wichura's PPND16 rational approximation (algorithm
AS 241), accurate to ~1e-15 relative.  Nothing here keeps state, so identical
queries give bit-identical values on any platform, and two consumers (say the
extreme scan and the jump dynamics) are guaranteed to see the same landscape.

All hot paths are numba-compiled; the module-level Python wrappers exist for
tests and small callers.
"""
from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)

# Stream tags keeping the environment levels and the trajectory clock apart.
STREAM_LEVEL1 = 1
STREAM_LEVEL2 = 2
STREAM_TRAJECTORY = 3
STREAM_POINTPROC = 4


@njit(cache=True, inline="always")
def mix64(z):
    """splitmix64 finalizer: a bijective avalanche on 64 bits."""
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def u01(h):
    # top 53 bits, offset by half a quantum: open interval (0, 1)
    return (np.float64(h >> U64(11)) + 0.5) * (2.0**-53)


def stream_key(seed, stream):
    """Per-(seed, stream) hashing key; any 64-bit seed value is accepted."""
    s = U64(int(seed) & 0xFFFFFFFFFFFFFFFF)
    with np.errstate(over="ignore"):
        return U64(mix64(U64(mix64(s + GOLDEN)) + U64(stream)))


@njit(cache=True)
def ppnd16(p):
    """Standard-normal inverse CDF (Wichura AS 241, routine PPND16).

    Three rational approximations: a central branch for |p - 1/2| <= 0.425
    and two tail branches in the variable sqrt(-log(tail mass)).
    """
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                    + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                  + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                    + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                  + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                + 4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    r = p if q < 0.0 else 1.0 - p
    r = np.sqrt(-np.log(r))
    if r <= 5.0:
        r = r - 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
    else:
        r = r - 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0)
    x = num / den
    return -x if q < 0.0 else x


@njit(cache=True, inline="always")
def keyed_u01(key, counter):
    return u01(mix64(key + U64(counter)))


@njit(cache=True, inline="always")
def keyed_normal(key, counter):
    return ppnd16(keyed_u01(key, counter))


@njit(cache=True)
def normal_fill(key, start, out):
    """Fill ``out`` with normals for counters start, start+1, ..."""
    for i in range(out.size):
        out[i] = ppnd16(u01(mix64(key + U64(start + i))))


def normal_array(seed, stream, start, n):
    """Normals for counters [start, start+n) of one stream, as an array."""
    out = np.empty(n, dtype=np.float64)
    normal_fill(U64(stream_key(seed, stream)), start, out)
    return out


def uniform_scalar(seed, stream, counter):
    return float(keyed_u01(U64(stream_key(seed, stream)), counter))


def normal_scalar(seed, stream, counter):
    return float(keyed_normal(U64(stream_key(seed, stream)), counter))


def _fnv1a(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def derive_seed(master: int, index: int, tag: str) -> int:
    """Collision-resistant 64-bit seed for (master, replica index, stream tag).

    Distinct tags (e.g. "env" vs "dyn") give unrelated streams, so a sweep
    over dynamics replicas never perturbs the environment draw.
    """
    h = U64(master & 0xFFFFFFFFFFFFFFFF)
    with np.errstate(over="ignore"):
        h = U64(mix64(h + GOLDEN))
        h = U64(mix64(h + U64(_fnv1a(tag.encode("utf-8")))))
        h = U64(mix64(h + U64(index & 0xFFFFFFFFFFFFFFFF)))
    return int(h)
