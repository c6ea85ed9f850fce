"""Lazy two-level Gaussian landscape.

A configuration sigma packs the first-block state into the high N1 bits and
the second-block state into the low N2 bits, so the flat index of the
level-2 variable attached to sigma is sigma itself.  The total value is

    xi_total = sqrt(a) * xi1(sigma1) + sqrt(1-a) * xi2(sigma1, sigma2)

with xi1, xi2 independent standard normals produced by the counter-based
generator; nothing is ever stored, so the full 2^N table never exists.

``level1_scale``/``level2_scale`` are test hooks: setting one to zero
switches that hierarchy level off (a flat landscape) without touching the
other level's draw.
"""
from __future__ import annotations

import numpy as np

from .params import DerivedParams, ModelParams, derive
from .rng import (
    STREAM_LEVEL1,
    STREAM_LEVEL2,
    U64,
    keyed_normal,
    normal_fill,
    stream_key,
)


class EnergyOracle:
    """Pure deterministic map from configurations to landscape values."""

    def __init__(self, params: ModelParams, level1_scale: float = 1.0,
                 level2_scale: float = 1.0):
        self.params = params
        self.derived: DerivedParams = derive(params)
        self.level1_scale = float(level1_scale)
        self.level2_scale = float(level2_scale)
        self._key1 = U64(stream_key(params.seed, STREAM_LEVEL1))
        self._key2 = U64(stream_key(params.seed, STREAM_LEVEL2))

    # -- single queries -----------------------------------------------------

    def gaussian(self, level: int, index: int) -> float:
        """The standard-normal variate keyed by (seed, level, index)."""
        d = self.derived
        if level == 1:
            if not 0 <= index < (1 << d.N1):
                raise IndexError(f"level-1 index {index} out of range")
            return self.level1_scale * float(keyed_normal(self._key1, index))
        if level == 2:
            if not 0 <= index < (1 << d.N):
                raise IndexError(f"level-2 index {index} out of range")
            return self.level2_scale * float(keyed_normal(self._key2, index))
        raise ValueError(f"level must be 1 or 2, got {level}")

    def energy_parts(self, sigma1: int, sigma2: int) -> tuple[float, float, float]:
        """(xi_total, xi1, xi2) for one configuration."""
        a = self.params.a
        x1 = self.gaussian(1, sigma1)
        x2 = self.gaussian(2, (sigma1 << self.derived.N2) | sigma2)
        return np.sqrt(a) * x1 + np.sqrt(1.0 - a) * x2, x1, x2

    def energy(self, sigma: int) -> float:
        n2 = self.derived.N2
        return self.energy_parts(sigma >> n2, sigma & ((1 << n2) - 1))[0]

    # -- bulk views (still lazy in the sense that callers pick the range) ---

    def level1_values(self) -> np.ndarray:
        """All 2^N1 first-level variates."""
        out = np.empty(1 << self.derived.N1)
        normal_fill(self._key1, 0, out)
        out *= self.level1_scale
        return out

    def level2_block(self, sigma1: int) -> np.ndarray:
        """The 2^N2 second-level variates sharing first-block state sigma1."""
        n2 = self.derived.N2
        out = np.empty(1 << n2)
        normal_fill(self._key2, sigma1 << n2, out)
        out *= self.level2_scale
        return out

    @property
    def level2_key(self) -> np.uint64:
        # consumed by the streaming kernels, which hash on the fly
        return self._key2

    def __repr__(self):
        return f"EnergyOracle({self.params!r})"


def zero_environment(params: ModelParams) -> EnergyOracle:
    """Oracle with every variate forced to zero (degenerate-dynamics hook)."""
    return EnergyOracle(params, level1_scale=0.0, level2_scale=0.0)


def flat_level2(params: ModelParams) -> EnergyOracle:
    """Oracle whose second level is forced to zero (pure level-1 landscape)."""
    return EnergyOracle(params, level2_scale=0.0)
