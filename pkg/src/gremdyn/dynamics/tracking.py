"""Tracked deep first-block classes and their threshold split.

The dynamics is observed through the projection of sigma onto the rank of
its first block among the deep classes; everything untracked is lumped into
"other".  A class's label is the global rank of its best configuration, its
matched partner the second-block state achieving that rank, and its
fluctuation w decides threshold membership: the first M classes with w > L
form I_M, the first M with w < L form J_M.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..env.extremes import ExtremeRecord, level_log_sums, top_k
from ..env.oracle import EnergyOracle


@dataclass(frozen=True)
class TrackedClass:
    slot: int          # position in the tracked list (0-based)
    label: int         # global rank of the class's best configuration
    sigma1: int
    matched_sigma2: int
    w: float
    record: ExtremeRecord


@dataclass(frozen=True)
class TrackedSet:
    classes: tuple[TrackedClass, ...]
    L: float
    I_M: tuple[int, ...]  # slots with w > L, first M in label order
    J_M: tuple[int, ...]  # slots with w < L, first M in label order

    def __len__(self):
        return len(self.classes)

    @property
    def sigma1(self) -> np.ndarray:
        return np.array([c.sigma1 for c in self.classes], dtype=np.int64)

    @property
    def matched_sigma2(self) -> np.ndarray:
        return np.array([c.matched_sigma2 for c in self.classes], dtype=np.int64)

    @property
    def w(self) -> np.ndarray:
        return np.array([c.w for c in self.classes])

    def class_map(self, n1_states: int) -> np.ndarray:
        """sigma1 -> slot, untracked -> -1."""
        out = np.full(n1_states, -1, dtype=np.int64)
        for c in self.classes:
            out[c.sigma1] = c.slot
        return out

    def level_log_sums(self, oracle: EnergyOracle) -> np.ndarray:
        """Per-class log weight sums (the finite-volume occupation targets)."""
        return level_log_sums(oracle, [c.record for c in self.classes])


def distinct_classes(records: list[ExtremeRecord]) -> list[ExtremeRecord]:
    """First record of each sigma1, in global rank order."""
    seen = set()
    out = []
    for r in records:
        if r.sigma1 not in seen:
            seen.add(r.sigma1)
            out.append(r)
    return out


def build_tracked(oracle: EnergyOracle, n_classes: int, L: float,
                  M: int | None = None) -> TrackedSet:
    """Track the n_classes deepest first-block classes and split them at L.

    M defaults to as many threshold members as available on each side; the
    split never reaches outside the tracked list.
    """
    d = oracle.derived
    if n_classes > (1 << d.N1):
        raise ValueError(f"only {1 << d.N1} first-block classes exist")
    k = min(4 * n_classes + 8, 1 << d.N)
    reps = distinct_classes(top_k(oracle, k))
    while len(reps) < n_classes and k < (1 << d.N):
        k = min(4 * k, 1 << d.N)
        reps = distinct_classes(top_k(oracle, k))
    reps = reps[:n_classes]
    classes = tuple(
        TrackedClass(slot=i, label=r.rank, sigma1=r.sigma1,
                     matched_sigma2=r.sigma2, w=r.w, record=r)
        for i, r in enumerate(reps)
    )
    above = [c.slot for c in classes if c.w > L]
    below = [c.slot for c in classes if c.w < L]
    if M is not None:
        above, below = above[:M], below[:M]
    return TrackedSet(classes=classes, L=L, I_M=tuple(above), J_M=tuple(below))
