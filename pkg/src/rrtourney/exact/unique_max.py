"""Probability that a uniformly random tournament has a unique top scorer."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from rrtourney.model import pair_arrays

EXACT_RANGE = range(3, 9)
LOW_BITS = 20
MC_BLOCK = 1 << 15


@dataclass(frozen=True)
class UniqueMaxReport:
    n: int
    favorable: int
    total: int

    @property
    def r_n(self) -> Fraction:
        return Fraction(self.favorable, self.total)

    @property
    def value(self) -> float:
        return self.favorable / self.total

    def line(self) -> str:
        return f"{self.favorable} / {self.total} = {self.value:.10f}"


def _bit_scores(n: int, bits: range) -> np.ndarray:
    """Scores (n x 2^len(bits)) contributed by the given pair bits.

    Bit t set means the lower-numbered player of pair t wins it.
    """
    i_of, j_of = pair_arrays(n)
    width = len(bits)
    masks = np.arange(1 << width, dtype=np.uint32)
    out = np.zeros((n, 1 << width), dtype=np.uint8)
    for pos, t in enumerate(bits):
        won = ((masks >> pos) & 1).astype(np.uint8)
        out[i_of[t]] += won
        out[j_of[t]] += 1 - won
    return out


def _count_range(n: int, lo: int, hi: int) -> int:
    """Unique-maximum tournaments whose high-bit value lies in [lo, hi)."""
    n_pairs = n * (n - 1) // 2
    low = min(LOW_BITS, n_pairs)
    low_scores = _bit_scores(n, range(low))
    high_scores = _bit_scores(n, range(low, n_pairs)) if n_pairs > low else np.zeros((n, 1), np.uint8)
    count = 0
    for h in range(lo, hi):
        scores = low_scores + high_scores[:, h:h + 1]
        top = scores.max(axis=0)
        ties = (scores == top).sum(axis=0)
        count += int(np.count_nonzero(ties == 1))
    return count


def unique_max(n: int, workers: int | None = 1) -> UniqueMaxReport:
    """Exact count over all 2^C(n,2) tournaments on n labelled players.

    The high outcome bits are split into contiguous ranges, one per task;
    per-range counts are added, so the result does not depend on ``workers``.
    """
    if n not in EXACT_RANGE:
        raise ValueError(f"exact enumeration supports 3 <= n <= 8, got n={n}; "
                         "use unique_max_mc for larger n")
    n_pairs = n * (n - 1) // 2
    n_high = 1 << max(0, n_pairs - LOW_BITS)
    workers = (os.cpu_count() or 1) if workers is None else max(1, int(workers))
    tasks = max(1, min(workers, n_high))
    edges = [n_high * w // tasks for w in range(tasks + 1)]
    if tasks == 1:
        favorable = _count_range(n, 0, n_high)
    else:
        with ProcessPoolExecutor(max_workers=tasks) as pool:
            favorable = sum(pool.map(_count_range, [n] * tasks, edges[:-1], edges[1:]))
    return UniqueMaxReport(n, favorable, 1 << n_pairs)


@dataclass(frozen=True)
class UniqueMaxEstimate:
    n: int
    trials: int
    hits: int
    seed: int

    @property
    def estimate(self) -> float:
        return self.hits / self.trials

    @property
    def stderr(self) -> float:
        p = self.estimate
        return math.sqrt(p * (1 - p) / self.trials)


def _mc_block(n: int, seed: int, block: int, size: int) -> int:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(n, block))))
    i_of, j_of = pair_arrays(n)
    won = rng.integers(0, 2, size=(size, len(i_of)), dtype=np.int8)
    scores = np.zeros((size, n), dtype=np.int32)
    for t in range(len(i_of)):
        scores[:, i_of[t]] += won[:, t]
        scores[:, j_of[t]] += 1 - won[:, t]
    top = scores.max(axis=1, keepdims=True)
    return int(np.count_nonzero((scores == top).sum(axis=1) == 1))


def unique_max_mc(n: int, trials: int, seed: int = 0) -> UniqueMaxEstimate:
    """Monte Carlo estimate of r_n; trials are drawn in fixed seeded blocks."""
    if n < 3:
        raise ValueError("need n >= 3")
    if trials < 1:
        raise ValueError("need at least one trial")
    hits = 0
    for block, start in enumerate(range(0, trials, MC_BLOCK)):
        hits += _mc_block(n, seed, block, min(MC_BLOCK, trials - start))
    return UniqueMaxEstimate(n, trials, hits, seed)
