"""Exact laws of single-player scores by iterated convolution."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from rrtourney.model import OutcomePmf, TournamentModel


@dataclass(frozen=True)
class ScorePmf:
    """Law of an integer score on offset, offset+1, ..."""

    offset: int
    probs: tuple

    @property
    def exact(self) -> bool:
        return all(isinstance(p, Fraction) for p in self.probs)

    @property
    def support(self) -> range:
        return range(self.offset, self.offset + len(self.probs))

    def pmf(self, k: int):
        idx = k - self.offset
        if 0 <= idx < len(self.probs):
            return self.probs[idx]
        return self.probs[0] * 0

    def cdf(self, k) -> Fraction | float:
        """P(score <= k)."""
        zero = self.probs[0] * 0
        top = int(np.floor(k)) - self.offset
        if top < 0:
            return zero
        if top >= len(self.probs) - 1:
            return zero + 1
        return _sum(self.probs[: top + 1])

    def sf(self, k) -> Fraction | float:
        """P(score > k), summed from the upper tail for accuracy."""
        zero = self.probs[0] * 0
        top = int(np.floor(k)) - self.offset
        if top < 0:
            return zero + 1
        return _sum(self.probs[top + 1:]) if top + 1 < len(self.probs) else zero

    def cdf_array(self) -> tuple:
        out, acc = [], self.probs[0] * 0
        for p in self.probs:
            acc = acc + p
            out.append(acc)
        return tuple(out)

    @property
    def mean(self):
        return sum((self.offset + u) * p for u, p in enumerate(self.probs))

    @property
    def variance(self):
        mu = self.mean
        return sum((self.offset + u - mu) ** 2 * p for u, p in enumerate(self.probs))


def _sum(values):
    if values and isinstance(values[0], Fraction):
        return sum(values, Fraction(0))
    import math
    return math.fsum(values)


def convolve(a: tuple, b: tuple) -> tuple:
    """Law of the sum of two independent lattice variables starting at 0."""
    if all(isinstance(x, Fraction) for x in a) and all(isinstance(x, Fraction) for x in b):
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for u, pa in enumerate(a):
            if pa:
                for v, pb in enumerate(b):
                    out[u + v] += pa * pb
        return tuple(out)
    return tuple(np.convolve(np.asarray(a, dtype=float), np.asarray(b, dtype=float)).tolist())


def convolve_power(a: tuple, times: int) -> tuple:
    """``a`` convolved with itself ``times`` times (times >= 0) by squaring."""
    result: tuple = (a[0] * 0 + 1,)
    base = a
    while times:
        if times & 1:
            result = convolve(result, base)
        times >>= 1
        if times:
            base = convolve(base, base)
    return result


def sum_law(pmfs: list[OutcomePmf], exact: bool | None = None) -> ScorePmf:
    """Law of a sum of independent pairing outcomes."""
    if exact is None:
        exact = all(p.exact for p in pmfs)
    counts = Counter(pmfs)
    law: tuple = (Fraction(1),) if exact else (1.0,)
    # deterministic order: by first appearance
    seen = []
    for p in pmfs:
        if p not in seen:
            seen.append(p)
    for p in seen:
        probs = p.probs if exact else tuple(float(x) for x in p.probs)
        law = convolve(law, convolve_power(probs, counts[p]))
    return ScorePmf(0, law)


def marginal_score_pmf(model: TournamentModel, player: int,
                       exact: bool | None = None) -> ScorePmf:
    """Exact law of s_i, the total points of ``player``."""
    if not 0 <= player < model.n:
        raise IndexError(f"player {player} outside 0..{model.n - 1}")
    pmfs = [model.pmf(player, j) for j in range(model.n) if j != player]
    return sum_law(pmfs, exact)
