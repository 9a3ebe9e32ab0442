"""Replacing dependent pair outcomes by independent copies.

For a pair (i, j) with law p on 0..m, the dependent outcome puts u points on
i and m - u on j.  Its decoupled version draws Y_ij ~ p and Y_ji ~ reversed p
independently.  ``decoupling_chain`` decouples pairs one at a time in
lexicographic order and records the lower-orthant probability after each
step; the final value is the product of the marginals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from rrtourney.exact.convolution import marginal_score_pmf
from rrtourney.exact.enumeration import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    Factor,
    JointCdfReport,
    _product,
    _resolve_exact,
    _weak_thresholds,
    enumerate_law,
)
from rrtourney.model import OutcomePmf, TournamentModel, pair_index


def _probs(pmf: OutcomePmf, exact: bool) -> tuple:
    return pmf.probs if exact else tuple(float(p) for p in pmf.probs)


def _fsum(values, exact: bool):
    return sum(values, Fraction(0)) if exact else math.fsum(values)


def p_uv_table(pmf: OutcomePmf, exact: bool | None = None) -> np.ndarray:
    """Difference of the decoupled and dependent joint laws of one pair.

    Entry (u, v) is p_u p_{m-v}, minus p_u on the anti-diagonal u + v = m.
    """
    exact = pmf.exact if exact is None else exact
    p = _probs(pmf, exact)
    m = len(p) - 1
    out = np.empty((m + 1, m + 1), dtype=object if exact else np.float64)
    for u in range(m + 1):
        for v in range(m + 1):
            out[u, v] = p[u] * p[m - v] - (p[u] if u + v == m else 0)
    return out


def prefix_q(pmf: OutcomePmf, exact: bool | None = None) -> tuple:
    """Q_u = p_0 + ... + p_u for u = 0..m."""
    exact = pmf.exact if exact is None else exact
    p = _probs(pmf, exact)
    return tuple(_fsum(p[: u + 1], exact) for u in range(len(p)))


def w_table(pmf: OutcomePmf, k1: int, k2: int, exact: bool | None = None) -> np.ndarray:
    """W(g, h) for 0 <= g <= k1, 0 <= h <= k2, by summing p(u, v) directly."""
    if k1 < 0 or k2 < 0:
        raise ValueError("k1 and k2 must be nonnegative")
    exact = pmf.exact if exact is None else exact
    P = p_uv_table(pmf, exact)
    m = pmf.m
    out = np.empty((k1 + 1, k2 + 1), dtype=object if exact else np.float64)
    for g in range(k1 + 1):
        for h in range(k2 + 1):
            block = P[: min(m, g) + 1, : min(m, h) + 1].ravel().tolist()
            out[g, h] = _fsum(block, exact)
    return out


def w_closed_form(pmf: OutcomePmf, g: int, h: int, exact: bool | None = None):
    """W(g, h) from prefix sums of p, case by case."""
    if g < 0 or h < 0:
        raise ValueError("g and h must be nonnegative")
    exact = pmf.exact if exact is None else exact
    p = _probs(pmf, exact)
    m = len(p) - 1
    if g > m or h > m:
        return Fraction(0) if exact else 0.0
    # Q_j and 1 - Q_j as head/tail sums; Q_{-1} = 0
    head = lambda j: _fsum(p[: j + 1], exact)
    tail = lambda j: _fsum(p[j + 1:], exact)
    if g + h < m:
        return head(g) * tail(m - h - 1)
    return head(m - h - 1) * tail(g)


@dataclass(frozen=True)
class DecouplingTable:
    m: int
    p_table: np.ndarray
    W: np.ndarray
    Q: tuple

    @classmethod
    def build(cls, pmf: OutcomePmf, k1: int, k2: int,
              exact: bool | None = None) -> DecouplingTable:
        return cls(pmf.m, p_uv_table(pmf, exact), w_table(pmf, k1, k2, exact),
                   prefix_q(pmf, exact))


def _int_weights(probs: tuple) -> tuple[list[int], int]:
    den = 1
    for p in probs:
        den = math.lcm(den, Fraction(p).denominator)
    return [int(Fraction(p) * den) for p in probs], den


def _kernel(probs: tuple, decoupled: bool) -> list[tuple[int, int, object]]:
    m = len(probs) - 1
    if decoupled:
        return [(u, v, probs[u] * probs[m - v])
                for u in range(m + 1) for v in range(m + 1) if probs[u] and probs[m - v]]
    return [(u, m - u, probs[u]) for u in range(m + 1) if probs[u]]


def _fold(kernel, tracked_i, tracked_j) -> list[tuple[int | None, int | None, object]]:
    """Marginalise a pair kernel onto the endpoints that are still tracked."""
    merged: dict = {}
    for u, v, w in kernel:
        key = (u if tracked_i else None, v if tracked_j else None)
        merged[key] = merged.get(key, 0) + w
    return [(a, b, w) for (a, b), w in merged.items()]


def hybrid_cdf(model: TournamentModel, weak_k: Sequence[int], decoupled: set[int],
               exact: bool, budget: int = DEFAULT_BUDGET):
    """Lower-orthant probability after decoupling the pairs labelled ``decoupled``.

    Applies one pair kernel at a time to the score array cut at the
    thresholds; mass above a threshold never returns below it.  Players whose
    threshold is at least their maximum score are not tracked at all.
    Rational runs carry integer weights over a common denominator.
    """
    zero = Fraction(0) if exact else 0.0
    if any(int(x) < 0 for x in weak_k):
        return zero
    tracked = [i for i in range(model.n) if int(weak_k[i]) < int(model.max_scores[i])]
    if not tracked:
        return zero + 1
    axis = {p: a for a, p in enumerate(tracked)}
    shape = tuple(int(weak_k[i]) + 1 for i in tracked)
    cells = math.prod(shape)
    work = cells * sum((m + 1) ** 2 if t in decoupled else m + 1
                       for t, m in enumerate(model.pair_m.tolist()))
    if work > budget:
        raise BudgetExceeded(work, budget, "cell updates")
    if exact:
        arr = np.zeros(shape, dtype=object)
        arr[...] = 0
        arr[(0,) * len(shape)] = 1
    else:
        arr = np.zeros(shape, dtype=np.float64)
        arr[(0,) * len(shape)] = 1.0
    denom = 1
    for t, (i, j) in enumerate(model.pairs()):
        if i not in axis and j not in axis:
            continue
        pmf = model.palette[model.pair_slot(t)]
        if exact:
            probs, den = _int_weights(pmf.probs)
            denom *= den * den if t in decoupled else den
        else:
            probs = tuple(float(p) for p in pmf.probs)
        kernel = _fold(_kernel(probs, t in decoupled), i in axis, j in axis)
        new = np.zeros_like(arr)
        if exact:
            new[...] = 0
        for u, v, w in kernel:
            dst = [slice(None)] * arr.ndim
            src = [slice(None)] * arr.ndim
            skip = False
            for player, shift in ((i, u), (j, v)):
                if shift is None:
                    continue
                a = axis[player]
                if shift >= shape[a]:
                    skip = True
                    break
                dst[a], src[a] = slice(shift, None), slice(0, shape[a] - shift)
            if not skip:
                new[tuple(dst)] += w * arr[tuple(src)]
        arr = new
    if exact:
        return Fraction(sum(arr.ravel().tolist()), denom)
    return math.fsum(arr.ravel())


def decoupling_chain(model: TournamentModel, k: Sequence[int], strict: bool = False,
                     exact: bool | None = None,
                     budget: int = DEFAULT_BUDGET) -> JointCdfReport:
    """F_0, ..., F_N with the first t pairs (lexicographic) decoupled in F_t."""
    if len(k) != model.n:
        raise ValueError(f"threshold vector has length {len(k)}, need n={model.n}")
    exact = _resolve_exact(model, exact)
    weak = _weak_thresholds(k, strict)
    chain = tuple(hybrid_cdf(model, weak, set(range(t)), exact, budget)
                  for t in range(model.n_pairs + 1))
    product = _product((marginal_score_pmf(model, i, exact).cdf(weak[i])
                        for i in range(model.n)), exact)
    return JointCdfReport(tuple(int(x) for x in k), chain[0], product, strict, chain, exact)


def chain_is_monotone(chain: Sequence, tol: float = 1e-12) -> bool:
    return all(b >= a - tol for a, b in zip(chain, chain[1:]))


@dataclass(frozen=True)
class Assertion1:
    lhs: Fraction | float
    rhs: Fraction | float
    R: np.ndarray
    W: np.ndarray

    @property
    def error(self) -> float:
        return abs(float(self.lhs - self.rhs))


def residual_law(model: TournamentModel, a: int, b: int, exact: bool,
                 budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Joint law of (s'_a, s'_b), the scores of a and b without their mutual pair.

    Built by enumerating every pair that involves a or b (other than {a, b}).
    """
    factors = []
    for j in range(model.n):
        if j in (a, b):
            continue
        factors.append(Factor(_probs(model.pmf(a, j), exact), 0))
        factors.append(Factor(_probs(model.pmf(b, j), exact), 1))
    m_ab = model.m(a, b)
    shape = (int(model.max_scores[a]) - m_ab + 1, int(model.max_scores[b]) - m_ab + 1)
    return enumerate_law(factors, shape, exact, budget)


def assertion1_check(model: TournamentModel, k1: int, k2: int,
                     players: tuple[int, int] = (0, 1), exact: bool | None = None,
                     budget: int = DEFAULT_BUDGET) -> Assertion1:
    """Compare F_1 - F with the weighted sum of R(g, h) W(g, h).

    Only s_a <= k1 and s_b <= k2 are imposed; the remaining players'
    thresholds are suppressed.
    """
    a, b = players
    if a == b:
        raise ValueError("players must differ")
    if a > b:
        a, b = b, a
        k1, k2 = k2, k1
    if k1 < 0 or k2 < 0:
        raise ValueError("k1 and k2 must be nonnegative")
    exact = _resolve_exact(model, exact)
    weak = [int(M) for M in model.max_scores]
    weak[a], weak[b] = k1, k2
    t = pair_index(model.n, a, b)
    F0 = hybrid_cdf(model, weak, set(), exact, budget)
    F1 = hybrid_cdf(model, weak, {t}, exact, budget)
    law = residual_law(model, a, b, exact, budget)
    W = w_table(model.pmf(a, b), k1, k2, exact)
    zero = Fraction(0) if exact else 0.0
    R = np.empty((k1 + 1, k2 + 1), dtype=object if exact else np.float64)
    for g in range(k1 + 1):
        for h in range(k2 + 1):
            x, y = k1 - g, k2 - h
            R[g, h] = law[x, y] if x < law.shape[0] and y < law.shape[1] else zero
    terms = [R[g, h] * W[g, h] for g in range(k1 + 1) for h in range(k2 + 1)]
    return Assertion1(F1 - F0, _fsum(terms, exact), R, W)
