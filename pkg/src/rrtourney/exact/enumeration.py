"""Brute-force enumeration of joint score laws and the lower-orthant check.

Every outcome vector of the C(n,2) pairings is visited through a mixed-radix
counter whose most significant digit is the lexicographically first pair.
Float runs are accumulated chunk by chunk (fixed chunk boundaries, Neumaier
reduction across chunks); rational runs use integer weights over the common
denominator, so they are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import numpy as np

from rrtourney.exact._accum import ArrayAccumulator
from rrtourney.exact.convolution import marginal_score_pmf
from rrtourney.model import TournamentModel, format_prob

DEFAULT_BUDGET = 10**8
MAX_CELLS = 1 << 26
CHUNK = 1 << 16
NLOD_TOL = 1e-12


class BudgetExceeded(RuntimeError):
    """Enumeration would visit more outcomes than allowed."""

    def __init__(self, required: int, budget: int, what: str = "outcomes"):
        self.required = required
        self.budget = budget
        super().__init__(f"needs {required} {what}, budget is {budget}")


@dataclass(frozen=True)
class Factor:
    """One independent pairing: d points to ``axis``, m - d to ``other``."""

    probs: tuple
    axis: int
    other: int | None = None

    @property
    def m(self) -> int:
        return len(self.probs) - 1


def enumerate_law(factors: Sequence[Factor], shape: tuple[int, ...], exact: bool,
                  budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Joint law, on an array of ``shape``, of the axis totals of ``factors``.

    Visits all prod(m_t + 1) outcomes; the returned array has float dtype, or
    object dtype holding Fractions when ``exact``.
    """
    total = math.prod(f.m + 1 for f in factors)
    if total > budget:
        raise BudgetExceeded(total, budget)
    cells = math.prod(shape)
    if cells > MAX_CELLS:
        raise BudgetExceeded(cells, MAX_CELLS, "score cells")
    strides = np.ones(len(shape), dtype=np.int64)
    for a in range(len(shape) - 2, -1, -1):
        strides[a] = strides[a + 1] * shape[a + 1]
    base = 0
    coef = []
    for f in factors:
        c = int(strides[f.axis])
        if f.other is not None:
            c -= int(strides[f.other])
            base += f.m * int(strides[f.other])
        coef.append(c)
    if exact:
        flat = _enumerate_exact(factors, coef, base, cells)
    else:
        flat = _enumerate_float(factors, coef, base, cells, total)
    return flat.reshape(shape)


def _enumerate_float(factors, coef, base, cells, total) -> np.ndarray:
    radix = [f.m + 1 for f in factors]
    place = [1] * len(factors)
    for t in range(len(factors) - 2, -1, -1):
        place[t] = place[t + 1] * radix[t + 1]
    probs = [np.asarray(f.probs, dtype=np.float64) for f in factors]
    acc = ArrayAccumulator(cells)
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(start + CHUNK, total), dtype=np.int64)
        flat = np.full(idx.shape, base, dtype=np.int64)
        weight = np.ones(idx.shape, dtype=np.float64)
        for t in range(len(factors)):
            d = (idx // place[t]) % radix[t]
            flat += d * coef[t]
            weight *= probs[t][d]
        acc.add(np.bincount(flat, weights=weight, minlength=cells))
    return acc.result()


def _enumerate_exact(factors, coef, base, cells) -> np.ndarray:
    dens = [reduce(math.lcm, (Fraction(p).denominator for p in f.probs), 1) for f in factors]
    weights = [[(d, int(Fraction(p) * den) * 1) for d, p in enumerate(f.probs) if p]
               for f, den in zip(factors, dens)]
    counts: dict[int, int] = {}
    last = len(factors)

    def walk(t: int, flat: int, w: int) -> None:
        if t == last:
            counts[flat] = counts.get(flat, 0) + w
            return
        c = coef[t]
        for d, wd in weights[t]:
            walk(t + 1, flat + d * c, w * wd)

    walk(0, base, 1)
    denom = math.prod(dens)
    out = np.empty(cells, dtype=object)
    out[:] = Fraction(0)
    for flat, w in counts.items():
        out[flat] = Fraction(w, denom)
    return out


def model_factors(model: TournamentModel, exact: bool) -> list[Factor]:
    factors = []
    for t, (i, j) in enumerate(model.pairs()):
        probs = model.palette[model.pair_slot(t)].probs
        if not exact:
            probs = tuple(float(p) for p in probs)
        factors.append(Factor(probs, i, j))
    return factors


def _resolve_exact(model: TournamentModel, exact: bool | None) -> bool:
    if exact is None:
        return model.exact
    if exact and not model.exact:
        raise ValueError("rational mode needs every probability given as a rational")
    return exact


@dataclass(frozen=True, eq=False)
class JointScoreLaw:
    """Law of the whole score vector (s_1, ..., s_n) as a dense array."""

    law: np.ndarray
    exact: bool

    @property
    def n(self) -> int:
        return self.law.ndim

    @property
    def max_scores(self) -> tuple[int, ...]:
        return tuple(s - 1 for s in self.law.shape)

    def cdf(self, k: Sequence[int]):
        """F(k_1..k_n) = P(s_i <= k_i for all i)."""
        if len(k) != self.n:
            raise ValueError(f"threshold vector has length {len(k)}, need {self.n}")
        zero = Fraction(0) if self.exact else 0.0
        if any(int(x) < 0 for x in k):
            return zero
        sl = tuple(slice(0, min(int(x), m) + 1) for x, m in zip(k, self.max_scores))
        block = self.law[sl]
        return sum(block.ravel().tolist(), zero) if self.exact else math.fsum(block.ravel())

    def marginal(self, player: int) -> tuple:
        axes = tuple(a for a in range(self.n) if a != player)
        if self.exact:
            m = self.law.sum(axis=axes) if axes else self.law
            return tuple(Fraction(x) for x in m)
        return tuple(self.law.sum(axis=axes).tolist()) if axes else tuple(self.law.tolist())

    def cumulative(self) -> np.ndarray:
        """F on the full grid 0..M_1 x ... x 0..M_n."""
        out = self.law
        for a in range(self.n):
            out = np.cumsum(out, axis=a)
        return out


@lru_cache(maxsize=32)
def _joint_cached(model: TournamentModel, exact: bool, budget: int) -> JointScoreLaw:
    shape = tuple(int(m) + 1 for m in model.max_scores)
    law = enumerate_law(model_factors(model, exact), shape, exact, budget)
    return JointScoreLaw(law, exact)


def joint_score_law(model: TournamentModel, exact: bool | None = None,
                    budget: int = DEFAULT_BUDGET) -> JointScoreLaw:
    """Law of the score vector by enumerating every outcome of every pairing."""
    return _joint_cached(model, _resolve_exact(model, exact), int(budget))


def marginal_cdfs(model: TournamentModel, exact: bool) -> list[tuple]:
    return [marginal_score_pmf(model, i, exact).cdf_array() for i in range(model.n)]


def _product(values, exact):
    if exact:
        return reduce(lambda a, b: a * b, values, Fraction(1))
    return math.prod(float(v) for v in values)


@dataclass(frozen=True)
class JointCdfReport:
    """Joint lower-orthant probability next to the product of its marginals."""

    k: tuple[int, ...]
    joint: Fraction | float
    product: Fraction | float
    strict: bool = False
    chain: tuple | None = None
    exact: bool = False
    tol: float = NLOD_TOL

    @property
    def margin(self):
        return self.product - self.joint

    @property
    def holds(self) -> bool:
        if self.exact:
            return self.joint <= self.product
        return self.joint <= self.product + self.tol

    def to_dict(self) -> dict:
        out = {
            "k": list(self.k),
            "strict": self.strict,
            "joint": format_prob(self.joint),
            "product": format_prob(self.product),
            "margin": format_prob(self.margin),
            "holds": self.holds,
        }
        if self.exact:
            out["joint_decimal"] = f"{float(self.joint):.17g}"
            out["product_decimal"] = f"{float(self.product):.17g}"
        if self.chain is not None:
            out["chain"] = [format_prob(x) for x in self.chain]
        return out


def _weak_thresholds(k: Sequence[int], strict: bool) -> tuple[int, ...]:
    # on the integer lattice s < k is s <= k - 1
    return tuple(int(x) - 1 if strict else int(x) for x in k)


def joint_cdf_enumerate(model: TournamentModel, k: Sequence[int], strict: bool = False,
                        exact: bool | None = None,
                        budget: int = DEFAULT_BUDGET) -> JointCdfReport:
    """P(s_i <= k_i for all i) by enumeration, against prod P(s_i <= k_i).

    ``strict=True`` uses s_i < k_i throughout.
    """
    if len(k) != model.n:
        raise ValueError(f"threshold vector has length {len(k)}, need n={model.n}")
    exact = _resolve_exact(model, exact)
    weak = _weak_thresholds(k, strict)
    joint = joint_score_law(model, exact, budget).cdf(weak)
    product = _product((marginal_score_pmf(model, i, exact).cdf(weak[i])
                        for i in range(model.n)), exact)
    return JointCdfReport(tuple(int(x) for x in k), joint, product, strict, None, exact)


@dataclass
class NlodScan:
    """Outcome of checking the lower-orthant inequality on many thresholds."""

    n_thresholds: int
    violations: list[JointCdfReport]
    worst: JointCdfReport
    strict: bool
    exact: bool
    reports: list[JointCdfReport] = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return not self.violations


def nlod_scan(model: TournamentModel, grid: str | int = "full", strict: bool = False,
              exact: bool | None = None, budget: int = DEFAULT_BUDGET, seed: int = 0,
              keep_reports: bool = False) -> NlodScan:
    """Check joint <= product on the full threshold grid or ``grid`` random points.

    The full grid covers 0..M_i in each coordinate (0..M_i + 1 when strict);
    thresholds outside it give trivially equal sides.
    """
    exact = _resolve_exact(model, exact)
    law = joint_score_law(model, exact, budget)
    F = law.cumulative()
    cdfs = marginal_cdfs(model, exact)
    dtype = object if exact else np.float64
    prod = np.ones((), dtype=dtype) if not exact else np.array(Fraction(1), dtype=object)
    for c in cdfs:
        prod = np.multiply.outer(prod, np.asarray(c, dtype=dtype))
    if strict:
        pad = tuple((1, 0) for _ in range(model.n))
        zero = Fraction(0) if exact else 0.0
        F = np.pad(F, pad, constant_values=zero)
        prod = np.pad(prod, pad, constant_values=zero)
    margin = prod - F
    if grid == "full":
        points = None
        flat_margin = margin.ravel()
    else:
        count = int(grid)
        rng = np.random.default_rng(seed)
        points = np.stack([rng.integers(0, s, size=count) for s in F.shape], axis=1)
        flat_margin = margin[tuple(points.T)]
    tol = 0 if exact else NLOD_TOL
    bad = np.flatnonzero(flat_margin < -tol) if not exact else \
        np.flatnonzero(np.array([x < 0 for x in flat_margin], dtype=bool))
    worst_idx = int(np.argmin(flat_margin)) if not exact else \
        min(range(len(flat_margin)), key=flat_margin.__getitem__)

    def report(idx: int) -> JointCdfReport:
        if points is None:
            kk = np.unravel_index(idx, F.shape)
        else:
            kk = points[idx]
        kk = tuple(int(x) for x in kk)
        return JointCdfReport(kk, F[kk], prod[kk], strict, None, exact)

    reports = [report(i) for i in range(len(flat_margin))] if keep_reports else []
    return NlodScan(len(flat_margin), [report(int(i)) for i in bad], report(worst_idx),
                    strict, exact, reports)
