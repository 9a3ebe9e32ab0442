"""Tournament probability models.

A model assigns to every unordered pair of players {i, j} (i < j) the law of
X_ij, the points player i takes from the pairing; player j then takes
m_ij - X_ij.  Probabilities are kept as :class:`fractions.Fraction` when they
are supplied exactly and as floats otherwise.

Players are 0-based internally.  Pairs are ordered lexicographically, so the
pair (i, j) has label ``pair_index(n, i, j)`` and ``np.triu_indices(n, 1)``
lists them in label order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from numbers import Rational
from typing import Callable, Iterator, Sequence

import numpy as np

Prob = Fraction | float

SUM_TOL = 1e-12


class ModelError(ValueError):
    """Invalid PMF, model or preset parameters."""


def parse_prob(value) -> Prob:
    """Parse ``"1/3"``, ``"0.25"``, ``1``, a Fraction or a float.

    Rational strings and integers give Fractions; decimal strings give floats.
    """
    if isinstance(value, bool):
        raise ModelError(f"not a probability: {value!r}")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        s = value.strip()
        try:
            if "/" in s:
                return Fraction(s)
            if s.lstrip("+-").isdigit():
                return Fraction(int(s))
            return float(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelError(f"cannot parse probability {value!r}") from exc
    raise ModelError(f"not a probability: {value!r}")


def format_prob(x: Prob) -> str:
    """Rational string for exact values, 17 significant digits otherwise."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    return f"{float(x):.17g}"


@dataclass(frozen=True)
class OutcomePmf:
    """Law of the points one side takes from a single pairing, on 0..m."""

    probs: tuple

    def __post_init__(self):
        probs = tuple(parse_prob(p) if not isinstance(p, (Fraction, float)) else p
                      for p in self.probs)
        if any(isinstance(p, float) for p in probs):
            probs = tuple(float(p) for p in probs)
        object.__setattr__(self, "probs", probs)
        if len(probs) < 2:
            raise ModelError("a pairing needs m >= 1 (at least two outcomes)")
        for p in probs:
            if not (p >= 0) or (isinstance(p, float) and not math.isfinite(p)):
                raise ModelError(f"negative or non-finite probability {p!r}")
        total = sum(probs) if self.exact else math.fsum(probs)
        if self.exact:
            if total != 1:
                raise ModelError(f"probabilities sum to {total}, not 1")
        elif abs(total - 1.0) > SUM_TOL:
            raise ModelError(f"probabilities sum to {total!r}, not 1")

    @classmethod
    def of(cls, probs: Sequence) -> OutcomePmf:
        return cls(tuple(probs))

    @property
    def m(self) -> int:
        return len(self.probs) - 1

    @property
    def exact(self) -> bool:
        return all(isinstance(p, Fraction) for p in self.probs)

    def as_float(self) -> OutcomePmf:
        return OutcomePmf(tuple(float(p) for p in self.probs))

    def reversed(self) -> OutcomePmf:
        return reverse_pmf(self)

    def cumulative(self) -> tuple:
        """Prefix sums Q_0..Q_m."""
        out, acc = [], 0
        for p in self.probs:
            acc = acc + p
            out.append(acc)
        return tuple(out)

    def is_symmetric(self) -> bool:
        return self.probs == self.probs[::-1]


def pmf_moments(pmf: OutcomePmf) -> tuple[Prob, Prob]:
    """Mean and variance of a pairing's points."""
    mean = sum(u * p for u, p in enumerate(pmf.probs))
    second = sum(u * u * p for u, p in enumerate(pmf.probs))
    var = second - mean * mean
    if not pmf.exact and var < 0:
        var = 0.0
    return mean, var


def reverse_pmf(pmf: OutcomePmf) -> OutcomePmf:
    """Law of the opponent's points: entry u is p_{m-u}."""
    return OutcomePmf(pmf.probs[::-1])


def binomial_pmf(m: int, p: Prob) -> OutcomePmf:
    p = parse_prob(p)
    if not 0 <= p <= 1:
        raise ModelError(f"success probability {p!r} outside [0, 1]")
    q = 1 - p
    return OutcomePmf(tuple(math.comb(m, u) * p**u * q ** (m - u) for u in range(m + 1)))


def uniform_pmf(m: int) -> OutcomePmf:
    return OutcomePmf(tuple(Fraction(1, m + 1) for _ in range(m + 1)))


def pair_index(n: int, i: int, j: int) -> int:
    """Lexicographic label (0-based) of the unordered pair {i, j}."""
    if i > j:
        i, j = j, i
    if i == j or i < 0 or j >= n:
        raise ModelError(f"bad pair ({i}, {j}) for n={n}")
    return i * n - i * (i + 1) // 2 + (j - i - 1)


@lru_cache(maxsize=16)
def pair_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column indices of all pairs i < j in lexicographic order."""
    i, j = np.triu_indices(n, 1)
    i = i.astype(np.int64)
    j = j.astype(np.int64)
    i.flags.writeable = False
    j.flags.writeable = False
    return i, j


@dataclass(frozen=True, eq=False)
class TournamentModel:
    """n players with one outcome law per unordered pair.

    ``palette`` holds the distinct laws; ``assignment[t]`` picks the law of
    X_ij for the pair with label t (i < j).  ``assignment=None`` means every
    pair uses ``palette[0]``.  ``score_unit`` scales lattice points for
    display only (1/2 for chess half-points).
    """

    n: int
    palette: tuple[OutcomePmf, ...]
    assignment: np.ndarray | None = None
    score_unit: Fraction = Fraction(1)
    label: str = "custom"
    preset: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise ModelError(f"need n >= 2 players, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not self.palette:
            raise ModelError("empty palette")
        for pmf in self.palette:
            if not isinstance(pmf, OutcomePmf):
                raise ModelError(f"palette entry {pmf!r} is not an OutcomePmf")
        object.__setattr__(self, "score_unit", Fraction(self.score_unit))
        if self.score_unit <= 0:
            raise ModelError("score_unit must be positive")
        if self.assignment is not None:
            a = np.asarray(self.assignment, dtype=np.int64).copy()
            if a.shape != (self.n_pairs,):
                raise ModelError(f"assignment must have one entry per pair ({self.n_pairs})")
            if a.size and (a.min() < 0 or a.max() >= len(self.palette)):
                raise ModelError("assignment refers outside the palette")
            a.flags.writeable = False
            object.__setattr__(self, "assignment", a)

    # construction helpers
    @classmethod
    def homogeneous(cls, n: int, pmf: OutcomePmf, **kw) -> TournamentModel:
        return cls(n, (pmf,), None, **kw)

    @classmethod
    def from_pairs(cls, n: int, pairs: dict, default: OutcomePmf | None = None,
                   **kw) -> TournamentModel:
        """Build from ``{(i, j): pmf}`` giving the law of X_ij (0-based players).

        A key with i > j is stored reversed.  Pairs not listed use ``default``.
        """
        palette: list[OutcomePmf] = []
        lookup: dict[OutcomePmf, int] = {}

        def slot(pmf):
            if pmf not in lookup:
                lookup[pmf] = len(palette)
                palette.append(pmf)
            return lookup[pmf]

        n_pairs = n * (n - 1) // 2
        assignment = np.full(n_pairs, -1, dtype=np.int64)
        for (i, j), pmf in pairs.items():
            t = pair_index(n, i, j)
            if assignment[t] != -1:
                raise ModelError(f"pair ({i}, {j}) given twice")
            assignment[t] = slot(pmf if i < j else reverse_pmf(pmf))
        if (assignment == -1).any():
            if default is None:
                missing = int(np.flatnonzero(assignment == -1)[0])
                i, j = pair_arrays(n)[0][missing], pair_arrays(n)[1][missing]
                raise ModelError(f"no law for pair ({i}, {j}) and no default")
            assignment[assignment == -1] = slot(default)
        return cls(n, tuple(palette), assignment, **kw)

    # structure
    @property
    def n_pairs(self) -> int:
        return self.n * (self.n - 1) // 2

    @property
    def exact(self) -> bool:
        return all(p.exact for p in self.palette)

    def pair_slot(self, t: int) -> int:
        return 0 if self.assignment is None else int(self.assignment[t])

    @cached_property
    def slots(self) -> np.ndarray:
        """Palette index of every pair, in label order."""
        if self.assignment is None:
            a = np.zeros(self.n_pairs, dtype=np.int64)
            a.flags.writeable = False
            return a
        return self.assignment

    @cached_property
    def pair_m(self) -> np.ndarray:
        ms = np.array([p.m for p in self.palette], dtype=np.int64)
        return ms[self.slots]

    def pairs(self) -> Iterator[tuple[int, int]]:
        for i in range(self.n):
            for j in range(i + 1, self.n):
                yield i, j

    def pmf(self, i: int, j: int) -> OutcomePmf:
        """Law of X_ij, the points i takes from j."""
        law = self.palette[self.pair_slot(pair_index(self.n, i, j))]
        return law if i < j else reverse_pmf(law)

    def m(self, i: int, j: int) -> int:
        return self.palette[self.pair_slot(pair_index(self.n, i, j))].m

    @cached_property
    def max_scores(self) -> np.ndarray:
        """Per-player maximum attainable score, sum over j of m_ij."""
        i, j = pair_arrays(self.n)
        ms = self.pair_m
        out = (np.bincount(i, weights=ms, minlength=self.n)
               + np.bincount(j, weights=ms, minlength=self.n))
        return out.astype(np.int64)

    def m_matrix(self) -> np.ndarray:
        """Symmetric n x n matrix of m_ij (zero diagonal)."""
        i, j = pair_arrays(self.n)
        out = np.zeros((self.n, self.n), dtype=np.int64)
        out[i, j] = self.pair_m
        out[j, i] = self.pair_m
        return out

    @property
    def total_points(self) -> int:
        return int(self.pair_m.sum())

    def as_float(self) -> TournamentModel:
        return TournamentModel(self.n, tuple(p.as_float() for p in self.palette),
                               self.assignment, self.score_unit, self.label, self.preset)


@dataclass(frozen=True)
class Moments:
    """Per-player mean and variance of s_i, in lattice or display units."""

    means: tuple
    variances: tuple
    unit: Fraction = Fraction(1)

    @property
    def homogeneous(self) -> bool:
        return (all(abs(x - self.means[0]) <= 1e-12 * max(1, abs(self.means[0])) for x in self.means)
                and all(abs(v - self.variances[0]) <= 1e-12 * max(1, abs(self.variances[0]))
                        for v in self.variances))

    @property
    def mean(self):
        if not self.homogeneous:
            raise ModelError("players have different moments; use means/variances")
        return self.means[0]

    @property
    def variance(self):
        if not self.homogeneous:
            raise ModelError("players have different moments; use means/variances")
        return self.variances[0]

    @property
    def stddev(self) -> float:
        return math.sqrt(self.variance)


def model_moments(model: TournamentModel, display: bool = False) -> Moments:
    """Mean and variance of every player's score, assuming independent pairs.

    With ``display=True`` values are scaled by ``score_unit`` (and its square).
    """
    n, P = model.n, len(model.palette)
    i, j = pair_arrays(n)
    slots = model.slots
    # count, per player, how often each palette law is played forwards/backwards
    fwd = np.bincount(i * P + slots, minlength=n * P).reshape(n, P)
    rev = np.bincount(j * P + slots, minlength=n * P).reshape(n, P)
    stats = [pmf_moments(p) for p in model.palette]
    exact = model.exact
    dtype = object if exact else float
    mu = np.array([s[0] for s in stats], dtype=dtype)
    var = np.array([s[1] for s in stats], dtype=dtype)
    ms = np.array([p.m for p in model.palette], dtype=dtype)
    fwd = fwd.astype(dtype)
    rev = rev.astype(dtype)
    means = fwd @ mu + rev @ (ms - mu)
    variances = (fwd + rev) @ var
    unit = model.score_unit if display else Fraction(1)
    if exact:
        means = tuple(Fraction(x) * unit for x in means)
        variances = tuple(Fraction(v) * unit * unit for v in variances)
    else:
        u = float(unit)
        means = tuple(float(x) * u for x in means)
        variances = tuple(float(v) * u * u for v in variances)
    return Moments(means, variances, unit)


# presets -------------------------------------------------------------------

def ex7_constant(tol: float = 1e-14) -> float:
    """Positive root of L + 2L^2 + 2L^3 = 1, by bisection."""
    lo, hi = 0.0, 1.0
    f = lambda x: x + 2 * x * x + 2 * x**3 - 1
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _open_unit(name: str, p) -> Prob:
    p = parse_prob(p)
    if not 0 < p < 1:
        raise ModelError(f"{name}={p} must lie strictly between 0 and 1")
    return p


def _uniform(n: int, m: int = 2) -> TournamentModel:
    return TournamentModel.homogeneous(n, uniform_pmf(int(m)), label="uniform")


def _binomial(n: int, m: int = 1, p="1/2") -> TournamentModel:
    p = parse_prob(p)
    if p != Fraction(1, 2) and not (isinstance(p, float) and p == 0.5):
        raise ModelError("the symmetric binomial preset needs p = 1/2")
    return TournamentModel.homogeneous(n, binomial_pmf(int(m), p), label="binomial")


def _binary(n: int) -> TournamentModel:
    return TournamentModel.homogeneous(n, binomial_pmf(1, Fraction(1, 2)), label="binary")


def _chess(n: int, p="1/2") -> TournamentModel:
    p = parse_prob(p)
    if not 0 <= p < 1:
        raise ModelError(f"draw probability {p} must lie in [0, 1)")
    w = (1 - p) / 2
    return TournamentModel.homogeneous(n, OutcomePmf((w, p, w)), score_unit=Fraction(1, 2),
                                       label="chess")


def _circular(n: int, m: int = 1, ps: Sequence = ("1/3",)) -> TournamentModel:
    """Players on a circle; X_{i,i+d} ~ Bin(m, p_d) for circular distance d."""
    m = int(m)
    if n < 3:
        raise ModelError("circular preset needs n >= 3")
    need = (n - 1) // 2
    ps = [_open_unit("p_d", p) for p in ps]
    if not ps:
        raise ModelError("circular preset needs at least one p_d")
    if len(ps) != need:
        ps = [ps[d % len(ps)] for d in range(need)]
    fair = binomial_pmf(m, Fraction(1, 2))
    palette = [fair]
    for p in ps:
        palette.append(binomial_pmf(m, p))
        palette.append(binomial_pmf(m, 1 - p))
    i, j = pair_arrays(n)
    gap = j - i
    slots = np.zeros(gap.shape, dtype=np.int64)
    ahead = gap <= need  # j = i + d
    behind = (n - gap) <= need  # i = j + d (mod n)
    d_ahead = gap
    d_behind = n - gap
    slots[ahead] = 2 * d_ahead[ahead] - 1
    slots[behind & ~ahead] = 2 * d_behind[behind & ~ahead]
    # even n: remaining pairs are diametric and get the fair law
    return TournamentModel(n, tuple(palette), slots, label="circular")


def _three_class(n: int, mw: int = 2, mb: int = 1, p="2/3", q=None) -> TournamentModel:
    """Three classes of k players in a cyclic (rock-paper-scissors) order."""
    if n % 3 or n < 3:
        raise ModelError(f"three-class preset needs n = 3k, got n={n}")
    p = _open_unit("p", p)
    q = 1 - p if q is None else _open_unit("q", q)
    if abs(p + q - 1) > SUM_TOL:
        raise ModelError("p + q must equal 1 for C(m_b,u) p^u q^(m_b-u) to be a law")
    if not q < p:
        raise ModelError("three-class preset needs 0 < q < p < 1")
    k = n // 3
    mw, mb = int(mw), int(mb)
    within = binomial_pmf(mw, Fraction(1, 2))
    beats = binomial_pmf(mb, p)
    loses = reverse_pmf(beats)
    i, j = pair_arrays(n)
    ci, cj = i // k, j // k
    slots = np.zeros(i.shape, dtype=np.int64)
    slots[cj == (ci + 1) % 3] = 1
    slots[ci == (cj + 1) % 3] = 2
    return TournamentModel(n, (within, beats, loses), slots, label="three-class")


def _triangular(n: int, m: int = 2) -> TournamentModel:
    m = int(m)
    if m % 2 or m < 2:
        raise ModelError("triangular preset needs even m = 2k >= 2")
    k = m // 2
    probs = [Fraction(min(u, m - u) + 1, (k + 1) ** 2) for u in range(m + 1)]
    return TournamentModel.homogeneous(n, OutcomePmf(tuple(probs)), label="triangular")


def _ex7(n: int) -> TournamentModel:
    L = ex7_constant()
    # centre weight taken as the complement so the vector sums to 1 to rounding
    probs = (L**3, L**2, 1 - 2 * (L**2 + L**3), L**2, L**3)
    return TournamentModel.homogeneous(n, OutcomePmf(probs), label="ex7")


PRESETS: dict[str, Callable[..., TournamentModel]] = {
    "uniform": _uniform,
    "binomial": _binomial,
    "binary": _binary,
    "chess": _chess,
    "circular": _circular,
    "three-class": _three_class,
    "triangular": _triangular,
    "ex7": _ex7,
}

ALIASES = {
    "ex1": "uniform",
    "ex2": "binomial",
    "ex3": "chess",
    "ex4": "circular",
    "ex5": "three-class",
    "ex6": "triangular",
}


def canonical_preset(name: str) -> str:
    key = name.strip().lower().replace("_", "-")
    key = ALIASES.get(key, key)
    if key not in PRESETS:
        raise ModelError(f"unknown preset {name!r}; known: {sorted(PRESETS) + sorted(ALIASES)}")
    return key


def preset(name: str, n: int, **params) -> TournamentModel:
    """Named model from the examples catalogue (see ``PRESETS``)."""
    key = canonical_preset(name)
    try:
        model = PRESETS[key](int(n), **params)
    except TypeError as exc:
        raise ModelError(f"bad parameters for preset {key!r}: {exc}") from exc
    object.__setattr__(model, "preset", (key, tuple(sorted(params.items(), key=lambda kv: kv[0]))))
    return model


@dataclass(frozen=True)
class ModelFamily:
    """A preset with fixed parameters, instantiated for any n.  Picklable."""

    name: str
    params: tuple = ()

    @classmethod
    def of(cls, name: str, **params) -> ModelFamily:
        fixed = tuple(sorted(((k, tuple(v) if isinstance(v, list) else v)
                              for k, v in params.items()), key=lambda kv: kv[0]))
        return cls(canonical_preset(name), fixed)

    def __call__(self, n: int) -> TournamentModel:
        return preset(self.name, n, **dict(self.params))
