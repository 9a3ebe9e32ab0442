"""Normal tails and the centring sequences for the normalised maximal score.

Logarithms are natural throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from rrtourney.model import (
    ModelError,
    TournamentModel,
    canonical_preset,
    ex7_constant,
    model_moments,
    parse_prob,
)

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
INV_SQRT_4PI = 1.0 / math.sqrt(4.0 * math.pi)


def normal_pdf(x: float) -> float:
    return INV_SQRT_2PI * math.exp(-0.5 * x * x)


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def normal_sf(x: float) -> float:
    """1 - Phi(x) without cancellation."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


@dataclass(frozen=True)
class MillsCheck:
    x: float
    tail: float
    approx: float
    rel_err: float


def mills_ratio_check(x: float) -> MillsCheck:
    """Compare 1 - Phi(x) with phi(x)/x."""
    if not x > 0:
        raise ValueError("x must be positive")
    tail = normal_sf(x)
    approx = normal_pdf(x) / x
    return MillsCheck(x, tail, approx, abs(tail / approx - 1.0))


@dataclass(frozen=True)
class ThresholdPair:
    """x_{n-1}^- (band top) and x_{n-1}^+ (band bottom) for a given epsilon."""

    n: int
    epsilon: float
    x_minus: float
    x_plus: float

    @property
    def center(self) -> float:
        return math.sqrt(2.0 * math.log(self.n - 1))


def thresholds(n: int, epsilon: float) -> ThresholdPair:
    """sqrt(2 log(n-1) - (1 -/+ eps) log log(n-1))."""
    if n < 4:
        raise ValueError("thresholds need n >= 4 so that log log(n-1) > 0")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    a = 2.0 * math.log(n - 1)
    b = math.log(math.log(n - 1))
    lo_rad = a - (1 + epsilon) * b
    hi_rad = a - (1 - epsilon) * b
    if lo_rad < 0:
        raise ValueError(f"negative radicand {lo_rad:.6g} for n={n}, epsilon={epsilon}")
    return ThresholdPair(n, epsilon, math.sqrt(hi_rad), math.sqrt(lo_rad))


@dataclass(frozen=True)
class BoundConstants:
    """c'' < 1/sqrt(4 pi) < c' bracketing the tail constant."""

    c_prime: float = 0.3
    c_double_prime: float = 0.25

    def __post_init__(self):
        if not (0 < self.c_double_prime < INV_SQRT_4PI < self.c_prime):
            raise ValueError(f"need 0 < c'' < {INV_SQRT_4PI:.7f} < c', got "
                             f"c''={self.c_double_prime}, c'={self.c_prime}")


def tail_bounds(n: int, epsilon: float,
                constants: BoundConstants = BoundConstants()) -> tuple[float, float]:
    """Union bound on P(s* > x^-) and product bound on P(s* <= x^+)."""
    if n < 4:
        raise ValueError("tail bounds need n >= 4")
    L = math.log(n - 1)
    lhs = n * constants.c_prime * L ** (-epsilon / 2) / (n - 1)
    rhs = math.exp(-constants.c_double_prime * n * L ** (epsilon / 2) / (n - 1))
    return lhs, rhs


def bound_table(ns: Iterable[int], epsilon: float,
                constants: BoundConstants = BoundConstants()) -> list[dict]:
    rows = []
    for n in ns:
        t = thresholds(n, epsilon)
        lhs, rhs = tail_bounds(n, epsilon, constants)
        rows.append({"n": n, "epsilon": epsilon, "x_plus": t.x_plus, "x_minus": t.x_minus,
                     "lhs_bound": lhs, "rhs_bound": rhs})
    return rows


@dataclass(frozen=True)
class CenteringPrediction:
    example: str
    n: int
    center: float
    mean_term: float
    fluctuation_term: float


def _circular_terms(n: int, m: int, ps: Sequence) -> tuple[float, float]:
    need = (n - 1) // 2
    ps = [float(parse_prob(p)) for p in ps]
    ps = [ps[d % len(ps)] for d in range(need)]
    vsum = sum(p * (1 - p) for p in ps)
    L = math.log(n - 1)
    if n % 2:
        return m * (n - 1) / 2, 2 * math.sqrt(L * m * vsum)
    return m * (n - 1) / 2, 2 * math.sqrt(L * m * (vsum + 1 / 8))


def predicted_center(example: str, n: int, **params) -> CenteringPrediction:
    """Deterministic sequence that s_(n) minus it tends to 0 (display units).

    ``example`` is a preset name or alias (ex1..ex7); ``params`` are the
    preset's parameters.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    key = canonical_preset(example)
    L = math.log(n - 1)
    if key == "uniform":
        m = int(params.get("m", 2))
        mean, fluct = (n - 1) * m / 2, math.sqrt((n - 1) * L * m * (m + 2) / 6)
    elif key in ("binomial", "binary"):
        m = int(params.get("m", 1))
        mean, fluct = (n - 1) * m / 2, math.sqrt((n - 1) * L * m / 2)
    elif key == "chess":
        p = float(parse_prob(params.get("p", "1/2")))
        mean, fluct = (n - 1) / 2, math.sqrt((n - 1) * L * (1 - p) / 2)
    elif key == "circular":
        mean, fluct = _circular_terms(n, int(params.get("m", 1)), params.get("ps", ("1/3",)))
    elif key == "three-class":
        if n % 3:
            raise ModelError(f"three-class needs n = 3k, got n={n}")
        k = n // 3
        mw, mb = int(params.get("mw", 2)), int(params.get("mb", 1))
        p = float(parse_prob(params.get("p", "2/3")))
        q = 1 - p if params.get("q") is None else float(parse_prob(params["q"]))
        mean = (k - 1) * mw / 2 + k * mb
        fluct = math.sqrt(2 * L * ((k - 1) * mw / 4 + 2 * k * mb * p * q))
    elif key == "triangular":
        m = int(params.get("m", 2))
        mean, fluct = (n - 1) * m / 2, math.sqrt((n - 1) * L * m * (m + 4) / 12)
    elif key == "ex7":
        lam = ex7_constant()
        # 2 Var(X_ij) = 4(L^2 + 4L^3), printed to seven places as 2.1452936
        mean, fluct = 2 * (n - 1), math.sqrt(4 * (lam**2 + 4 * lam**3) * (n - 1) * L)
    else:  # pragma: no cover - canonical_preset guards the keys
        raise ModelError(f"unknown example {example!r}")
    return CenteringPrediction(key, n, mean + fluct, mean, fluct)


def moment_center(model: TournamentModel) -> float:
    """E(s_1) + sqrt(2 log(n-1) Var(s_1)) from exact model moments (display units)."""
    mom = model_moments(model, display=True)
    return float(mom.mean) + math.sqrt(2 * math.log(model.n - 1) * float(mom.variance))


def cramer_tail_table(model: TournamentModel, epsilon: float = 1.0,
                      player: int = 0) -> list[dict]:
    """Exact P(s_i* > x) against 1 - Phi(x) at x = x^+, x^-.

    Also reports sigma^(1/3)/x, the ratio whose growth governs the normal
    approximation; no finite-n criterion is asserted.
    """
    from rrtourney.exact.convolution import marginal_score_pmf

    mom = model_moments(model)
    mean = float(mom.means[player])
    sd = math.sqrt(float(mom.variances[player]))
    if sd == 0:
        raise ModelError("degenerate model: score variance is zero")
    law = marginal_score_pmf(model, player, exact=False)
    t = thresholds(model.n, epsilon)
    rows = []
    for label, x in (("x_plus", t.x_plus), ("x_minus", t.x_minus)):
        exact_tail = float(law.sf(math.floor(mean + x * sd)))
        normal_tail = normal_sf(x)
        rows.append({"n": model.n, "point": label, "x": x, "exact_tail": exact_tail,
                     "normal_tail": normal_tail, "tail_ratio": exact_tail / normal_tail,
                     "sigma_cuberoot_over_x": sd ** (1 / 3) / x})
    return rows
