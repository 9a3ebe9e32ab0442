"""Shared oracles and strategies.

``brute_outcomes`` walks every outcome with itertools.product and tallies
scores directly; it shares no code with the library's enumeration engine.
"""

from __future__ import annotations

import functools
import itertools
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from rrtourney.model import ModelFamily, OutcomePmf, TournamentModel
from rrtourney.montecarlo import run_convergence


def brute_outcomes(model: TournamentModel):
    """Yield (probability, score tuple) for every realisation of ``model``."""
    pairs = list(model.pairs())
    laws = [model.pmf(i, j).probs for i, j in pairs]
    for digits in itertools.product(*(range(len(p)) for p in laws)):
        prob = 1
        scores = [0] * model.n
        for (i, j), d, law in zip(pairs, digits, laws):
            prob = prob * law[d]
            scores[i] += d
            scores[j] += len(law) - 1 - d
        yield prob, tuple(scores)


def brute_joint_cdf(model: TournamentModel, k) -> Fraction | float:
    return sum((p for p, s in brute_outcomes(model) if all(a <= b for a, b in zip(s, k))),
               Fraction(0) if model.exact else 0.0)


def brute_marginal(model: TournamentModel, player: int) -> dict[int, object]:
    out: dict[int, object] = {}
    for p, s in brute_outcomes(model):
        out[s[player]] = out.get(s[player], 0) + p
    return out


def random_pmf(rng: np.random.Generator, m_max: int = 6, zeros: bool = True) -> OutcomePmf:
    """Rational PMF with small integer weights; some entries may vanish."""
    m = int(rng.integers(1, m_max + 1))
    while True:
        w = rng.integers(0 if zeros else 1, 21, size=m + 1)
        if w.sum() > 0:
            break
    total = int(w.sum())
    return OutcomePmf(tuple(Fraction(int(x), total) for x in w))


@st.composite
def pmfs(draw, m_max: int = 6, exact: bool = True):
    m = draw(st.integers(1, m_max))
    w = draw(st.lists(st.integers(0, 30), min_size=m + 1, max_size=m + 1)
             .filter(lambda xs: sum(xs) > 0))
    pmf = OutcomePmf(tuple(Fraction(x, sum(w)) for x in w))
    return pmf if exact else pmf.as_float()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


DEFAULT_RUN_PRESETS = {
    "ex1": ("uniform", {"m": 2}),
    "ex2": ("binomial", {"m": 1}),
    "ex3": ("chess", {"p": "1/2"}),
}


RUN_SECONDS: dict[str, float] = {}


@functools.lru_cache(maxsize=None)
def default_run(example: str):
    """Default grid, default seed, 1000 trials; computed once per session."""
    name, params = DEFAULT_RUN_PRESETS[example]
    start = time.perf_counter()
    reports = run_convergence(ModelFamily.of(name, **params), trials=1000)
    RUN_SECONDS[example] = time.perf_counter() - start
    return reports


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
