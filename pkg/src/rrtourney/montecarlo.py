"""Seeded simulation of tournaments and of the normalised maximal score.

Each trial owns a Philox stream keyed by (seed, n, trial index), so a report
is a pure function of its inputs no matter how trials are spread over
workers.  Statistics are reduced over the per-trial arrays in trial order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from rrtourney.asymptotics import thresholds
from rrtourney.exact.landau import subset_score_bound_check
from rrtourney.model import ModelError, ModelFamily, TournamentModel, model_moments, pair_arrays

DEFAULT_SEED = 20211
DEFAULT_GRID = (50, 200, 800, 2000)
DEFAULT_EPSILON = 1.0
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)
CHUNK_TRIALS = 25
CHECK_EVERY = 100


class PropertyViolation(RuntimeError):
    """A sampled tournament broke score conservation or the subset bound."""


def trial_stream(seed: int, n: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(n, trial))))


class _Sampler:
    """Inverse-CDF tables for one model, grouped by palette law."""

    def __init__(self, model: TournamentModel):
        self.model = model
        self.i, self.j = pair_arrays(model.n)
        slots = model.slots
        self.pair_m = model.pair_m.astype(np.float64)
        self.groups = []
        for s, pmf in enumerate(model.palette):
            idx = np.flatnonzero(slots == s)
            if idx.size:
                cum = np.cumsum(np.asarray([float(p) for p in pmf.probs]))[:-1]
                self.groups.append((idx, cum))
        self.single = len(self.groups) == 1

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        """Points of the lower-numbered player in every pair, label order."""
        u = rng.random(self.model.n_pairs)
        if self.single:
            return np.searchsorted(self.groups[0][1], u, side="right")
        out = np.empty(u.shape, dtype=np.int64)
        for idx, cum in self.groups:
            out[idx] = np.searchsorted(cum, u[idx], side="right")
        return out

    def scores(self, rng: np.random.Generator) -> np.ndarray:
        d = self.draw(rng)
        n = self.model.n
        s = (np.bincount(self.i, weights=d, minlength=n)
             + np.bincount(self.j, weights=self.pair_m - d, minlength=n))
        return np.rint(s).astype(np.int64)


@dataclass(frozen=True)
class TrialOutcome:
    scores: np.ndarray
    max_score: int
    normalized_max: float


class _Normalizer:
    def __init__(self, model: TournamentModel):
        mom = model_moments(model)
        self.means = np.array([float(x) for x in mom.means])
        self.sds = np.sqrt(np.array([float(v) for v in mom.variances]))
        if np.any(self.sds == 0):
            raise ModelError("a player's score has zero variance; normalisation undefined")
        self.common = mom.homogeneous
        self.mode = "common" if self.common else "per-player"

    def normalized_max(self, scores: np.ndarray) -> float:
        if self.common:
            return float((scores.max() - self.means[0]) / self.sds[0])
        return float(np.max((scores - self.means) / self.sds))


def _plan(model: TournamentModel) -> tuple[_Sampler, _Normalizer]:
    cache = model.__dict__.setdefault("_mc_plan", {})
    if "plan" not in cache:
        cache["plan"] = (_Sampler(model), _Normalizer(model))
    return cache["plan"]


def sample_tournament(model: TournamentModel, rng: np.random.Generator) -> TrialOutcome:
    """One realised tournament; consumes exactly C(n, 2) uniforms."""
    sampler, norm = _plan(model)
    scores = sampler.scores(rng)
    return TrialOutcome(scores, int(scores.max()), norm.normalized_max(scores))


def sample_scores(model: TournamentModel, trials: int, seed: int) -> np.ndarray:
    """Score vectors (trials x n) of independent tournaments, trial-keyed streams."""
    sampler, _ = _plan(model)
    return np.stack([sampler.scores(trial_stream(seed, model.n, t)) for t in range(trials)])


def _check_trial(model: TournamentModel, scores: np.ndarray, trial: int) -> None:
    verdict = subset_score_bound_check(scores, model)
    if not verdict.ok:
        raise PropertyViolation(f"n={model.n} trial {trial}: {verdict.describe()}")


def _run_chunk(source, n: int, seed: int, start: int, stop: int, check_every: int):
    model = source(n) if not isinstance(source, TournamentModel) else source
    sampler, norm = _plan(model)
    size = stop - start
    normed = np.empty(size)
    tops = np.empty(size, dtype=np.int64)
    unique = np.empty(size, dtype=bool)
    for k, t in enumerate(range(start, stop)):
        scores = sampler.scores(trial_stream(seed, n, t))
        if check_every and t % check_every == 0:
            _check_trial(model, scores, t)
        top = scores.max()
        tops[k] = top
        unique[k] = np.count_nonzero(scores == top) == 1
        normed[k] = norm.normalized_max(scores)
    return normed, tops, unique


@dataclass
class SimulationReport:
    """Monte Carlo summary of s*_(n) for one n."""

    n: int
    trials: int
    seed: int
    epsilon: float
    normalization: str
    center: float
    mean_dev: float
    abs_dev_mean: float
    quantiles: dict
    coverage: float | None
    x_plus: float | None
    x_minus: float | None
    unique_max_fraction: float
    mean_max_score: float
    values: np.ndarray = field(repr=False)

    def statistics(self) -> dict:
        """Scalar statistics in a fixed order (used for CSV/JSON-lines)."""
        out = {
            "trials": self.trials,
            "center": self.center,
            "mean_dev": self.mean_dev,
            "abs_dev_mean": self.abs_dev_mean,
        }
        for q, v in self.quantiles.items():
            out[f"q{int(round(q * 100)):02d}"] = v
        out.update({
            "coverage": self.coverage,
            "x_plus": self.x_plus,
            "x_minus": self.x_minus,
            "unique_max_fraction": self.unique_max_fraction,
            "mean_max_score": self.mean_max_score,
        })
        return out


def summarize(n: int, values: np.ndarray, tops: np.ndarray, unique: np.ndarray, seed: int,
              epsilon: float, normalization: str, score_unit: float) -> SimulationReport:
    center = math.sqrt(2 * math.log(n - 1)) if n > 2 else 0.0
    dev = values - center
    if n >= 4:
        band = thresholds(n, epsilon)
        inside = (values > band.x_plus) & (values <= band.x_minus)
        coverage, xp, xm = float(inside.mean()), band.x_plus, band.x_minus
    else:
        coverage = xp = xm = None
    qs = np.quantile(values, QUANTILES)
    return SimulationReport(
        n=n, trials=len(values), seed=seed, epsilon=epsilon, normalization=normalization,
        center=center, mean_dev=float(dev.mean()), abs_dev_mean=float(np.abs(dev).mean()),
        quantiles={q: float(v) for q, v in zip(QUANTILES, qs)}, coverage=coverage,
        x_plus=xp, x_minus=xm, unique_max_fraction=float(unique.mean()),
        mean_max_score=float(tops.mean()) * score_unit, values=values)


def run_convergence(source: ModelFamily | Callable[[int], TournamentModel] | TournamentModel,
                    grid: Sequence[int] = DEFAULT_GRID, trials: int = 1000,
                    epsilon: float = DEFAULT_EPSILON, seed: int = DEFAULT_SEED,
                    workers: int = 1, check_every: int = CHECK_EVERY) -> list[SimulationReport]:
    """Simulate s*_(n) for each n in ``grid``.

    ``source`` builds the model for a given n (a :class:`ModelFamily` when
    ``workers > 1``, since it must be picklable) or is a fixed model whose n
    must be the only grid entry.  Every ``check_every``-th trial is checked
    for score conservation and the subset bound.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if isinstance(source, TournamentModel) and any(n != source.n for n in grid):
        raise ModelError(f"fixed model has n={source.n}; grid must be [{source.n}]")
    reports = []
    for n in grid:
        if n < 2:
            raise ModelError("need n >= 2")
        model = source if isinstance(source, TournamentModel) else source(n)
        _, norm = _plan(model)  # validates variance before any work
        spans = [(a, min(a + CHUNK_TRIALS, trials)) for a in range(0, trials, CHUNK_TRIALS)]
        if workers > 1 and len(spans) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(_run_chunk, *zip(*[(source, n, seed, a, b, check_every)
                                                          for a, b in spans])))
        else:
            parts = [_run_chunk(model, n, seed, a, b, check_every) for a, b in spans]
        values = np.concatenate([p[0] for p in parts])
        tops = np.concatenate([p[1] for p in parts])
        unique = np.concatenate([p[2] for p in parts])
        reports.append(summarize(n, values, tops, unique, seed, epsilon, norm.mode,
                                 float(model.score_unit)))
    return reports


def deviation_cdf(report: SimulationReport, delta: float) -> float:
    """Empirical P(|s*_(n) - sqrt(2 log(n-1))| > delta)."""
    return float(np.mean(np.abs(report.values - report.center) > delta))
