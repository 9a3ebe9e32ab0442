"""Lower bounds on subset score totals (generalised Landau condition)."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from rrtourney.model import TournamentModel

FULL_SUBSET_LIMIT = 12


@dataclass(frozen=True)
class BoundVerdict:
    ok: bool
    total: int
    expected_total: int
    subset: tuple[int, ...] | None = None
    subset_score: int | None = None
    subset_points: int | None = None

    def describe(self) -> str:
        if self.ok:
            return f"ok: total {self.total} = {self.expected_total}"
        if self.subset is None:
            return f"total {self.total} != {self.expected_total}"
        players = "{" + ",".join(str(i + 1) for i in self.subset) + "}"
        return (f"subset {players}: score {self.subset_score} < "
                f"{self.subset_points} points exchanged inside it")


def _inner_points(model: TournamentModel, subset: Sequence[int]) -> int:
    return sum(model.m(i, j) for i, j in combinations(subset, 2))


def subset_score_bound_check(scores: Sequence[int], model: TournamentModel,
                             full_limit: int = FULL_SUBSET_LIMIT) -> BoundVerdict:
    """Check that every subset S scores at least the points played within S.

    All subsets are tried when n <= ``full_limit``; otherwise only the
    prefixes of the players sorted by score.  The grand total must equal the
    total points of the tournament.  The first failing subset is reported
    (smallest size first, then lexicographic).
    """
    scores = [int(s) for s in scores]
    n = model.n
    if len(scores) != n:
        raise ValueError(f"need {n} scores, got {len(scores)}")
    expected = model.total_points
    total = sum(scores)
    if n <= full_limit:
        for size in range(1, n):
            for subset in combinations(range(n), size):
                got = sum(scores[i] for i in subset)
                need = _inner_points(model, subset)
                if got < need:
                    return BoundVerdict(False, total, expected, subset, got, need)
    else:
        order = np.argsort(scores, kind="stable")
        ms = model.m_matrix()[np.ix_(order, order)]
        need = np.cumsum(np.triu(ms, 1).sum(axis=0))
        got = np.cumsum(np.asarray(scores, dtype=np.int64)[order])
        bad = np.flatnonzero(got[:-1] < need[:-1])
        if bad.size:
            size = int(bad[0]) + 1
            subset = tuple(sorted(int(i) for i in order[:size]))
            return BoundVerdict(False, total, expected, subset, int(got[size - 1]),
                                int(need[size - 1]))
    return BoundVerdict(total == expected, total, expected)
