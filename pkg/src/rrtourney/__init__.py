"""Negative lower orthant dependence and maximal scores in round-robin tournaments."""

from rrtourney.model import (
    ModelError,
    ModelFamily,
    Moments,
    OutcomePmf,
    TournamentModel,
    model_moments,
    pmf_moments,
    preset,
    reverse_pmf,
)

__version__ = "0.1.0"
