import math

import numpy as np
import pytest

from conftest import default_run
from rrtourney.model import (
    ModelError,
    ModelFamily,
    OutcomePmf,
    TournamentModel,
    model_moments,
    preset,
    uniform_pmf,
)
from rrtourney.montecarlo import (
    DEFAULT_GRID,
    DEFAULT_SEED,
    PropertyViolation,
    deviation_cdf,
    run_convergence,
    sample_scores,
    sample_tournament,
    trial_stream,
)
import rrtourney.montecarlo as mc

# chi-square distance of s_1 against Bin(9, 1/2): binary n=10, 10^5 trials,
# seed DEFAULT_SEED; recorded on the first verified run
CHI2_BASELINE = 7.7930463492063495
# abs_dev_mean on the default grid for the binary preset, first verified run
BINARY_ABS_DEV = (0.5900, 0.5707, 0.5314, 0.4976)


class TestSampling:
    def test_two_players(self):
        model = preset("binary", 2)
        for t in range(50):
            out = sample_tournament(model, trial_stream(1, 2, t))
            assert sorted(out.scores.tolist()) == [0, 1]
            assert out.max_score == 1
            assert out.normalized_max == 1.0

    def test_consumes_one_uniform_per_pair(self):
        model = preset("uniform", 6, m=3)
        rng = trial_stream(3, 6, 0)
        sample_tournament(model, rng)
        ref = trial_stream(3, 6, 0)
        ref.random(15)
        assert rng.random() == ref.random()

    def test_reproducible(self):
        model = preset("chess", 7, p="1/3")
        a = sample_tournament(model, trial_stream(5, 7, 11))
        b = sample_tournament(model, trial_stream(5, 7, 11))
        assert np.array_equal(a.scores, b.scores)

    def test_conservation_and_max(self):
        model = TournamentModel.from_pairs(5, {(0, 1): uniform_pmf(3), (2, 4): uniform_pmf(2)},
                                           default=OutcomePmf.of(["1/3", "2/3"]))
        S = sample_scores(model, 2000, seed=8)
        assert np.all(S.sum(axis=1) == model.total_points)
        assert np.all(S.max(axis=1) >= np.ceil(S.mean(axis=1)))
        assert np.all(S <= model.max_scores)

    def test_chi_square_against_binomial(self):
        S = sample_scores(preset("binary", 10), 100_000, DEFAULT_SEED)[:, 0]
        obs = np.bincount(S, minlength=10)
        exp = np.array([math.comb(9, k) for k in range(10)]) / 2**9 * 100_000
        chi2 = float(((obs - exp) ** 2 / exp).sum())
        assert chi2 <= CHI2_BASELINE + 1e-9
        assert chi2 < 27.88  # 0.999 quantile of chi-square with 9 degrees of freedom

    @pytest.mark.parametrize("model", [
        preset("chess", 4, p="1/4"),
        TournamentModel.from_pairs(3, {(0, 1): OutcomePmf.of(["1/10", "3/10", "3/5"])},
                                   default=uniform_pmf(1)),
    ], ids=["chess", "mixed"])
    def test_moments_bridge(self, model):
        trials = 1_000_000
        S = sample_scores(model, trials, seed=17).astype(np.float64)
        mom = model_moments(model)
        for i in range(model.n):
            mean, var = float(mom.means[i]), float(mom.variances[i])
            assert abs(S[:, i].mean() - mean) <= 4 * math.sqrt(var / trials)
            # fourth central moment for the standard error of the sample variance
            m4 = float(np.mean((S[:, i] - mean) ** 4))
            assert abs(S[:, i].var() - var) <= 4 * math.sqrt((m4 - var**2) / trials)


class TestConvergence:
    def test_workers_do_not_change_results(self):
        fam = ModelFamily.of("uniform", m=2)
        one = run_convergence(fam, grid=(12, 30), trials=120, seed=4, workers=1)
        two = run_convergence(fam, grid=(12, 30), trials=120, seed=4, workers=2)
        for a, b in zip(one, two):
            assert np.array_equal(a.values, b.values)
            assert a.statistics() == b.statistics()

    def test_rerun_identical(self):
        fam = ModelFamily.of("binary")
        a = run_convergence(fam, grid=(20,), trials=100, seed=1)[0]
        b = run_convergence(fam, grid=(20,), trials=100, seed=1)[0]
        assert a.statistics() == b.statistics()

    def test_report_invariants(self):
        rep = run_convergence(ModelFamily.of("chess", p="1/4"), grid=(40,), trials=300)[0]
        qs = list(rep.quantiles.values())
        assert qs == sorted(qs)
        assert 0 <= rep.coverage <= 1 and 0 <= rep.unique_max_fraction <= 1
        assert rep.normalization == "common"

    def test_per_player_normalisation(self):
        model = TournamentModel.from_pairs(6, {(0, 1): uniform_pmf(3)}, default=uniform_pmf(1))
        rep = run_convergence(model, grid=(6,), trials=100)[0]
        assert rep.normalization == "per-player"

    def test_small_n_has_no_band(self):
        rep = run_convergence(ModelFamily.of("binary"), grid=(3,), trials=100)[0]
        assert rep.coverage is None and rep.x_plus is None

    def test_errors(self):
        with pytest.raises(ModelError):
            run_convergence(preset("binary", 5), grid=(6,), trials=10)
        with pytest.raises(ModelError):
            run_convergence(TournamentModel.homogeneous(5, OutcomePmf.of(["0", "1", "0"])),
                            grid=(5,), trials=10)
        with pytest.raises(ValueError):
            run_convergence(ModelFamily.of("binary"), grid=(5,), trials=0)

    def test_violation_is_reported(self, monkeypatch):
        class Broken(mc._Sampler):
            def scores(self, rng):
                return super().scores(rng) + 1

        model = preset("binary", 6)
        model.__dict__["_mc_plan"] = {"plan": (Broken(model), mc._Normalizer(model))}
        with pytest.raises(PropertyViolation):
            run_convergence(model, grid=(6,), trials=5)

    def test_deviation_cdf_limits(self):
        rep = run_convergence(ModelFamily.of("binary"), grid=(30,), trials=200)[0]
        assert deviation_cdf(rep, 0.0) == 1.0
        assert deviation_cdf(rep, 1e9) == 0.0


class TestDefaultGrid:
    """Fixed-seed regression properties on the default n-grid."""

    def test_binary_baseline(self):
        reports = default_run("ex2")
        assert tuple(r.n for r in reports) == DEFAULT_GRID
        got = [r.abs_dev_mean for r in reports]
        assert np.allclose(got, BINARY_ABS_DEV, atol=5e-5)
        assert all(b < a for a, b in zip(got, got[1:]))

    @pytest.mark.parametrize("example", [
        "ex2", "ex3",
        pytest.param("ex1", marks=pytest.mark.xfail(
            strict=True, reason="uniform m=2 coverage drops from n=50 to n=200 "
                                "(0.375 vs 0.359 over 20000 trials)")),
    ])
    def test_coverage_nondecreasing(self, example):
        cov = [r.coverage for r in default_run(example)]
        assert all(b >= a for a, b in zip(cov, cov[1:])), cov

    def test_chess_mean_max(self):
        for r in default_run("ex3"):
            assert r.mean_max_score >= (r.n - 1) / 2

    def test_deviation_shrinks(self):
        reports = default_run("ex2")
        assert deviation_cdf(reports[-1], 0.75) < deviation_cdf(reports[0], 0.75)
