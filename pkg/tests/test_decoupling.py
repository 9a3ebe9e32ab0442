import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import pmfs
from rrtourney.exact import (
    BudgetExceeded,
    DecouplingTable,
    assertion1_check,
    chain_is_monotone,
    decoupling_chain,
    joint_cdf_enumerate,
    p_uv_table,
    prefix_q,
    w_closed_form,
    w_table,
)
from rrtourney.model import OutcomePmf, TournamentModel, preset, uniform_pmf

HALF = OutcomePmf.of(["1/2", "1/2"])


def brute_hybrid(model, k, t_decoupled):
    """F_t by walking every outcome; the first t pairs get independent halves."""
    pairs = list(model.pairs())
    axes = []
    for t, (i, j) in enumerate(pairs):
        p = model.pmf(i, j).probs
        m = len(p) - 1
        if t < t_decoupled:
            axes.append([((i, u), (j, v), p[u] * p[m - v])
                         for u in range(m + 1) for v in range(m + 1)])
        else:
            axes.append([((i, u), (j, m - u), p[u]) for u in range(m + 1)])
    total = Fraction(0)
    for combo in itertools.product(*axes):
        scores = [0] * model.n
        prob = Fraction(1)
        for (i, u), (j, v), w in combo:
            scores[i] += u
            scores[j] += v
            prob *= w
        if all(s <= kk for s, kk in zip(scores, k)):
            total += prob
    return total


class TestPuv:
    def test_fair_coin(self):
        P = p_uv_table(HALF)
        q = Fraction(1, 4)
        assert P.tolist() == [[q, -q], [-q, q]]

    def test_point_mass_is_zero(self):
        P = p_uv_table(OutcomePmf.of(["0", "0", "1"]))
        assert all(x == 0 for x in P.ravel())

    @given(pmfs())
    def test_margins_vanish(self, pmf):
        P = p_uv_table(pmf)
        assert all(x == 0 for x in P.sum(axis=0))
        assert all(x == 0 for x in P.sum(axis=1))

    @given(pmfs(exact=False))
    def test_margins_vanish_float(self, pmf):
        P = p_uv_table(pmf)
        assert np.abs(P.sum(axis=0)).max() <= 1e-15
        assert np.abs(P.sum(axis=1)).max() <= 1e-15


class TestW:
    def test_fair_coin(self):
        W = w_table(HALF, 1, 1)
        assert W.tolist() == [[Fraction(1, 4), 0], [0, 0]]
        assert w_closed_form(HALF, 0, 0) == Fraction(1, 4)

    def test_uniform_m2(self):
        u = uniform_pmf(2)
        assert w_table(u, 0, 1)[0, 1] == Fraction(2, 9)
        assert w_closed_form(u, 0, 1) == Fraction(2, 9)
        assert w_closed_form(u, 1, 1) == Fraction(1, 9)
        assert w_closed_form(u, 5, 0) == 0

    def test_prefix_q(self):
        assert prefix_q(uniform_pmf(2)) == (Fraction(1, 3), Fraction(2, 3), Fraction(1))

    def test_negative_index_rejected(self):
        with pytest.raises(ValueError):
            w_table(HALF, -1, 0)
        with pytest.raises(ValueError):
            w_closed_form(HALF, 0, -2)

    @settings(max_examples=300)
    @given(pmfs())
    def test_closed_form_exact(self, pmf):
        m = pmf.m
        W = w_table(pmf, m + 2, m + 2)
        for g in range(m + 3):
            for h in range(m + 3):
                assert W[g, h] == w_closed_form(pmf, g, h)
                assert W[g, h] >= 0
        assert all(W[m, h] == 0 for h in range(m + 1))
        assert all(W[g, m] == 0 for g in range(m + 1))

    def test_closed_form_float_random(self, rng):
        worst = 0.0
        for _ in range(1000):
            m = int(rng.integers(1, 7))
            pmf = OutcomePmf(tuple(rng.dirichlet(np.ones(m + 1)).tolist()))
            W = w_table(pmf, m + 1, m + 1)
            cf = np.array([[w_closed_form(pmf, g, h) for h in range(m + 2)]
                           for g in range(m + 2)])
            assert np.abs(W - cf).max() <= 1e-12
            worst = min(worst, W.min())
        assert worst >= -1e-15

    def test_table_bundle(self):
        t = DecouplingTable.build(uniform_pmf(2), 2, 2)
        assert t.m == 2 and t.W.shape == (3, 3) and t.Q[-1] == 1


class TestChain:
    def test_two_players(self):
        rep = decoupling_chain(preset("binary", 2), (0, 0))
        assert rep.chain == (0, Fraction(1, 4))

    def test_binary_three(self):
        rep = decoupling_chain(preset("binary", 3), (1, 1, 1))
        assert rep.chain[0] == Fraction(1, 4) and rep.chain[-1] == Fraction(27, 64)
        assert chain_is_monotone(rep.chain, 0)

    def test_maximum_thresholds(self):
        model = preset("uniform", 3, m=2)
        assert set(decoupling_chain(model, (4, 4, 4)).chain) == {1}

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            decoupling_chain(preset("uniform", 4, m=6), (9,) * 4, budget=10_000)

    @pytest.mark.parametrize("name,n,params,k", [
        ("binary", 3, {}, (1, 1, 0)),
        ("uniform", 3, {"m": 2}, (2, 1, 3)),
        ("chess", 3, {"p": "1/3"}, (2, 2, 2)),
        ("binary", 4, {}, (2, 1, 2, 1)),
    ])
    def test_against_brute_force(self, name, n, params, k):
        model = preset(name, n, **params)
        rep = decoupling_chain(model, k)
        for t, value in enumerate(rep.chain):
            assert value == brute_hybrid(model, k, t)
        assert rep.chain[0] == joint_cdf_enumerate(model, k).joint
        assert rep.chain[-1] == rep.product

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 4), st.data())
    def test_monotone_to_product(self, n, data):
        pmf = data.draw(pmfs(m_max=3 if n == 4 else 5))
        model = TournamentModel.homogeneous(n, pmf)
        k = tuple(data.draw(st.integers(0, int(M))) for M in model.max_scores)
        for exact in (True, False):
            rep = decoupling_chain(model if exact else model.as_float(), k)
            assert chain_is_monotone(rep.chain, 0 if exact else 1e-12)
            assert abs(rep.chain[-1] - rep.product) <= (0 if exact else 1e-12)

    def test_strict(self):
        model = preset("binary", 3)
        assert decoupling_chain(model, (2, 2, 2), strict=True).chain == \
            decoupling_chain(model, (1, 1, 1)).chain


class TestAssertion1:
    def test_two_players(self):
        pmf = OutcomePmf.of(["1/6", "1/2", "1/3"])
        model = TournamentModel.homogeneous(2, pmf)
        for k1 in range(3):
            for k2 in range(3):
                a = assertion1_check(model, k1, k2)
                assert a.lhs == a.rhs == w_closed_form(pmf, k1, k2)

    def test_binary_three(self):
        model = preset("binary", 3)
        a = assertion1_check(model, 1, 1)
        k = (1, 1, 2)
        assert a.lhs == brute_hybrid(model, k, 1) - brute_hybrid(model, k, 0)
        assert a.lhs == a.rhs

    def test_uniform_four(self):
        a = assertion1_check(preset("uniform", 4, m=2), 2, 2)
        assert a.lhs == a.rhs == Fraction(37, 729)
        f = assertion1_check(preset("uniform", 4, m=2).as_float(), 2, 2)
        assert f.error <= 1e-12

    def test_other_players(self):
        model = TournamentModel.from_pairs(4, {(1, 3): OutcomePmf.of(["1/5", "3/5", "1/5"])},
                                           default=uniform_pmf(1))
        a = assertion1_check(model, 2, 1, players=(3, 1))
        assert a.lhs == a.rhs

    def test_rejects_same_player(self):
        with pytest.raises(ValueError):
            assertion1_check(preset("binary", 3), 1, 1, players=(1, 1))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 4), pmfs(), st.data())
    def test_identity(self, n, pmf, data):
        model = TournamentModel.homogeneous(n, pmf)
        M = int(model.max_scores[0])
        k1, k2 = data.draw(st.integers(0, M)), data.draw(st.integers(0, M))
        a = assertion1_check(model, k1, k2)
        assert a.lhs == a.rhs
        assert assertion1_check(model.as_float(), k1, k2).error <= 1e-12
