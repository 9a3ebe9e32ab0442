import math

import mpmath
import numpy as np
import pytest

from rrtourney.asymptotics import (
    BoundConstants,
    bound_table,
    cramer_tail_table,
    mills_ratio_check,
    moment_center,
    normal_cdf,
    normal_pdf,
    normal_sf,
    predicted_center,
    tail_bounds,
    thresholds,
)
from rrtourney.model import ModelError, ex7_constant, model_moments, preset

ORACLE_POINTS = [-8, -6.5, -5, -4, -3.3, -2.5, -1.96, -1.2, -0.6, -0.1,
                 0, 0.25, 0.8, 1.5, 2, 3, 3.7, 4.5, 6, 8]


def series_cdf(x):
    """Phi from the Maclaurin series of erf at 80 digits (no erfc involved)."""
    with mpmath.workdps(80):
        z = mpmath.mpf(x) / mpmath.sqrt(2)
        term, total, k = z, z, 0
        while abs(term) > mpmath.mpf(10) ** -70:
            k += 1
            term *= -z * z / k
            total += term / (2 * k + 1)
        return 0.5 + total / mpmath.sqrt(mpmath.pi)


class TestNormal:
    @pytest.mark.parametrize("x", ORACLE_POINTS)
    def test_cdf_against_series(self, x):
        assert abs(normal_cdf(x) - float(series_cdf(x))) <= 1e-10

    def test_simple_values(self):
        assert normal_cdf(0) == 0.5
        assert normal_pdf(0) == pytest.approx(0.3989422804014327, rel=1e-15)
        assert abs(normal_sf(3) - 1.3499e-3) <= 1e-7

    @pytest.mark.parametrize("x", np.linspace(0, 8, 33))
    def test_symmetry(self, x):
        assert abs(normal_cdf(x) + normal_cdf(-x) - 1) <= 1e-14


class TestMills:
    def test_reference_points(self):
        assert mills_ratio_check(3).rel_err == pytest.approx(0.086, abs=5e-4)
        assert mills_ratio_check(3).rel_err <= 0.10
        five = mills_ratio_check(5)
        assert five.rel_err == pytest.approx(0.036, abs=5e-4)
        assert five.tail == pytest.approx(2.8665e-7, rel=1e-4)
        assert five.approx == pytest.approx(2.9734e-7, rel=1e-4)

    def test_monotone(self):
        errs = [mills_ratio_check(x).rel_err for x in np.arange(2, 8.01, 0.5)]
        assert all(b < a for a, b in zip(errs, errs[1:]))

    def test_domain(self):
        with pytest.raises(ValueError):
            mills_ratio_check(0)


class TestThresholds:
    def test_reference(self):
        t = thresholds(101, 0.1)
        with mpmath.workdps(40):
            a = 2 * mpmath.log(100)
            b = mpmath.log(mpmath.log(100))
            assert abs(t.x_minus - float(mpmath.sqrt(a - mpmath.mpf("0.9") * b))) <= 1e-14
            assert abs(t.x_plus - float(mpmath.sqrt(a - mpmath.mpf("1.1") * b))) <= 1e-14
        assert abs(t.x_minus - 2.799264) <= 1e-5
        assert abs(t.x_plus - 2.744165) <= 1e-5

    def test_zero_width(self):
        t = thresholds(50, 0)
        assert t.x_minus == t.x_plus

    @pytest.mark.parametrize("n", [5, 100, 10**4, 10**8])
    def test_ordering(self, n):
        t = thresholds(n, 0.5)
        assert t.x_plus <= t.x_minus < t.center

    def test_ratio_limit(self):
        t = thresholds(10**9, 1.0)
        assert abs(t.x_minus / t.center - 1) <= 1e-3

    def test_domain(self):
        with pytest.raises(ValueError):
            thresholds(3, 0.5)
        with pytest.raises(ValueError):
            thresholds(4, 100)


class TestBounds:
    def test_decreasing(self):
        rows = bound_table([10, 10**2, 10**3, 10**4, 10**5], 1.0)
        for key in ("lhs_bound", "rhs_bound"):
            vals = [r[key] for r in rows]
            assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_epsilon_zero_does_not_vanish(self):
        n = 10**6
        lhs, _ = tail_bounds(n, 0.0)
        assert lhs == pytest.approx(n * 0.3 / (n - 1))

    @pytest.mark.parametrize("cp,cpp", [(0.27, 0.25), (0.3, 0.29), (0.3, 0.0)])
    def test_constant_ordering(self, cp, cpp):
        with pytest.raises(ValueError):
            BoundConstants(c_prime=cp, c_double_prime=cpp)


CENTERED = [
    ("ex1", {"m": 2}), ("ex1", {"m": 5}),
    ("ex2", {"m": 1}), ("ex2", {"m": 4}),
    ("ex3", {"p": "1/4"}), ("ex3", {"p": "1/2"}), ("ex3", {"p": "3/4"}),
    ("ex4", {"ps": ["1/3", "1/5", "2/7"]}), ("ex4", {"m": 3, "ps": ["1/4"]}),
    ("ex6", {"m": 2}), ("ex6", {"m": 6}),
    ("ex7", {}),
]


class TestCenters:
    @pytest.mark.parametrize("example,params", CENTERED)
    @pytest.mark.parametrize("n", [5, 50, 500])
    def test_matches_moments(self, example, params, n):
        pred = predicted_center(example, n, **params)
        assert abs(pred.center - moment_center(preset(example, n, **params))) <= 1e-10

    @pytest.mark.parametrize("n", [6, 51, 501])
    def test_three_class(self, n):
        params = {"mw": 2, "mb": 3, "p": "3/4"}
        pred = predicted_center("ex5", n, **params)
        assert abs(pred.center - moment_center(preset("ex5", n, **params))) <= 1e-10

    def test_uniform_display(self):
        n, m = 40, 2
        pred = predicted_center("ex1", n, m=m)
        assert pred.center - (n - 1) * m / 2 == pytest.approx(
            math.sqrt((n - 1) * math.log(n - 1) * m * (m + 2) / 6), rel=1e-14)

    def test_ex7_two_players(self):
        assert predicted_center("ex7", 2).center == 2

    def test_ex7_printed_coefficient(self):
        L = ex7_constant()
        assert abs(4 * (L**2 + 4 * L**3) - 2.1452936) <= 1e-6

    def test_triangular_coefficient(self):
        n = 30
        pred = predicted_center("ex6", n, m=4)
        assert pred.fluctuation_term ** 2 == pytest.approx(
            (n - 1) * math.log(n - 1) * 4 * 8 / 12, rel=1e-13)

    def test_errors(self):
        with pytest.raises(ModelError):
            predicted_center("ex9", 10)
        with pytest.raises(ModelError):
            predicted_center("ex5", 10)


class TestCramer:
    def test_table_shape(self):
        rows = cramer_tail_table(preset("binary", 200), epsilon=1.0)
        assert [r["point"] for r in rows] == ["x_plus", "x_minus"]
        for r in rows:
            assert 0 < r["exact_tail"] < 1 and r["tail_ratio"] > 0
            assert r["normal_tail"] == normal_sf(r["x"])

    def test_degenerate(self):
        from rrtourney.model import OutcomePmf, TournamentModel
        model = TournamentModel.homogeneous(6, OutcomePmf.of(["0", "1", "0"]))
        assert model_moments(model).variance == 0
        with pytest.raises(ModelError):
            cramer_tail_table(model)
