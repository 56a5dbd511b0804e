"""Minimax rate table: figure-caption anchors, exact scaling identities, and
sweep/CSV plumbing."""

import csv
import math

import pytest

from dperm.privacy import pure_to_gdp
from dperm.rates import RateQuery, excess_risk_rate, sweep, write_sweep_csv


def figure_query(regime="pure", n=1e4, **kw):
    return RateQuery(regime=regime, d=11, n=n, lipschitz=300.0, strong_convexity=4.0,
                     epsilon=kw.pop("epsilon", 1.0), **kw)


class TestAnchors:
    def test_pure_ten_thousand(self):
        assert excess_risk_rate(figure_query()) == pytest.approx(272.25, rel=1e-12)

    def test_pure_million(self):
        assert excess_risk_rate(figure_query(n=1e6)) == pytest.approx(2.7225, rel=1e-12)

    def test_gdp_at_converted_unit_budget(self):
        mu = pure_to_gdp(1.0)
        q = RateQuery(regime="gdp", d=11, n=1e4, lipschitz=300.0, strong_convexity=4.0, mu=mu)
        got = excess_risk_rate(q)
        assert got == pytest.approx(11 * 300.0**2 / (4.0 * 1e4 * mu * mu), rel=1e-12)
        assert got == pytest.approx(16.30, abs=0.01)


class TestScalingIdentities:
    def test_exact_input_scalings(self):
        base = figure_query()
        r = excess_risk_rate(base)
        import dataclasses

        assert excess_risk_rate(dataclasses.replace(base, n=2e4)) == pytest.approx(r / 2, rel=1e-14)
        assert excess_risk_rate(dataclasses.replace(base, lipschitz=600.0)) == pytest.approx(4 * r, rel=1e-14)
        assert excess_risk_rate(dataclasses.replace(base, strong_convexity=8.0)) == pytest.approx(r / 2, rel=1e-14)
        assert excess_risk_rate(dataclasses.replace(base, epsilon=2.0)) == pytest.approx(r / 4, rel=1e-14)

    def test_gdp_budget_scaling(self):
        q = RateQuery(regime="gdp", d=3, n=500, lipschitz=2.0, strong_convexity=1.0, mu=1.0)
        import dataclasses

        r = excess_risk_rate(q)
        assert excess_risk_rate(dataclasses.replace(q, mu=2.0)) == pytest.approx(r / 4, rel=1e-14)

    def test_pure_to_gdp_rate_ratio(self):
        # pure / gdp = d mu^2 / eps^2 exactly, for any shared instance
        for d, eps, mu in ((3, 1.0, 2.0), (11, 0.5, 1.7), (1, 4.0, 0.3)):
            pure = excess_risk_rate(RateQuery("pure", d, 1000, 5.0, 2.0, epsilon=eps))
            gdp = excess_risk_rate(RateQuery("gdp", d, 1000, 5.0, 2.0, mu=mu))
            assert pure / gdp == pytest.approx(d * mu * mu / (eps * eps), rel=1e-12)

    def test_approx_log_delta_factor(self):
        lo = excess_risk_rate(RateQuery("approx", 2, 100, 1.0, 1.0, epsilon=1.0,
                                        delta=math.exp(-1.0)))
        hi = excess_risk_rate(RateQuery("approx", 2, 100, 1.0, 1.0, epsilon=1.0,
                                        delta=math.exp(-2.0)))
        assert hi == pytest.approx(2.0 * lo, rel=1e-14)

    def test_approx_delta_defaults_to_one_over_n(self):
        implicit = excess_risk_rate(RateQuery("approx", 2, 100, 1.0, 1.0, epsilon=1.0))
        explicit = excess_risk_rate(RateQuery("approx", 2, 100, 1.0, 1.0, epsilon=1.0,
                                              delta=0.01))
        assert implicit == pytest.approx(explicit, rel=1e-14)


class TestValidation:
    def test_query_domain(self):
        with pytest.raises(ValueError):
            RateQuery("exotic", 2, 100, 1.0, 1.0, epsilon=1.0)
        with pytest.raises(ValueError):
            RateQuery("pure", 0, 100, 1.0, 1.0, epsilon=1.0)
        with pytest.raises(ValueError):
            RateQuery("pure", 2, 0, 1.0, 1.0, epsilon=1.0)
        with pytest.raises(ValueError):
            RateQuery("pure", 2, 100, 0.0, 1.0, epsilon=1.0)

    def test_missing_budget_rejected(self):
        with pytest.raises(ValueError):
            excess_risk_rate(RateQuery("pure", 2, 100, 1.0, 1.0))
        with pytest.raises(ValueError):
            excess_risk_rate(RateQuery("gdp", 2, 100, 1.0, 1.0, epsilon=1.0))
        with pytest.raises(ValueError):
            excess_risk_rate(RateQuery("approx", 2, 100, 1.0, 1.0, mu=1.0))
        with pytest.raises(ValueError):
            excess_risk_rate(RateQuery("approx", 2, 100, 1.0, 1.0, epsilon=1.0, delta=1.5))


class TestSweep:
    def test_single_point_matches_direct_evaluation(self):
        q = figure_query()
        rows = sweep(q, "n", [1e4])
        assert rows == [(1e4, "pure", excess_risk_rate(q))]

    def test_monotone_decreasing_in_n(self):
        for regime, kw in (("pure", {"epsilon": 1.0}), ("gdp", {"mu": 1.0}),
                           ("approx", {"epsilon": 1.0, "delta": 1e-5})):
            q = RateQuery(regime, 11, 1e4, 300.0, 4.0, **kw)
            rates = [r for _, _, r in sweep(q, "n", [1e3, 1e4, 1e5, 1e6])]
            assert all(b < a for a, b in zip(rates, rates[1:]))

    def test_pure_gdp_ratio_constant_in_n(self):
        pure_q = figure_query()
        mu = pure_to_gdp(1.0)
        gdp_q = RateQuery("gdp", 11, 1e4, 300.0, 4.0, mu=mu)
        ns = [1e3, 1e4, 1e5, 1e6]
        ratio = [p / g for (_, _, p), (_, _, g) in
                 zip(sweep(pure_q, "n", ns), sweep(gdp_q, "n", ns))]
        assert all(x == pytest.approx(11 * mu * mu, rel=1e-12) for x in ratio)

    def test_dimension_axis_casts_to_int(self):
        rows = sweep(figure_query(), "d", [2, 5])
        assert rows[0][2] == pytest.approx(
            excess_risk_rate(RateQuery("pure", 2, 1e4, 300.0, 4.0, epsilon=1.0)), rel=1e-14)

    def test_unknown_axis(self):
        with pytest.raises(ValueError):
            sweep(figure_query(), "alpha", [1.0])

    def test_csv_round_trip(self, tmp_path):
        rows = sweep(figure_query(), "n", [1e4, 123456.789])
        path = tmp_path / "rates.csv"
        write_sweep_csv(rows, path)
        with open(path, newline="") as fh:
            got = list(csv.reader(fh))
        assert got[0] == ["axis_value", "regime", "rate"]
        for (axis_value, regime, rate), row in zip(rows, got[1:]):
            assert float(row[0]) == axis_value
            assert row[1] == regime
            assert float(row[2]) == rate
