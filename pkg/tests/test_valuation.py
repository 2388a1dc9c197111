import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from epivalue.errors import CountryMismatch, InvariantViolation, NonPositiveGDP, NonPositiveIncome
from epivalue.valuation import (
    ValuationParams,
    ValuationResult,
    contraction_mortality,
    marginal_value,
    transfer_vsl,
    value_mortality,
    welfare_loss_pct_gdp,
)


def params(base=9.6e6, ref=65000.0, eta=1.0, floor=0.0):
    return ValuationParams(
        base_vsl_usd=base, reference_income_usd=ref, income_elasticity=eta, vsl_floor_usd=floor
    )


class TestTransferVsl:
    def test_identity_at_reference_income(self):
        p = params()
        assert transfer_vsl(p, 65000.0) == 9.6e6

    def test_linear_when_eta_one(self):
        p = params(eta=1.0)
        assert transfer_vsl(p, 6500.0) == pytest.approx(0.1 * 9.6e6, rel=1e-12)

    def test_power_law_eta_1_5(self):
        # independent evaluation: exp(1.5 * ln(0.25)) * 10e6 = 1.25e6
        p = params(base=10e6, ref=40000.0, eta=1.5)
        expected = 10e6 * math.exp(1.5 * math.log(0.25))
        assert expected == pytest.approx(1.25e6, rel=1e-12)
        assert transfer_vsl(p, 10000.0) == pytest.approx(expected, rel=1e-12)

    def test_floor_binds_only_below(self):
        p = params(floor=2e6)
        assert transfer_vsl(p, 650.0) == 2e6  # power-law value would be 96k
        assert transfer_vsl(p, 65000.0) == 9.6e6

    def test_nonpositive_income_rejected(self):
        with pytest.raises(NonPositiveIncome):
            transfer_vsl(params(), 0.0)

    @given(incomes=st.lists(st.floats(1.0, 1e6), min_size=2, max_size=10), eta=st.floats(0, 3))
    def test_monotone_in_income(self, incomes, eta):
        p = params(eta=eta)
        values = [transfer_vsl(p, inc) for inc in sorted(incomes)]
        assert all(a <= b + 1e-9 for a, b in zip(values, values[1:]))

    def test_params_validation(self):
        with pytest.raises(InvariantViolation):
            ValuationParams(base_vsl_usd=0.0, reference_income_usd=1.0)
        with pytest.raises(InvariantViolation):
            ValuationParams(base_vsl_usd=1.0, reference_income_usd=1.0, income_elasticity=-1.0)


class TestValueMortality:
    def test_cross_check_against_published_us_aggregate(self):
        # 1.76M lives at a ~4.49M USD value per life gives ~7.9T total
        implied_vsl = 7.9e12 / 1.76e6
        assert implied_vsl == pytest.approx(4.49e6, rel=0.01)
        assert value_mortality(1.76e6, implied_vsl) == pytest.approx(7.9e12, rel=1e-12)

    def test_zero_deaths(self):
        assert value_mortality(0.0, 5e6) == 0.0

    def test_plain_product(self):
        assert value_mortality(100.0, 2e6) == 2e8

    def test_negative_rejected(self):
        with pytest.raises(InvariantViolation):
            value_mortality(-1.0, 1.0)


class TestWelfareLossPctGdp:
    def test_130_percent(self):
        assert welfare_loss_pct_gdp(1.3 * 21e12, 21e12) == pytest.approx(130.0)

    def test_zero_loss(self):
        assert welfare_loss_pct_gdp(0.0, 1e12) == 0.0

    def test_55_percent(self):
        assert welfare_loss_pct_gdp(0.55 * 3e11, 3e11) == pytest.approx(55.0)

    def test_nonpositive_gdp_rejected(self):
        with pytest.raises(NonPositiveGDP):
            welfare_loss_pct_gdp(1.0, 0.0)


def result(iso3="XUS", scenario="social_distancing", deaths=0.0, loss=0.0):
    return ValuationResult(
        country_id=iso3,
        scenario=scenario,
        total_deaths=deaths,
        vsl_usd=1.0,
        vsl_loss_usd=loss,
        loss_pct_gdp=0.0,
        marginal_value_pct_gdp=0.0,
    )


class TestMarginalValue:
    def test_identical_scenario_is_zero(self):
        unmit = result(scenario="unmitigated", loss=5e11)
        same = result(scenario="social_distancing", loss=5e11)
        assert marginal_value(same, unmit, 1e12) == 0.0

    def test_sign_and_magnitude(self):
        unmit = result(scenario="unmitigated", loss=13e12)
        dist = result(loss=13e12 - 0.62 * 21e12)
        assert marginal_value(dist, unmit, 21e12) == pytest.approx(62.0)

    def test_negative_when_scenario_worse(self):
        unmit = result(scenario="unmitigated", loss=1e10)
        worse = result(loss=2e10)
        assert marginal_value(worse, unmit, 1e11) < 0

    def test_country_mismatch_rejected(self):
        with pytest.raises(CountryMismatch):
            marginal_value(result(iso3="XUS"), result(iso3="XBD", scenario="unmitigated"), 1e12)

    @given(k=st.floats(0.01, 100.0))
    def test_scaling_base_vsl_scales_values_but_not_ranking(self, k):
        # deaths fixed; VSL scaling by k scales every loss and margin by k
        deaths = {"unmitigated": 1000.0, "a": 400.0, "b": 250.0, "c": 900.0}
        gdp = 1e12

        def margins(vsl):
            losses = {s: value_mortality(d, vsl) for s, d in deaths.items()}
            unmit = result(scenario="unmitigated", loss=losses["unmitigated"])
            return {
                s: marginal_value(result(scenario=s, loss=losses[s]), unmit, gdp)
                for s in ("a", "b", "c")
            }

        base = margins(2e6)
        scaled = margins(2e6 * k)
        for s in base:
            assert scaled[s] == pytest.approx(k * base[s], rel=1e-9)
        rank = lambda m: sorted(m, key=m.get)
        assert rank(base) == rank(scaled)


class TestContractionMortality:
    def test_published_coefficient_range(self):
        assert contraction_mortality(1.0, 1000.0) == (0.24, 0.40)

    def test_zero_shock(self):
        assert contraction_mortality(0.0, 5e6) == (0.0, 0.0)

    def test_linear_scaling(self):
        low, high = contraction_mortality(5.0, 3e6)
        assert low == pytest.approx(3600.0)
        assert high == pytest.approx(6000.0)

    @given(shock=st.floats(0, 50), births=st.floats(0, 1e8))
    def test_low_never_exceeds_high_and_linearity(self, shock, births):
        low, high = contraction_mortality(shock, births)
        assert low <= high
        low2, high2 = contraction_mortality(2 * shock, births)
        assert low2 == pytest.approx(2 * low, rel=1e-12, abs=1e-9)
        assert high2 == pytest.approx(2 * high, rel=1e-12, abs=1e-9)

    def test_negative_rejected(self):
        with pytest.raises(InvariantViolation):
            contraction_mortality(-1.0, 100.0)
