"""Convert scenario mortality into welfare losses and GDP-relative metrics.

The value of statistical life (VSL) for each country is obtained by benefit
transfer from a reference country: VSL_c = base_vsl * (income_c / income_ref)^eta,
optionally floored. A single country-level VSL applies uniformly across ages.
Deaths are valued at horizon end without discounting.

The economic-contraction side effect is a cross-country coefficient range:
each 1% of GDP contraction adds between 0.24 and 0.40 infant deaths per
1,000 births.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CountryMismatch, InvariantViolation, NonPositiveGDP, NonPositiveIncome

#: Excess infant deaths per 1,000 births per 1% GDP contraction (low, high).
CONTRACTION_COEFFS_PER_1000 = (0.24, 0.40)


@dataclass(frozen=True)
class ValuationParams:
    """Benefit-transfer parameters for country-level VSL."""

    base_vsl_usd: float
    reference_income_usd: float
    income_elasticity: float = 1.0
    vsl_floor_usd: float = 0.0

    def __post_init__(self):
        if self.base_vsl_usd <= 0:
            raise InvariantViolation("base_vsl_usd must be positive")
        if self.reference_income_usd <= 0:
            raise InvariantViolation("reference_income_usd must be positive")
        if self.income_elasticity < 0:
            raise InvariantViolation("income_elasticity must be >= 0")
        if self.vsl_floor_usd < 0:
            raise InvariantViolation("vsl_floor_usd must be >= 0")


@dataclass(frozen=True)
class ValuationResult:
    """Welfare-loss metrics for one (country, scenario) pair."""

    country_id: str
    scenario: str
    total_deaths: float
    vsl_usd: float
    vsl_loss_usd: float
    loss_pct_gdp: float
    marginal_value_pct_gdp: float
    contraction_infant_deaths_range: tuple[float, float] | None = None


def transfer_vsl(params: ValuationParams, country_income: float) -> float:
    """Country VSL via income-elasticity benefit transfer, with a floor.

    VSL_c = max(floor, base_vsl * (income / reference_income)^eta).
    Monotone non-decreasing in income for eta >= 0 and exactly base_vsl at
    the reference income.
    """
    if country_income <= 0:
        raise NonPositiveIncome(f"country income must be positive, got {country_income}")
    ratio = country_income / params.reference_income_usd
    value = params.base_vsl_usd * ratio**params.income_elasticity
    return max(params.vsl_floor_usd, value)


def value_mortality(deaths: float, vsl: float) -> float:
    """Total welfare loss in USD: deaths valued at the country VSL."""
    if deaths < 0 or vsl < 0:
        raise InvariantViolation("deaths and vsl must be non-negative")
    return deaths * vsl


def welfare_loss_pct_gdp(loss_usd: float, gdp_usd: float) -> float:
    """Loss expressed as a percentage of the country's annual GDP."""
    if gdp_usd <= 0:
        raise NonPositiveGDP(f"gdp must be positive, got {gdp_usd}")
    return 100.0 * loss_usd / gdp_usd


def marginal_value(
    scenario_result: ValuationResult, unmitigated_result: ValuationResult, gdp_usd: float
) -> float:
    """Welfare gained by the scenario relative to doing nothing, as % of GDP.

    100 * (unmitigated loss - scenario loss) / GDP. Negative when a scenario
    increases deaths.
    """
    if scenario_result.country_id != unmitigated_result.country_id:
        raise CountryMismatch(
            f"cannot compare {scenario_result.country_id} against {unmitigated_result.country_id}"
        )
    if gdp_usd <= 0:
        raise NonPositiveGDP(f"gdp must be positive, got {gdp_usd}")
    return 100.0 * (unmitigated_result.vsl_loss_usd - scenario_result.vsl_loss_usd) / gdp_usd


def contraction_mortality(gdp_shock_pct: float, annual_births: float) -> tuple[float, float]:
    """Excess infant deaths implied by a GDP contraction, as a (low, high) range."""
    if gdp_shock_pct < 0 or annual_births < 0:
        raise InvariantViolation("shock and births must be non-negative")
    low, high = CONTRACTION_COEFFS_PER_1000
    return (
        gdp_shock_pct * low / 1000.0 * annual_births,
        gdp_shock_pct * high / 1000.0 * annual_births,
    )
