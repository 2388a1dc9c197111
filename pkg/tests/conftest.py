import hypothesis
import numpy as np
import pytest

from epivalue.country_data import (
    N_BANDS,
    CountryProfile,
    IncomeGroup,
    SeverityProfile,
    balance_contact_matrix,
    load_country_profiles,
    load_severity_profile,
    load_contact_table,
)
from epivalue.engine import EpiParams, integrate
from epivalue.policy import make_scenario
from epivalue.sweep import packaged_data_path
from epivalue.trajectory import Compartment, EpidemicTrajectory, N_COMPARTMENTS

hypothesis.settings.register_profile(
    "default", max_examples=50, deadline=None, derandomize=True
)
hypothesis.settings.load_profile("default")


# ---------------------------------------------------------------------------
# Independent oracles (kept test-side on purpose)


def final_size_root(r0: float) -> float:
    """Bisection root of z = 1 - exp(-r0 z) on (0, 1], the epidemic final size."""
    f = lambda z: z - (1.0 - np.exp(-r0 * z))
    lo, hi = 1e-12, 1.0
    assert f(lo) < 0 < f(hi) or f(hi) == 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Builders


def flat_severity(n_bands=1, p_hosp=0.0, p_icu=0.0, d_h=0.0, d_h_u=None, d_i=0.0, d_i_u=None,
                  latent=4.6, infectious=5.0, stay_gen=8.0, stay_icu=16.0) -> SeverityProfile:
    ones = np.ones(n_bands)
    return SeverityProfile(
        p_hosp=p_hosp * ones,
        p_icu=p_icu * ones,
        d_hosp_treated=d_h * ones,
        d_hosp_untreated=(d_h if d_h_u is None else d_h_u) * ones,
        d_icu_treated=d_i * ones,
        d_icu_untreated=(d_i if d_i_u is None else d_i_u) * ones,
        latent_period=latent,
        infectious_period=infectious,
        hosp_stay_general=stay_gen,
        hosp_stay_icu=stay_icu,
    )


def make_profile(
    iso3="XTS",
    pop_shares=None,
    total_pop=10e6,
    income=IncomeGroup.HIGH,
    beds_per_1000=3.0,
    icu_per_1000=0.1,
    gdp=5e11,
    gni=30000.0,
    births=None,
    informal=None,
) -> CountryProfile:
    if pop_shares is None:
        pop_shares = np.full(N_BANDS, 1.0 / N_BANDS)
    pop_shares = np.asarray(pop_shares, dtype=float)
    pop = np.round(pop_shares / pop_shares.sum() * total_pop)
    return CountryProfile(
        country_id=iso3,
        name="Testland",
        income_group=income,
        population_by_band=pop,
        gdp_total_usd=gdp,
        gni_per_capita_usd=gni,
        hospital_beds=round(total_pop * beds_per_1000 / 1000.0),
        icu_beds=round(total_pop * icu_per_1000 / 1000.0),
        annual_births=births,
        informal_employment_share=informal,
    )


def trajectory_from_daily_deaths(daily_deaths, population=10_000_000.0) -> EpidemicTrajectory:
    """Synthetic single-band trajectory with a prescribed daily death series."""
    deaths = np.asarray(daily_deaths, dtype=float)
    n_days = len(deaths)
    times = np.arange(n_days + 1, dtype=float)
    states = np.zeros((n_days + 1, N_COMPARTMENTS, 1))
    cum = np.concatenate([[0.0], np.cumsum(deaths)])
    states[:, Compartment.D, 0] = cum
    states[:, Compartment.S, 0] = population - cum
    ones = np.ones(n_days + 1)
    return EpidemicTrajectory(
        times=times,
        states=states,
        daily_new_infections=np.zeros((max(n_days, 1), 1)),
        gen_demand=0.0 * ones,
        gen_occupancy=0.0 * ones,
        icu_demand=0.0 * ones,
        icu_occupancy=0.0 * ones,
        contact_scale_by_band=np.ones((n_days + 1, 1)),
        trigger_time=None,
        population=np.array([population]),
        gen_capacity=0.0,
        icu_capacity=0.0,
        scenario_kind="unmitigated",
        beta=0.0,
    )


# ---------------------------------------------------------------------------
# Fixtures


@pytest.fixture(scope="session")
def data_paths():
    return {k: packaged_data_path(k) for k in ("countries", "contacts", "severity", "economics")}


@pytest.fixture(scope="session")
def default_severity(data_paths):
    return load_severity_profile(data_paths["severity"])


@pytest.fixture(scope="session")
def default_contact_table(data_paths):
    return load_contact_table(data_paths["contacts"])


@pytest.fixture(scope="session")
def shipped_profiles(data_paths):
    return {p.country_id: p for p in load_country_profiles(data_paths["countries"])}


@pytest.fixture(scope="session", autouse=True)
def warm_kernel():
    """Trigger the JIT compile once so timed tests measure steady-state cost."""
    sev = flat_severity()
    pop = np.array([1e6])
    cm = balance_contact_matrix(np.array([[8.0]]), pop)
    params = EpiParams(severity=sev, horizon=2.0)
    integrate(pop, cm, params, make_scenario("unmitigated"))
