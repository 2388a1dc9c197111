#!/usr/bin/env python3
"""Regenerate the packaged default input files.

Writes into src/epivalue/data/:

- severity_default.csv    age-banded clinical pathway, decade-anchored to the
                          published Imperial College COVID-19 parameterization
                          (hospitalization and ICU fractions, infection
                          fatality gradient), with the untreated death
                          probabilities tuned so an older high-income pyramid
                          lands just below 0.8% unmitigated population
                          mortality at R0 = 3.
- contacts_default.csv    a synthetic POLYMOD-like fallback matrix (household,
                          school, work and community components) plus explicit
                          matrices for two anchor countries, one of them with
                          elevated elderly contact rates.
- countries_synthetic.csv ~160 synthetic countries across the four World Bank
                          income groups. ISO3 codes use the private-use XAA-XZZ
                          range; anchor countries mimic well-known demographic
                          profiles but are fictional.
- economics_synthetic.csv GDP and GNI per capita for the same countries.

Deterministic: fixed RNG seed, stable ordering. Run from the repo root:

    python scripts/make_synthetic_inputs.py
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from epivalue.country_data import (  # noqa: E402
    N_BANDS,
    CountryProfile,
    EconomicIndicators,
    IncomeGroup,
    SeverityProfile,
    balance_contact_matrix,
    write_contact_table,
    write_country_profiles,
    write_economics,
    write_severity_profile,
)
from epivalue.engine import EpiParams, simulate  # noqa: E402
from epivalue.policy import make_scenario  # noqa: E402
from epivalue.trajectory import total_deaths  # noqa: E402

DATA_DIR = REPO / "src" / "epivalue" / "data"
RNG_SEED = 20200407

BAND_MIDPOINTS = np.array([2.5 + 5 * i for i in range(N_BANDS - 1)] + [80.0])


# ---------------------------------------------------------------------------
# Contact structure


def synthetic_contact_matrix() -> np.ndarray:
    """POLYMOD-flavoured raw matrix: household + school + work + community."""
    a = BAND_MIDPOINTS
    diff = np.abs(a[:, None] - a[None, :])

    household = np.exp(-(diff**2) / (2 * 12.0**2)) + 0.55 * np.exp(
        -((diff - 28.0) ** 2) / (2 * 9.0**2)
    )

    school_age = (a >= 5) & (a < 20)
    school = np.where(
        school_age[:, None] & school_age[None, :], np.exp(-(diff**2) / (2 * 4.0**2)), 0.0
    )

    work_age = (a >= 20) & (a < 65)
    work = np.where(
        work_age[:, None] & work_age[None, :], np.exp(-(diff**2) / (2 * 16.0**2)), 0.0
    )

    # community mixing proportional to a generic population share profile
    share = np.exp(-a / 45.0)
    share = share / share.sum()
    community = np.tile(share, (N_BANDS, 1))

    raw = 2.2 * household + 3.5 * school + 2.6 * work + 4.0 * community
    return np.round(raw, 4)


def elevated_elderly_matrix(base: np.ndarray, factor: float = 1.4) -> np.ndarray:
    """Scale contacts involving 65+ bands (multi-generation households)."""
    m = base.copy()
    old = np.arange(N_BANDS) >= 13
    m[old, :] *= factor
    m[:, old] *= factor
    return np.round(m, 4)


# ---------------------------------------------------------------------------
# Demography


# Shape templates by income group (relative weights; normalized exactly below).
PYRAMID_SHAPES = {
    IncomeGroup.HIGH: np.array(
        [50, 52, 54, 55, 58, 62, 65, 66, 64, 64, 66, 68, 67, 62, 52, 60], dtype=float
    ),
    IncomeGroup.UPPER_MIDDLE: np.array(
        [70, 70, 69, 68, 70, 75, 77, 74, 70, 66, 60, 52, 44, 36, 28, 31], dtype=float
    ),
    IncomeGroup.LOWER_MIDDLE: np.array(
        [95, 92, 89, 86, 85, 83, 79, 72, 63, 54, 45, 37, 30, 24, 18, 10], dtype=float
    ),
    IncomeGroup.LOW: np.array(
        [145, 135, 122, 110, 98, 86, 74, 62, 50, 40, 31, 23, 17, 13, 9, 8], dtype=float
    ),
}

#: Target 65+ shares per group (mean of each group's distribution).
ELDERLY_TARGETS = {
    IncomeGroup.HIGH: 0.174,
    IncomeGroup.UPPER_MIDDLE: 0.095,
    IncomeGroup.LOWER_MIDDLE: 0.052,
    IncomeGroup.LOW: 0.030,
}


def pyramid(group: IncomeGroup, elderly_target: float, jitter: np.ndarray | None = None) -> np.ndarray:
    """Band shares with the 65+ share forced to ``elderly_target`` exactly."""
    shape = PYRAMID_SHAPES[group].copy()
    if jitter is not None:
        shape = shape * jitter
    young = shape[:13].sum()
    old = shape[13:].sum()
    shares = np.empty(N_BANDS)
    shares[:13] = shape[:13] / young * (1.0 - elderly_target)
    shares[13:] = shape[13:] / old * elderly_target
    return shares


# per-1000-population healthcare capacity and per-capita income by group
GROUP_PARAMS = {
    IncomeGroup.HIGH: dict(beds_per_1000=4.2, icu_per_1000=0.25, gni_lo=14000, gni_hi=70000, cbr=10.5, informal=0.15),
    IncomeGroup.UPPER_MIDDLE: dict(beds_per_1000=2.4, icu_per_1000=0.10, gni_lo=4100, gni_hi=12500, cbr=15.5, informal=0.45),
    IncomeGroup.LOWER_MIDDLE: dict(beds_per_1000=1.0, icu_per_1000=0.025, gni_lo=1100, gni_hi=4000, cbr=24.0, informal=0.72),
    IncomeGroup.LOW: dict(beds_per_1000=0.5, icu_per_1000=0.006, gni_lo=400, gni_hi=1000, cbr=35.0, informal=0.90),
}

GROUP_COUNTS = {
    IncomeGroup.HIGH: 42,
    IncomeGroup.UPPER_MIDDLE: 40,
    IncomeGroup.LOWER_MIDDLE: 42,
    IncomeGroup.LOW: 28,
}

# Anchor countries: fictional stand-ins with recognizable demography/capacity.
# (iso3, name, group, pop, elderly_share, beds, icu, gni_pc, gdp, cbr/1000, informal)
ANCHORS = [
    ("XUS", "Westland", IncomeGroup.HIGH, 330e6, 0.165, 924_000, 97_000, 65_000, 21.0e12, 11.4, 0.10),
    ("XJP", "Eastisle", IncomeGroup.HIGH, 126e6, 0.27, 1_600_000, 6_500, 42_000, 5.0e12, 7.0, 0.12),
    ("XUK", "Northshire", IncomeGroup.HIGH, 67e6, 0.185, 167_000, 4_400, 42_500, 2.8e12, 11.0, 0.13),
    ("XBR", "Amazonia", IncomeGroup.UPPER_MIDDLE, 210e6, 0.092, 440_000, 30_000, 9_100, 1.85e12, 13.9, 0.40),
    ("XID", "Archipelica", IncomeGroup.UPPER_MIDDLE, 270e6, 0.062, 324_000, 8_100, 4_050, 1.1e12, 17.5, 0.60),
    ("XZA", "Capeland", IncomeGroup.UPPER_MIDDLE, 59e6, 0.055, 136_000, 3_000, 6_000, 0.35e12, 19.9, 0.35),
    ("XBD", "Deltaland", IncomeGroup.LOWER_MIDDLE, 165e6, 0.052, 132_000, 1_200, 1_900, 0.32e12, 17.9, 0.85),
    ("XNG", "Rivershore", IncomeGroup.LOWER_MIDDLE, 200e6, 0.027, 100_000, 350, 2_000, 0.45e12, 37.0, 0.90),
    ("XIN", "Gangesia", IncomeGroup.LOWER_MIDDLE, 1380e6, 0.064, 730_000, 35_000, 2_100, 2.9e12, 17.6, 0.88),
    ("XSS", "Savanna", IncomeGroup.LOW, 50e6, 0.030, 20_000, 100, 700, 0.0385e12, 36.0, 0.92),
    ("XNP", "Highmont", IncomeGroup.LOWER_MIDDLE, 29e6, 0.057, 8_700, 180, 1_100, 0.034e12, 19.0, 0.85),
]


def make_countries(rng: np.random.Generator):
    profiles = []
    econ = {}

    for iso3, name, group, pop, eld, beds, icu, gni, gdp, cbr, informal in ANCHORS:
        shares = pyramid(group, eld)
        profiles.append(
            CountryProfile(
                country_id=iso3,
                name=name,
                income_group=group,
                population_by_band=np.round(shares * pop),
                gdp_total_usd=gdp,
                gni_per_capita_usd=gni,
                hospital_beds=beds,
                icu_beds=icu,
                annual_births=round(pop * cbr / 1000.0),
                informal_employment_share=informal,
            )
        )
        econ[iso3] = EconomicIndicators(gdp_usd=gdp, gni_pc_usd=gni)

    # generated countries: XAA, XAB, ... skipping anchor codes
    letters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    taken = {a[0] for a in ANCHORS}
    codes = (f"X{a}{b}" for a in letters for b in letters)
    for group in (IncomeGroup.HIGH, IncomeGroup.UPPER_MIDDLE, IncomeGroup.LOWER_MIDDLE, IncomeGroup.LOW):
        gp = GROUP_PARAMS[group]
        for k in range(GROUP_COUNTS[group]):
            iso3 = next(c for c in codes if c not in taken)
            taken.add(iso3)
            pop = float(np.round(10 ** rng.uniform(6.0, 8.2)))
            eld = ELDERLY_TARGETS[group] * rng.uniform(0.8, 1.2)
            jitter = rng.uniform(0.9, 1.1, size=N_BANDS)
            shares = pyramid(group, eld, jitter)
            gni = float(np.round(rng.uniform(gp["gni_lo"], gp["gni_hi"]), 0))
            gdp = float(np.round(gni * pop * rng.uniform(0.95, 1.15), 0))
            beds = float(np.round(pop * gp["beds_per_1000"] / 1000.0 * rng.uniform(0.6, 1.5)))
            icu = float(np.round(pop * gp["icu_per_1000"] / 1000.0 * rng.uniform(0.5, 1.6)))
            icu = min(icu, beds)
            births = float(np.round(pop * gp["cbr"] / 1000.0 * rng.uniform(0.85, 1.15)))
            informal = float(np.clip(gp["informal"] * rng.uniform(0.8, 1.2), 0.02, 0.98))
            profiles.append(
                CountryProfile(
                    country_id=iso3,
                    name=f"{group.value.title()} Land {k + 1:02d}",
                    income_group=group,
                    population_by_band=np.round(shares * pop),
                    gdp_total_usd=gdp,
                    gni_per_capita_usd=gni,
                    hospital_beds=beds,
                    icu_beds=icu,
                    annual_births=births,
                    informal_employment_share=round(informal, 3),
                )
            )
            econ[iso3] = EconomicIndicators(gdp_usd=gdp, gni_pc_usd=gni)

    profiles.sort(key=lambda p: p.country_id)
    return profiles, econ


# ---------------------------------------------------------------------------
# Severity


# Decade anchors (0-9 ... 80+), following the published Imperial College
# COVID-19 parameterization: hospitalized fraction of symptomatic cases,
# ICU fraction of hospitalized, and the infection-fatality gradient.
HOSP_PCT_OF_SYMPTOMATIC = np.array([0.1, 0.3, 1.2, 3.2, 4.9, 10.2, 16.6, 24.3, 27.3])
ICU_PCT_OF_HOSP = np.array([5.0, 5.0, 5.0, 5.0, 6.3, 12.2, 27.4, 43.2, 70.9])
IFR_PCT = np.array([0.00161, 0.00695, 0.0309, 0.0844, 0.161, 0.595, 1.93, 4.28, 7.80])
PROP_SYMPTOMATIC = 0.669

#: Blend weights for the open-ended 75+ band: ~45% aged 75-79, ~55% aged 80+.
BAND15_BLEND = (0.45, 0.55)


def _decade_to_band(values: np.ndarray) -> np.ndarray:
    out = np.empty(N_BANDS)
    for b in range(N_BANDS - 1):
        out[b] = values[min(b // 2, 8)]
    out[N_BANDS - 1] = BAND15_BLEND[0] * values[7] + BAND15_BLEND[1] * values[8]
    return out


def severity_with_scale(g: float) -> SeverityProfile:
    """Build the severity profile with untreated IFR = g * published gradient.

    Treatment halves the death probability. Untreated ICU fatality is three
    times the untreated ward fatality, capped at 1.
    """
    p_hosp = _decade_to_band(HOSP_PCT_OF_SYMPTOMATIC) / 100.0 * PROP_SYMPTOMATIC
    p_icu = _decade_to_band(ICU_PCT_OF_HOSP) / 100.0
    ifr_u = _decade_to_band(IFR_PCT) / 100.0 * g

    d_hosp_u = np.empty(N_BANDS)
    d_icu_u = np.empty(N_BANDS)
    for b in range(N_BANDS):
        # solve p_hosp*((1-p_icu)*a + p_icu*min(1, 3a)) = ifr_u for a
        a = ifr_u[b] / (p_hosp[b] * (1.0 + 2.0 * p_icu[b]))
        if 3.0 * a > 1.0:
            a = (ifr_u[b] / p_hosp[b] - p_icu[b]) / (1.0 - p_icu[b])
            d_icu_u[b] = 1.0
        else:
            d_icu_u[b] = 3.0 * a
        d_hosp_u[b] = min(a, 1.0)

    return SeverityProfile(
        p_hosp=np.round(p_hosp, 6),
        p_icu=np.round(p_icu, 6),
        d_hosp_treated=np.round(d_hosp_u / 2.0, 6),
        d_hosp_untreated=np.round(d_hosp_u, 6),
        d_icu_treated=np.round(d_icu_u / 2.0, 6),
        d_icu_untreated=np.round(d_icu_u, 6),
        latent_period=4.6,
        infectious_period=5.0,
        hosp_stay_general=8.0,
        hosp_stay_icu=16.0,
    )


def mortality_pct(profile, contacts_raw, severity) -> float:
    cm = balance_contact_matrix(contacts_raw, profile.population_by_band, source_id=profile.country_id)
    params = EpiParams(severity=severity)
    traj = simulate(profile, cm, params, make_scenario("unmitigated"))
    return 100.0 * total_deaths(traj) / profile.total_population


def calibrate_severity(profiles, contacts_raw, target_us=0.78) -> tuple[SeverityProfile, float]:
    """Bisect the severity scale so the Westland anchor lands on target."""
    xus = next(p for p in profiles if p.country_id == "XUS")
    lo, hi = 0.3, 3.0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        m = mortality_pct(xus, contacts_raw, severity_with_scale(mid))
        if m < target_us:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-4:
            break
    g = 0.5 * (lo + hi)
    return severity_with_scale(round(g, 4)), round(g, 4)


def main():
    rng = np.random.default_rng(RNG_SEED)
    DATA_DIR.mkdir(parents=True, exist_ok=True)

    base_matrix = synthetic_contact_matrix()
    profiles, econ = make_countries(rng)

    severity, g = calibrate_severity(profiles, base_matrix)
    write_severity_profile(DATA_DIR / "severity_default.csv", severity)
    print(f"severity scale g = {g}")

    tables = {
        "DEFAULT": base_matrix,
        "XUS": base_matrix,
        "XBD": elevated_elderly_matrix(base_matrix),
    }
    write_contact_table(DATA_DIR / "contacts_default.csv", tables)

    write_country_profiles(DATA_DIR / "countries_synthetic.csv", profiles)
    write_economics(DATA_DIR / "economics_synthetic.csv", econ)
    print(f"wrote {len(profiles)} countries to {DATA_DIR}")

    # report the calibration anchors
    for iso3 in ("XUS", "XBD", "XSS"):
        p = next(pr for pr in profiles if pr.country_id == iso3)
        raw = tables.get(iso3, base_matrix)
        print(f"{iso3}: unmitigated mortality = {mortality_pct(p, raw, severity):.3f}%")


if __name__ == "__main__":
    main()
