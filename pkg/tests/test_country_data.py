import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from epivalue.country_data import (
    N_BANDS,
    CountryProfile,
    IncomeGroup,
    balance_contact_matrix,
    elderly_share,
    load_contact_matrix,
    load_country_profiles,
    load_economics,
    load_severity_profile,
    write_country_profiles,
    write_severity_profile,
)
from epivalue.errors import (
    DuplicateCountry,
    EmptyFile,
    InvariantViolation,
    MissingBand,
    MissingColumn,
    MissingField,
    NegativeValue,
    UnknownCountry,
    ZeroPopulationBand,
)
from tests.conftest import flat_severity, make_profile

COUNTRY_HEADER = (
    "iso3,name,income_group,"
    + ",".join(f"pop_band_{i}" for i in range(16))
    + ",gdp_usd,gni_pc_usd,hosp_beds,icu_beds,births,informal_share"
)


def country_row(iso3="XAA", bands=None, gdp=5e11, gni=30000, beds=30000, icu=1000,
                births="", informal="", group="high"):
    if bands is None:
        bands = [330e6 / 16] * 16
    cells = [iso3, "Testland", group] + [str(b) for b in bands] + [
        str(gdp), str(gni), str(beds), str(icu), str(births), str(informal)]
    return ",".join(cells)


def write_countries(tmp_path, rows):
    path = tmp_path / "countries.csv"
    path.write_text(COUNTRY_HEADER + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return path


class TestLoadCountryProfiles:
    def test_us_like_row_maps_fields(self, tmp_path):
        path = write_countries(tmp_path, [country_row(bands=[330e6 / 16] * 16, beds=924000)])
        (p,) = load_country_profiles(path)
        assert p.country_id == "XAA"
        assert p.total_population == pytest.approx(330e6)
        assert p.hospital_beds == 924000
        assert p.income_group is IncomeGroup.HIGH
        assert p.annual_births is None
        assert p.informal_employment_share is None

    def test_negative_band_rejected_with_location(self, tmp_path):
        bands = [1000.0] * 16
        bands[3] = -5
        path = write_countries(tmp_path, [country_row(bands=bands)])
        with pytest.raises(NegativeValue) as exc:
            load_country_profiles(path)
        assert exc.value.row == 2
        assert exc.value.column == "pop_band_3"

    def test_duplicate_iso3_rejected(self, tmp_path):
        path = write_countries(tmp_path, [country_row("XBD"), country_row("XBD")])
        with pytest.raises(DuplicateCountry):
            load_country_profiles(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "countries.csv"
        path.write_text(COUNTRY_HEADER + "\n", encoding="utf-8")
        with pytest.raises(EmptyFile):
            load_country_profiles(path)

    def test_missing_column_rejected(self, tmp_path):
        path = tmp_path / "countries.csv"
        header = COUNTRY_HEADER.replace(",icu_beds", "")
        row = country_row()
        cells = row.split(",")
        del cells[22]
        path.write_text(header + "\n" + ",".join(cells) + "\n", encoding="utf-8")
        with pytest.raises(MissingColumn) as exc:
            load_country_profiles(path)
        assert exc.value.column == "icu_beds"

    def test_beds_ordering_enforced(self, tmp_path):
        path = write_countries(tmp_path, [country_row(beds=100, icu=200)])
        with pytest.raises(InvariantViolation):
            load_country_profiles(path)

    def test_unknown_income_group(self, tmp_path):
        path = write_countries(tmp_path, [country_row(group="middle")])
        with pytest.raises(InvariantViolation):
            load_country_profiles(path)

    def test_round_trip_is_exact(self, tmp_path, shipped_profiles):
        originals = sorted(shipped_profiles.values(), key=lambda p: p.country_id)
        path = tmp_path / "roundtrip.csv"
        write_country_profiles(path, originals)
        reloaded = load_country_profiles(path)
        assert len(reloaded) == len(originals)
        for a, b in zip(originals, reloaded):
            assert a.country_id == b.country_id
            assert a.income_group is b.income_group
            np.testing.assert_array_equal(a.population_by_band, b.population_by_band)
            for f in ("gdp_total_usd", "gni_per_capita_usd", "hospital_beds", "icu_beds"):
                av, bv = getattr(a, f), getattr(b, f)
                assert bv == pytest.approx(av, rel=1e-12)
            assert (a.annual_births is None) == (b.annual_births is None)
            if a.informal_employment_share is not None:
                assert b.informal_employment_share == pytest.approx(
                    a.informal_employment_share, rel=1e-12
                )


class TestBalanceContactMatrix:
    def test_two_band_hand_computed(self):
        raw = np.array([[0.0, 2.0], [0.0, 0.0]])
        cm = balance_contact_matrix(raw, np.array([100.0, 100.0]))
        np.testing.assert_allclose(cm.entries, [[0.0, 1.0], [1.0, 0.0]], atol=1e-15)

    def test_already_reciprocal_fixed_point(self):
        pop = np.array([200.0, 100.0])
        raw = np.array([[3.0, 1.0], [2.0, 4.0]])  # 1*200 == 2*100: reciprocal
        cm = balance_contact_matrix(raw, pop)
        np.testing.assert_allclose(cm.entries, raw, rtol=1e-12)

    def test_uniform_ones_unchanged(self):
        # a uniform matrix is reciprocal (hence a fixed point) under equal
        # band populations; unequal populations make it non-reciprocal and
        # balancing must change it
        pop = np.array([120.0, 120.0, 120.0])
        cm = balance_contact_matrix(np.ones((3, 3)), pop)
        np.testing.assert_allclose(cm.entries, np.ones((3, 3)), rtol=1e-12)
        uneven = balance_contact_matrix(np.ones((3, 3)), np.array([50.0, 150.0, 300.0]))
        assert not np.allclose(uneven.entries, np.ones((3, 3)))

    def test_zero_population_band_rejected(self):
        with pytest.raises(ZeroPopulationBand):
            balance_contact_matrix(np.ones((2, 2)), np.array([10.0, 0.0]))

    def test_negative_entries_rejected(self):
        with pytest.raises(NegativeValue):
            balance_contact_matrix(np.array([[1.0, -0.1], [0.2, 1.0]]), np.array([10.0, 10.0]))

    @given(
        raw=arrays(np.float64, (4, 4), elements=st.floats(0, 50)),
        pop=arrays(np.float64, (4,), elements=st.floats(1, 1e6)),
    )
    def test_reciprocity_idempotence_conservation(self, raw, pop):
        cm = balance_contact_matrix(raw, pop)
        m = cm.entries
        lhs = m * pop[:, None]
        np.testing.assert_allclose(lhs, lhs.T, rtol=1e-9, atol=1e-12)
        again = balance_contact_matrix(m, pop)
        np.testing.assert_allclose(again.entries, m, rtol=1e-12, atol=1e-12)
        # symmetrized total contacts conserved
        total_before = (0.5 * (raw * pop[:, None] + raw.T * pop[None, :])).sum()
        total_after = lhs.sum()
        np.testing.assert_allclose(total_after, total_before, rtol=1e-9, atol=1e-9)


class TestElderlyShare:
    def test_low_income_three_percent(self):
        shares = np.array([0.145, 0.135, 0.122, 0.110, 0.098, 0.086, 0.074, 0.062,
                           0.050, 0.040, 0.031, 0.023, 0.017, 0.013, 0.009, 0.008])
        shares[:13] *= (1 - 0.03) / shares[:13].sum()
        shares[13:] *= 0.03 / shares[13:].sum()
        p = make_profile(pop_shares=shares, total_pop=1e8)
        assert elderly_share(p) == pytest.approx(0.03, abs=1e-6)

    def test_high_income_17_4_percent(self):
        shares = np.full(16, (1 - 0.174) / 13)
        shares[13:] = 0.174 / 3
        p = make_profile(pop_shares=shares, total_pop=1e8)
        assert elderly_share(p) == pytest.approx(0.174, abs=1e-6)

    def test_all_in_youngest_band_is_zero(self):
        shares = np.zeros(16)
        shares[0] = 1.0
        p = make_profile(pop_shares=shares)
        assert elderly_share(p) == 0.0

    def test_all_elderly_is_one(self):
        shares = np.zeros(16)
        shares[14] = 1.0
        p = make_profile(pop_shares=shares)
        assert elderly_share(p) == 1.0

    @given(st.integers(0, 2**32 - 1))
    def test_always_a_fraction(self, seed):
        rng = np.random.default_rng(seed)
        shares = rng.uniform(0.01, 1.0, 16)
        p = make_profile(pop_shares=shares)
        assert 0.0 <= elderly_share(p) <= 1.0


SEVERITY_HEADER = "band,p_hosp,p_icu,d_hosp_t,d_hosp_u,d_icu_t,d_icu_u"


def severity_text(n_bands=16, break_band=None, skip_band=None):
    lines = [SEVERITY_HEADER]
    for b in range(n_bands):
        if b == skip_band:
            continue
        p_hosp = 0.01 + 0.01 * b  # monotone increasing with age
        if b == break_band:
            lines.append(f"{b},{p_hosp},0.1,0.3,0.2,0.4,0.8")  # treated > untreated
        else:
            lines.append(f"{b},{p_hosp},0.1,0.1,0.2,0.4,0.8")
    lines += ["latent_period,4.6", "infectious_period,5.0",
              "hosp_stay_general,8", "hosp_stay_icu,16"]
    return "\n".join(lines) + "\n"


class TestSeverityLoader:
    def test_valid_file_round_trips(self, tmp_path):
        path = tmp_path / "severity.csv"
        path.write_text(severity_text(), encoding="utf-8")
        sev = load_severity_profile(path)
        assert sev.n_bands == 16
        assert sev.p_hosp[0] == pytest.approx(0.01)
        assert np.all(np.diff(sev.p_hosp) > 0)
        assert sev.latent_period == 4.6
        out = tmp_path / "severity_out.csv"
        write_severity_profile(out, sev)
        again = load_severity_profile(out)
        np.testing.assert_allclose(again.p_hosp, sev.p_hosp, rtol=1e-12)
        assert again.hosp_stay_icu == sev.hosp_stay_icu

    def test_treated_above_untreated_rejected(self, tmp_path):
        path = tmp_path / "severity.csv"
        path.write_text(severity_text(break_band=5), encoding="utf-8")
        with pytest.raises(InvariantViolation):
            load_severity_profile(path)

    def test_missing_band_rejected(self, tmp_path):
        path = tmp_path / "severity.csv"
        path.write_text(severity_text(skip_band=7), encoding="utf-8")
        with pytest.raises(MissingBand):
            load_severity_profile(path)

    def test_missing_duration_rejected(self, tmp_path):
        path = tmp_path / "severity.csv"
        text = severity_text().replace("hosp_stay_icu,16\n", "")
        path.write_text(text, encoding="utf-8")
        with pytest.raises(MissingField):
            load_severity_profile(path)

    def test_shipped_default_is_valid(self, default_severity):
        sev = default_severity
        assert sev.n_bands == N_BANDS
        assert np.all(sev.d_hosp_untreated >= sev.d_hosp_treated)
        assert np.all(sev.d_icu_untreated >= sev.d_icu_treated)
        # steep age gradient: the oldest band is far deadlier than children
        ifr_u = sev.p_hosp * ((1 - sev.p_icu) * sev.d_hosp_untreated + sev.p_icu * sev.d_icu_untreated)
        assert ifr_u[-1] / ifr_u[0] > 100


class TestContactLoader:
    def test_per_country_and_fallback(self, data_paths, shipped_profiles):
        pop = shipped_profiles["XUS"].population_by_band
        own = load_contact_matrix(data_paths["contacts"], "XUS", pop)
        assert own.source_id == "XUS"
        fb = load_contact_matrix(data_paths["contacts"], "XAA", shipped_profiles["XAA"].population_by_band)
        assert fb.source_id == "DEFAULT"

    def test_missing_country_without_fallback(self, tmp_path):
        path = tmp_path / "contacts.csv"
        lines = ["iso3,row_band,col_band,contacts_per_day"]
        lines += [f"XAA,{i},{j},1.0" for i in range(16) for j in range(16)]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        with pytest.raises(UnknownCountry):
            load_contact_matrix(path, "XZZ", np.ones(16))

    def test_incomplete_matrix_rejected(self, tmp_path):
        path = tmp_path / "contacts.csv"
        lines = ["iso3,row_band,col_band,contacts_per_day", "DEFAULT,0,0,1.0"]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        with pytest.raises(MissingBand):
            load_contact_matrix(path, "XZZ", np.ones(16))


class TestEconomicsLoader:
    def test_loads_shipped_file(self, data_paths, shipped_profiles):
        econ = load_economics(data_paths["economics"])
        assert set(econ) == set(shipped_profiles)
        assert econ["XUS"].gni_pc_usd == 65000

    def test_duplicate_rejected(self, tmp_path):
        path = tmp_path / "econ.csv"
        path.write_text("iso3,gdp_usd,gni_pc_usd\nXAA,1e9,1000\nXAA,2e9,2000\n", encoding="utf-8")
        with pytest.raises(DuplicateCountry):
            load_economics(path)


class TestProfileInvariants:
    def test_immutable_population(self):
        p = make_profile()
        with pytest.raises(ValueError):
            p.population_by_band[0] = 1.0

    def test_wrong_band_count_rejected(self):
        with pytest.raises(InvariantViolation):
            CountryProfile(
                country_id="XAA", name="x", income_group=IncomeGroup.LOW,
                population_by_band=np.ones(5), gdp_total_usd=1.0,
                gni_per_capita_usd=1.0, hospital_beds=1.0, icu_beds=0.0,
            )

    def test_flat_severity_helper_valid(self):
        assert flat_severity(n_bands=3).n_bands == 3
