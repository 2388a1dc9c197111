"""Per-country input data: demography, contacts, healthcare capacity, severity.

All loaders read plain UTF-8 CSV with '.' as the decimal separator, validate
the documented invariants, and return immutable objects (numpy arrays are
marked read-only). Loading is single-threaded; loaded objects are safe to
share across worker processes.

File schemas
------------
countries.csv
    iso3,name,income_group,pop_band_0,...,pop_band_15,gdp_usd,gni_pc_usd,
    hosp_beds,icu_beds,births,informal_share
    ``births`` and ``informal_share`` may be empty (optional fields).
contacts.csv (long format)
    iso3,row_band,col_band,contacts_per_day
    The special iso3 ``DEFAULT`` supplies the fallback matrix used for
    countries without their own rows.
severity.csv
    band,p_hosp,p_icu,d_hosp_t,d_hosp_u,d_icu_t,d_icu_u  (16 band rows)
    followed by key,value rows for the scalar durations:
    latent_period, infectious_period, hosp_stay_general, hosp_stay_icu.
economics.csv
    iso3,gdp_usd,gni_pc_usd

Age bands are fixed: sixteen 5-year bands 0-4, 5-9, ..., 70-74, 75+.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
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

N_BANDS = 16
BAND_WIDTH_YEARS = 5
#: Lower edge of each band in years; the last band is open-ended (75+).
BAND_EDGES = tuple(range(0, N_BANDS * BAND_WIDTH_YEARS, BAND_WIDTH_YEARS))
#: First band counted as 65+ (bands 13, 14, 15).
ELDERLY_CUTOFF_BAND = 13

FALLBACK_CONTACT_ID = "DEFAULT"

DURATION_KEYS = ("latent_period", "infectious_period", "hosp_stay_general", "hosp_stay_icu")

_COUNTRY_COLUMNS = (
    ["iso3", "name", "income_group"]
    + [f"pop_band_{i}" for i in range(N_BANDS)]
    + ["gdp_usd", "gni_pc_usd", "hosp_beds", "icu_beds", "births", "informal_share"]
)


def band_label(i: int) -> str:
    if i == N_BANDS - 1:
        return f"{BAND_EDGES[i]}+"
    return f"{BAND_EDGES[i]}-{BAND_EDGES[i] + BAND_WIDTH_YEARS - 1}"


class IncomeGroup(str, Enum):
    """World Bank income classification, read from the input file."""

    LOW = "low"
    LOWER_MIDDLE = "lower-middle"
    UPPER_MIDDLE = "upper-middle"
    HIGH = "high"


#: Column/grouping order used in reports: richest group first.
INCOME_GROUP_ORDER = (
    IncomeGroup.HIGH,
    IncomeGroup.UPPER_MIDDLE,
    IncomeGroup.LOWER_MIDDLE,
    IncomeGroup.LOW,
)

INCOME_GROUP_TITLES = {
    IncomeGroup.HIGH: "High Income",
    IncomeGroup.UPPER_MIDDLE: "Upper-Middle Income",
    IncomeGroup.LOWER_MIDDLE: "Lower-Middle Income",
    IncomeGroup.LOW: "Low Income",
}


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CountryProfile:
    """Demography, healthcare capacity and economic indicators for one country."""

    country_id: str
    name: str
    income_group: IncomeGroup
    population_by_band: np.ndarray  # (16,) counts
    gdp_total_usd: float
    gni_per_capita_usd: float
    hospital_beds: float
    icu_beds: float
    annual_births: float | None = None
    informal_employment_share: float | None = None

    def __post_init__(self):
        pop = _readonly(self.population_by_band)
        object.__setattr__(self, "population_by_band", pop)
        if len(self.country_id) != 3 or not self.country_id.isalpha() or not self.country_id.isupper():
            raise InvariantViolation(f"country_id must be an ISO3 code, got {self.country_id!r}")
        if pop.shape != (N_BANDS,):
            raise InvariantViolation(
                f"population_by_band must have {N_BANDS} entries, got {pop.shape}"
            )
        if np.any(pop < 0):
            raise NegativeValue(f"negative population band for {self.country_id}")
        if pop.sum() <= 0:
            raise InvariantViolation(f"total population must be positive for {self.country_id}")
        for fname in ("gdp_total_usd", "gni_per_capita_usd", "hospital_beds", "icu_beds"):
            if getattr(self, fname) < 0:
                raise NegativeValue(f"{fname} negative for {self.country_id}")
        if self.hospital_beds < self.icu_beds:
            raise InvariantViolation(
                f"hospital_beds < icu_beds for {self.country_id} "
                f"({self.hospital_beds} < {self.icu_beds})"
            )
        if self.annual_births is not None and self.annual_births < 0:
            raise NegativeValue(f"births negative for {self.country_id}")
        if self.informal_employment_share is not None and not (
            0.0 <= self.informal_employment_share <= 1.0
        ):
            raise InvariantViolation(f"informal_share outside [0,1] for {self.country_id}")

    @property
    def total_population(self) -> float:
        return float(self.population_by_band.sum())


@dataclass(frozen=True, eq=False)
class ContactMatrix:
    """Reciprocity-balanced mean daily contacts between age bands.

    ``entries[i, j]`` is the mean number of daily contacts one individual in
    band i has with individuals in band j. Balanced against
    ``reference_population`` so that total contacts are symmetric:
    entries[i, j] * N_i == entries[j, i] * N_j.
    ``source_id`` records which file entry the matrix came from; it differs
    from the country's ISO3 when the fallback matrix was used.
    """

    entries: np.ndarray
    reference_population: np.ndarray
    source_id: str = FALLBACK_CONTACT_ID

    def __post_init__(self):
        m = _readonly(self.entries)
        pop = _readonly(self.reference_population)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "reference_population", pop)
        n = m.shape[0]
        if m.shape != (n, n) or pop.shape != (n,):
            raise InvariantViolation(
                f"contact matrix shape {m.shape} incompatible with population {pop.shape}"
            )
        if np.any(m < 0):
            raise NegativeValue("contact matrix has negative entries")
        if np.any(pop <= 0):
            raise ZeroPopulationBand("reference population must be positive in every band")
        lhs = m * pop[:, None]
        err = np.abs(lhs - lhs.T)
        scale = np.maximum(np.maximum(np.abs(lhs), np.abs(lhs.T)), 1e-300)
        if np.any(err / scale > 1e-9):
            raise InvariantViolation("contact matrix is not reciprocity-balanced to 1e-9")

    @property
    def n_bands(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class SeverityProfile:
    """Per-band clinical pathway probabilities plus scalar durations (days).

    ``p_hosp`` is P(hospitalization | infection) and ``p_icu`` is
    P(ICU | hospitalization). The ``d_*`` arrays give P(death) per case by
    ward and by treatment status; untreated must be at least as lethal as
    treated in every band.
    """

    p_hosp: np.ndarray
    p_icu: np.ndarray
    d_hosp_treated: np.ndarray
    d_hosp_untreated: np.ndarray
    d_icu_treated: np.ndarray
    d_icu_untreated: np.ndarray
    latent_period: float
    infectious_period: float
    hosp_stay_general: float
    hosp_stay_icu: float

    _PROB_FIELDS = (
        "p_hosp",
        "p_icu",
        "d_hosp_treated",
        "d_hosp_untreated",
        "d_icu_treated",
        "d_icu_untreated",
    )

    def __post_init__(self):
        n = len(np.atleast_1d(self.p_hosp))
        for fname in self._PROB_FIELDS:
            arr = _readonly(np.atleast_1d(getattr(self, fname)))
            object.__setattr__(self, fname, arr)
            if arr.shape != (n,):
                raise InvariantViolation(f"severity field {fname} has wrong length")
            if np.any(arr < 0) or np.any(arr > 1):
                raise InvariantViolation(f"severity field {fname} outside [0,1]")
        if np.any(self.d_hosp_untreated < self.d_hosp_treated) or np.any(
            self.d_icu_untreated < self.d_icu_treated
        ):
            raise InvariantViolation("untreated death probability below treated")
        for fname in DURATION_KEYS:
            if getattr(self, fname) <= 0:
                raise InvariantViolation(f"duration {fname} must be positive")

    @property
    def n_bands(self) -> int:
        return self.p_hosp.shape[0]


@dataclass(frozen=True)
class EconomicIndicators:
    """GDP and GNI per capita used by the valuation stage."""

    gdp_usd: float
    gni_pc_usd: float


# ---------------------------------------------------------------------------
# Operations


def balance_contact_matrix(
    raw: np.ndarray, pop: np.ndarray, source_id: str = FALLBACK_CONTACT_ID
) -> ContactMatrix:
    """Reciprocity-correct a survey contact matrix against a population.

    Standard pairwise correction: M[i,j] = (raw[i,j] + raw[j,i] * N_j/N_i) / 2,
    which makes band-to-band total contacts symmetric while conserving the
    symmetrized contact total. Idempotent up to float rounding.
    """
    raw = np.asarray(raw, dtype=np.float64)
    pop = np.asarray(pop, dtype=np.float64)
    if np.any(pop <= 0):
        raise ZeroPopulationBand("cannot balance against a zero-population band")
    if np.any(raw < 0):
        raise NegativeValue("raw contact matrix has negative entries")
    balanced = 0.5 * (raw + raw.T * (pop[None, :] / pop[:, None]))
    return ContactMatrix(entries=balanced, reference_population=pop, source_id=source_id)


def elderly_share(profile: CountryProfile, cutoff_band: int = ELDERLY_CUTOFF_BAND) -> float:
    """Fraction of the population in bands at or above ``cutoff_band`` (65+ by default)."""
    pop = profile.population_by_band
    return float(pop[cutoff_band:].sum() / pop.sum())


# ---------------------------------------------------------------------------
# CSV helpers


def _fmt(value) -> str:
    """Format a float for CSV so that reloading round-trips exactly.

    Integral values are written without a decimal point (counts stay
    bit-exact); everything else uses repr, which is shortest-roundtrip.
    """
    if value is None:
        return ""
    f = float(value)
    if f.is_integer() and abs(f) < 1e15:
        return str(int(f))
    return repr(f)


def _parse_float(text: str, *, path, row, column) -> float:
    try:
        return float(text)
    except ValueError:
        raise InvariantViolation(
            f"cannot parse {text!r} as a number", path=path, row=row, column=column
        ) from None


def _parse_nonneg(text: str, *, path, row, column) -> float:
    value = _parse_float(text, path=path, row=row, column=column)
    if value < 0:
        raise NegativeValue(f"negative value {value}", path=path, row=row, column=column)
    return value


def _read_rows(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyFile("file has no header row", path=path)
        rows = [row for row in reader if any((v or "").strip() for v in row.values())]
    if not rows:
        raise EmptyFile("file has a header but no data rows", path=path)
    return rows


# ---------------------------------------------------------------------------
# Loaders / writers


def load_country_profiles(path) -> list[CountryProfile]:
    """Load and validate one :class:`CountryProfile` per CSV row.

    Raises MissingColumn / NegativeValue / DuplicateCountry / EmptyFile with
    the offending row and column identified.
    """
    rows = _read_rows(path)
    present = set(rows[0].keys())
    for col in _COUNTRY_COLUMNS:
        if col not in present:
            raise MissingColumn(f"missing required column {col!r}", path=path, column=col)

    profiles: list[CountryProfile] = []
    seen: set[str] = set()
    for idx, row in enumerate(rows, start=2):  # header is line 1
        iso3 = row["iso3"].strip()
        if iso3 in seen:
            raise DuplicateCountry(f"duplicate country_id {iso3!r}", path=path, row=idx, column="iso3")
        seen.add(iso3)
        group_text = row["income_group"].strip()
        try:
            group = IncomeGroup(group_text)
        except ValueError:
            raise InvariantViolation(
                f"unknown income_group {group_text!r}", path=path, row=idx, column="income_group"
            ) from None
        pop = np.empty(N_BANDS)
        for b in range(N_BANDS):
            col = f"pop_band_{b}"
            pop[b] = _parse_nonneg(row[col], path=path, row=idx, column=col)
        scalars = {
            col: _parse_nonneg(row[col], path=path, row=idx, column=col)
            for col in ("gdp_usd", "gni_pc_usd", "hosp_beds", "icu_beds")
        }
        births = row["births"].strip()
        informal = row["informal_share"].strip()
        try:
            profile = CountryProfile(
                country_id=iso3,
                name=row["name"].strip(),
                income_group=group,
                population_by_band=pop,
                gdp_total_usd=scalars["gdp_usd"],
                gni_per_capita_usd=scalars["gni_pc_usd"],
                hospital_beds=scalars["hosp_beds"],
                icu_beds=scalars["icu_beds"],
                annual_births=_parse_nonneg(births, path=path, row=idx, column="births")
                if births
                else None,
                informal_employment_share=_parse_float(
                    informal, path=path, row=idx, column="informal_share"
                )
                if informal
                else None,
            )
        except InvariantViolation as exc:
            raise InvariantViolation(str(exc), path=path, row=idx) from None
        profiles.append(profile)
    return profiles


def write_country_profiles(path, profiles) -> None:
    """Inverse of :func:`load_country_profiles`; round-trips all values."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_COUNTRY_COLUMNS)
        for p in profiles:
            writer.writerow(
                [p.country_id, p.name, p.income_group.value]
                + [_fmt(x) for x in p.population_by_band]
                + [
                    _fmt(p.gdp_total_usd),
                    _fmt(p.gni_per_capita_usd),
                    _fmt(p.hospital_beds),
                    _fmt(p.icu_beds),
                    _fmt(p.annual_births),
                    "" if p.informal_employment_share is None else repr(p.informal_employment_share),
                ]
            )


def load_contact_table(path) -> dict[str, np.ndarray]:
    """Read the long-format contacts CSV into raw (unbalanced) matrices by iso3."""
    rows = _read_rows(path)
    for col in ("iso3", "row_band", "col_band", "contacts_per_day"):
        if col not in rows[0]:
            raise MissingColumn(f"missing required column {col!r}", path=path, column=col)
    tables: dict[str, np.ndarray] = {}
    filled: dict[str, np.ndarray] = {}
    for idx, row in enumerate(rows, start=2):
        iso3 = row["iso3"].strip()
        i = int(_parse_nonneg(row["row_band"], path=path, row=idx, column="row_band"))
        j = int(_parse_nonneg(row["col_band"], path=path, row=idx, column="col_band"))
        if i >= N_BANDS or j >= N_BANDS:
            raise MissingBand(
                f"band index out of range: ({i},{j})", path=path, row=idx, column="row_band"
            )
        value = _parse_nonneg(row["contacts_per_day"], path=path, row=idx, column="contacts_per_day")
        if iso3 not in tables:
            tables[iso3] = np.zeros((N_BANDS, N_BANDS))
            filled[iso3] = np.zeros((N_BANDS, N_BANDS), dtype=bool)
        if filled[iso3][i, j]:
            raise InvariantViolation(
                f"duplicate contact entry for {iso3} band pair ({i},{j})", path=path, row=idx
            )
        tables[iso3][i, j] = value
        filled[iso3][i, j] = True
    for iso3, mask in filled.items():
        if not mask.all():
            i, j = np.argwhere(~mask)[0]
            raise MissingBand(f"contact matrix for {iso3} missing band pair ({i},{j})", path=path)
    return tables


def load_contact_matrix(path, country_id: str, population: np.ndarray) -> ContactMatrix:
    """Load the balanced contact matrix for one country.

    Falls back to the ``DEFAULT`` matrix when the country has no rows of its
    own; the returned matrix's ``source_id`` records which one was used.
    ``population`` is required because balancing is population-specific.
    """
    tables = load_contact_table(path)
    if country_id in tables:
        source = country_id
    elif FALLBACK_CONTACT_ID in tables:
        source = FALLBACK_CONTACT_ID
    else:
        raise UnknownCountry(
            f"no contact matrix for {country_id!r} and no {FALLBACK_CONTACT_ID!r} fallback in {path}"
        )
    return balance_contact_matrix(tables[source], population, source_id=source)


def write_contact_table(path, tables: dict[str, np.ndarray]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iso3", "row_band", "col_band", "contacts_per_day"])
        for iso3 in sorted(tables):
            m = tables[iso3]
            for i in range(N_BANDS):
                for j in range(N_BANDS):
                    writer.writerow([iso3, i, j, _fmt(m[i, j])])


_SEVERITY_COLUMNS = ("band", "p_hosp", "p_icu", "d_hosp_t", "d_hosp_u", "d_icu_t", "d_icu_u")


def load_severity_profile(path) -> SeverityProfile:
    """Load the banded severity table plus the scalar durations section."""
    with open(path, newline="", encoding="utf-8") as fh:
        raw_rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    if not raw_rows:
        raise EmptyFile("severity file is empty", path=path)
    header = [c.strip() for c in raw_rows[0]]
    for col in _SEVERITY_COLUMNS:
        if col not in header:
            raise MissingColumn(f"missing required column {col!r}", path=path, column=col)
    col_idx = {c: header.index(c) for c in _SEVERITY_COLUMNS}

    bands: dict[int, dict[str, float]] = {}
    durations: dict[str, float] = {}
    for lineno, row in enumerate(raw_rows[1:], start=2):
        key = row[0].strip()
        if key in DURATION_KEYS:
            if len(row) < 2 or not row[1].strip():
                raise MissingField(f"duration {key} has no value", path=path, row=lineno)
            durations[key] = _parse_float(row[1], path=path, row=lineno, column=key)
            continue
        band = int(_parse_nonneg(key, path=path, row=lineno, column="band"))
        if band in bands:
            raise InvariantViolation(f"duplicate band row {band}", path=path, row=lineno)
        bands[band] = {
            c: _parse_nonneg(row[col_idx[c]], path=path, row=lineno, column=c)
            for c in _SEVERITY_COLUMNS[1:]
        }
    for b in range(N_BANDS):
        if b not in bands:
            raise MissingBand(f"severity table missing band {b}", path=path)
    for key in DURATION_KEYS:
        if key not in durations:
            raise MissingField(f"missing duration row {key!r}", path=path)

    def col(c):
        return np.array([bands[b][c] for b in range(N_BANDS)])

    try:
        return SeverityProfile(
            p_hosp=col("p_hosp"),
            p_icu=col("p_icu"),
            d_hosp_treated=col("d_hosp_t"),
            d_hosp_untreated=col("d_hosp_u"),
            d_icu_treated=col("d_icu_t"),
            d_icu_untreated=col("d_icu_u"),
            **durations,
        )
    except InvariantViolation as exc:
        raise InvariantViolation(str(exc), path=path) from None


def write_severity_profile(path, severity: SeverityProfile) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_SEVERITY_COLUMNS)
        for b in range(severity.n_bands):
            writer.writerow(
                [b]
                + [
                    _fmt(getattr(severity, f)[b])
                    for f in (
                        "p_hosp",
                        "p_icu",
                        "d_hosp_treated",
                        "d_hosp_untreated",
                        "d_icu_treated",
                        "d_icu_untreated",
                    )
                ]
            )
        for key in DURATION_KEYS:
            writer.writerow([key, _fmt(getattr(severity, key))])


def load_economics(path) -> dict[str, EconomicIndicators]:
    """Read the valuation-side economic indicators keyed by iso3."""
    rows = _read_rows(path)
    for col in ("iso3", "gdp_usd", "gni_pc_usd"):
        if col not in rows[0]:
            raise MissingColumn(f"missing required column {col!r}", path=path, column=col)
    out: dict[str, EconomicIndicators] = {}
    for idx, row in enumerate(rows, start=2):
        iso3 = row["iso3"].strip()
        if iso3 in out:
            raise DuplicateCountry(f"duplicate country_id {iso3!r}", path=path, row=idx, column="iso3")
        out[iso3] = EconomicIndicators(
            gdp_usd=_parse_nonneg(row["gdp_usd"], path=path, row=idx, column="gdp_usd"),
            gni_pc_usd=_parse_nonneg(row["gni_pc_usd"], path=path, row=idx, column="gni_pc_usd"),
        )
    return out


def write_economics(path, indicators: dict[str, EconomicIndicators]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iso3", "gdp_usd", "gni_pc_usd"])
        for iso3 in sorted(indicators):
            ind = indicators[iso3]
            writer.writerow([iso3, _fmt(ind.gdp_usd), _fmt(ind.gni_pc_usd)])
