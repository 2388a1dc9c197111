"""Country x scenario sweep: load inputs, simulate, value, serialize.

``run_sweep`` drives the whole pipeline. Its output is deterministic:
identical config and input files produce byte-identical CSV outputs
regardless of worker count or scheduling, because every task is a pure
function of its inputs and rows are sorted after the parallel barrier.
``run_metadata.json`` is the one deliberately non-deterministic output (it
records the wall-clock timestamp and worker count of the run).

The config hash covers the scientific inputs only: input-file checksums,
scenario definitions, epidemic and valuation parameters, and the country
filter. Output directory and worker count do not affect it.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import __version__
from .country_data import (
    FALLBACK_CONTACT_ID,
    ContactMatrix,
    CountryProfile,
    EconomicIndicators,
    balance_contact_matrix,
    elderly_share,
    load_contact_table,
    load_country_profiles,
    load_economics,
    load_severity_profile,
)
from .engine import EpiParams, simulate
from .errors import (
    EpiValueError,
    InputError,
    InvariantViolation,
    MissingField,
    NonFiniteState,
    NonPositiveGDP,
    NonPositiveIncome,
    PartialFailure,
    UnknownCountry,
)
from .policy import SCENARIO_ORDER, PolicyScenario, ScenarioKind, default_scenarios, scenario_from_config
from .trajectory import attack_rate, total_deaths
from .valuation import (
    ValuationParams,
    ValuationResult,
    contraction_mortality,
    marginal_value,
    transfer_vsl,
    value_mortality,
    welfare_loss_pct_gdp,
)

log = logging.getLogger("epivalue")

_DATA_FILES = {
    "countries": "countries_synthetic.csv",
    "contacts": "contacts_default.csv",
    "severity": "severity_default.csv",
    "economics": "economics_synthetic.csv",
}


def packaged_data_path(which: str) -> Path:
    """Path of a shipped default input file."""
    return Path(resources.files("epivalue").joinpath("data", _DATA_FILES[which]))


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved sweep configuration (see README for the JSON schema)."""

    countries_path: Path
    contacts_path: Path
    severity_path: Path
    economics_path: Path
    scenarios: tuple[PolicyScenario, ...]
    valuation: ValuationParams
    output_dir: Path
    r0_target: float = 3.0
    dt: float = 0.25
    horizon: float = 365.0
    seed_infections: float = 20.0
    country_filter: tuple[str, ...] | None = None  # None means all
    workers: int = 1
    gdp_shock_pct_by_scenario: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.scenarios:
            raise InvariantViolation("scenario list must be non-empty")
        if self.workers < 1:
            raise InvariantViolation("worker count must be >= 1")
        for which, p in (
            ("countries", self.countries_path),
            ("contacts", self.contacts_path),
            ("severity", self.severity_path),
            ("economics", self.economics_path),
        ):
            if not Path(p).is_file():
                raise InputError(f"{which} file does not exist", path=p)


_DEFAULT_VALUATION = {
    "base_vsl_usd": 9.6e6,
    "reference_income_usd": 65000.0,
    "elasticity": 1.0,
    "floor_usd": 0.0,
}


def load_run_config(path, *, countries=None, workers=None, output_dir=None) -> RunConfig:
    """Parse a run-config JSON file; keyword arguments override its fields.

    File paths in the config are resolved relative to the config file's
    directory. Omitted input-file keys fall back to the packaged defaults.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError("config file does not exist", path=path) from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config is not valid JSON: {exc}", path=path) from None

    base = path.parent

    def resolve(key):
        if key in raw and raw[key] is not None:
            return (base / raw[key]).resolve()
        return packaged_data_path(key)

    scenarios_cfg = raw.get("scenarios", "all")
    if scenarios_cfg == "all":
        scenarios = default_scenarios()
    else:
        scenarios = tuple(scenario_from_config(s) for s in scenarios_cfg)

    val_cfg = dict(_DEFAULT_VALUATION)
    val_cfg.update(raw.get("valuation", {}))
    valuation = ValuationParams(
        base_vsl_usd=float(val_cfg["base_vsl_usd"]),
        reference_income_usd=float(val_cfg["reference_income_usd"]),
        income_elasticity=float(val_cfg["elasticity"]),
        vsl_floor_usd=float(val_cfg["floor_usd"]),
    )

    epi_cfg = raw.get("epi", {})
    filt = raw.get("countries_filter", "all")
    if countries is not None:
        filt = countries
    country_filter = None if filt == "all" else tuple(filt)

    out_dir = output_dir if output_dir is not None else raw.get("output_dir", "out")

    return RunConfig(
        countries_path=resolve("countries"),
        contacts_path=resolve("contacts"),
        severity_path=resolve("severity"),
        economics_path=resolve("economics"),
        scenarios=scenarios,
        valuation=valuation,
        output_dir=Path(out_dir) if output_dir is not None else (base / out_dir).resolve(),
        r0_target=float(epi_cfg.get("r0_target", 3.0)),
        dt=float(epi_cfg.get("dt", 0.25)),
        horizon=float(epi_cfg.get("horizon", 365.0)),
        seed_infections=float(epi_cfg.get("seed_infections", 20.0)),
        country_filter=country_filter,
        workers=int(workers if workers is not None else raw.get("workers", 1)),
        gdp_shock_pct_by_scenario=dict(raw.get("gdp_shock_pct_by_scenario", {})),
    )


def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(config: RunConfig) -> str:
    """Hash of everything that can change the scientific output."""
    payload = {
        "files": {
            key: _sha256_file(getattr(config, f"{key}_path"))
            for key in ("countries", "contacts", "severity", "economics")
        },
        "scenarios": [s.to_config() for s in config.scenarios],
        "epi": {
            "r0_target": config.r0_target,
            "dt": config.dt,
            "horizon": config.horizon,
            "seed_infections": config.seed_infections,
        },
        "valuation": {
            "base_vsl_usd": config.valuation.base_vsl_usd,
            "reference_income_usd": config.valuation.reference_income_usd,
            "elasticity": config.valuation.income_elasticity,
            "floor_usd": config.valuation.vsl_floor_usd,
        },
        "country_filter": "all" if config.country_filter is None else sorted(config.country_filter),
        "gdp_shock_pct_by_scenario": config.gdp_shock_pct_by_scenario,
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class SweepRow:
    """One (country, scenario) result: trajectory summary plus valuation."""

    iso3: str
    name: str
    income_group: str
    scenario: str
    population: float
    elderly_share: float
    informal_employment_share: float | None
    total_deaths: float
    attack_rate: float
    peak_gen_demand: float
    peak_gen_occupancy: float
    peak_icu_demand: float
    peak_icu_occupancy: float
    trigger_time: float | None
    burned_out: bool
    fallback_contacts: bool
    beta: float
    vsl_usd: float
    vsl_loss_usd: float
    loss_pct_gdp: float
    marginal_value_pct_gdp: float
    contraction_infant_deaths_low: float | None
    contraction_infant_deaths_high: float | None


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    config_hash: str
    metadata: dict
    failures: tuple[tuple[str, str], ...] = ()


def _scenario_sort_key(kind: str) -> int:
    return [k.value for k in SCENARIO_ORDER].index(kind) if kind in {k.value for k in SCENARIO_ORDER} else len(SCENARIO_ORDER)


def _simulate_task(args):
    """Worker entry point: one (country, scenario) simulation -> summary tuple."""
    profile, contacts, params, scenario = args
    traj = simulate(profile, contacts, params, scenario)
    return (
        total_deaths(traj),
        attack_rate(traj),
        float(traj.gen_demand.max()),
        float(traj.gen_occupancy.max()),
        float(traj.icu_demand.max()),
        float(traj.icu_occupancy.max()),
        traj.trigger_time,
        traj.burned_out,
        traj.beta,
    )


def run_sweep(config: RunConfig) -> SweepResult:
    """Run every (country, scenario) pair and attach valuation metrics.

    Output rows are sorted by (country, scenario order) and independent of
    worker count. Countries that fail (bad economics, numerical failure) are
    reported via :class:`PartialFailure`, which still carries the completed
    result for all other countries.
    """
    t_start = time.time()
    notices: list[str] = []

    profiles = load_country_profiles(config.countries_path)
    if config.country_filter is not None:
        wanted = set(config.country_filter)
        unknown = wanted - {p.country_id for p in profiles}
        if unknown:
            raise UnknownCountry(f"countries not in input file: {sorted(unknown)}")
        profiles = [p for p in profiles if p.country_id in wanted]
    profiles.sort(key=lambda p: p.country_id)

    contact_tables = load_contact_table(config.contacts_path)
    severity = load_severity_profile(config.severity_path)
    economics = load_economics(config.economics_path)

    scenarios = list(config.scenarios)
    if not any(s.kind is ScenarioKind.UNMITIGATED for s in scenarios):
        scenarios.insert(0, PolicyScenario(kind=ScenarioKind.UNMITIGATED))
        notices.append("unmitigated scenario auto-added (required as the marginal-value baseline)")
        log.info("auto-added unmitigated scenario to the sweep")

    params = EpiParams(
        severity=severity,
        r0_target=config.r0_target,
        dt=config.dt,
        horizon=config.horizon,
        seed_infections=config.seed_infections,
    )

    # balance each country's matrix once; record fallback usage
    matrices: dict[str, ContactMatrix] = {}
    fallback_used: list[str] = []
    for p in profiles:
        source = p.country_id if p.country_id in contact_tables else FALLBACK_CONTACT_ID
        if source == FALLBACK_CONTACT_ID:
            if FALLBACK_CONTACT_ID not in contact_tables:
                raise UnknownCountry(
                    f"no contact matrix for {p.country_id} and no fallback in {config.contacts_path}"
                )
            fallback_used.append(p.country_id)
        matrices[p.country_id] = balance_contact_matrix(
            contact_tables[source], p.population_by_band, source_id=source
        )
    if fallback_used:
        log.info("fallback contact matrix used for %d countries", len(fallback_used))

    tasks = [(p, s) for p in profiles for s in scenarios]
    task_args = [(p, matrices[p.country_id], params, s) for p, s in tasks]
    if config.workers == 1:
        summaries = [_run_one_safe(a) for a in task_args]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            summaries = list(pool.map(_run_one_safe, task_args, chunksize=8))

    # group by country; a failure in any scenario fails the whole country
    failures: dict[str, str] = {}
    by_country: dict[str, dict[str, tuple]] = {}
    for (p, s), outcome in zip(tasks, summaries):
        ok, payload = outcome
        if not ok:
            failures.setdefault(p.country_id, payload)
        else:
            by_country.setdefault(p.country_id, {})[s.kind.value] = payload

    rows: list[SweepRow] = []
    not_burned_out: list[str] = []
    fallback_set = set(fallback_used)
    for p in profiles:
        if p.country_id in failures:
            continue
        try:
            rows.extend(
                _value_country(
                    p, by_country[p.country_id], scenarios, economics, config,
                    not_burned_out, fallback_set,
                )
            )
        except EpiValueError as exc:
            failures[p.country_id] = f"{type(exc).__name__}: {exc}"

    if not_burned_out:
        notices.append(
            "epidemic not burned out by horizon end (daily incidence >= 1) for: "
            + ", ".join(sorted(not_burned_out))
        )

    rows.sort(key=lambda r: (r.iso3, _scenario_sort_key(r.scenario)))
    failure_items = tuple(sorted(failures.items()))

    chash = config_hash(config)
    metadata = {
        "config_hash": chash,
        "epivalue_version": __version__,
        "input_files": {
            key: {
                "path": str(getattr(config, f"{key}_path")),
                "sha256": _sha256_file(getattr(config, f"{key}_path")),
            }
            for key in ("countries", "contacts", "severity", "economics")
        },
        "scenarios": [s.to_config() for s in scenarios],
        "epi": {
            "r0_target": config.r0_target,
            "dt": config.dt,
            "horizon": config.horizon,
            "seed_infections": config.seed_infections,
        },
        "valuation": {
            "base_vsl_usd": config.valuation.base_vsl_usd,
            "reference_income_usd": config.valuation.reference_income_usd,
            "elasticity": config.valuation.income_elasticity,
            "floor_usd": config.valuation.vsl_floor_usd,
        },
        "n_countries": len(profiles),
        "n_rows": len(rows),
        "fallback_contact_countries": sorted(fallback_used),
        "notices": notices,
        "failures": {iso3: reason for iso3, reason in failure_items},
        # VSL caveat: transfers extrapolate tradeoffs measured on ~1e-4 risk
        # changes to far larger epidemic risks; treat absolute levels as
        # sensitive to that assumption. See README.
        "vsl_sensitivity_flag": True,
        # non-deterministic by design; excluded from the determinism contract
        "timestamp_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t_start)),
        "workers": config.workers,
        "elapsed_seconds": round(time.time() - t_start, 3),
    }
    result = SweepResult(
        rows=tuple(rows), config_hash=chash, metadata=metadata, failures=failure_items
    )
    if failure_items:
        raise PartialFailure(result, list(failure_items))
    return result


def _run_one_safe(args):
    try:
        return True, _simulate_task(args)
    except NonFiniteState as exc:
        return False, f"NonFiniteState: {exc}"
    except EpiValueError as exc:
        return False, f"{type(exc).__name__}: {exc}"


def _value_country(
    profile: CountryProfile,
    summaries: dict[str, tuple],
    scenarios: list[PolicyScenario],
    economics: dict[str, EconomicIndicators],
    config: RunConfig,
    not_burned_out: list[str],
    fallback_set: set[str],
) -> list[SweepRow]:
    iso3 = profile.country_id
    econ = economics.get(iso3)
    gdp = econ.gdp_usd if econ is not None else profile.gdp_total_usd
    gni = econ.gni_pc_usd if econ is not None else profile.gni_per_capita_usd
    if gdp <= 0:
        raise NonPositiveGDP(f"{iso3} has no positive GDP in economics or countries file")
    if gni <= 0:
        raise NonPositiveIncome(f"{iso3} has no positive GNI per capita")

    vsl = transfer_vsl(config.valuation, gni)

    partial: dict[str, ValuationResult] = {}
    for s in scenarios:
        deaths = summaries[s.kind.value][0]
        loss = value_mortality(deaths, vsl)
        partial[s.kind.value] = ValuationResult(
            country_id=iso3,
            scenario=s.kind.value,
            total_deaths=deaths,
            vsl_usd=vsl,
            vsl_loss_usd=loss,
            loss_pct_gdp=welfare_loss_pct_gdp(loss, gdp),
            marginal_value_pct_gdp=0.0,
        )
    baseline = partial[ScenarioKind.UNMITIGATED.value]

    share_65 = elderly_share(profile)
    rows = []
    for s in scenarios:
        kind = s.kind.value
        val = partial[kind]
        margin = marginal_value(val, baseline, gdp)
        shock = config.gdp_shock_pct_by_scenario.get(kind)
        contraction = None
        if shock is not None:
            if profile.annual_births is None:
                raise MissingField(
                    f"{iso3}: gdp shock configured for {kind} but births column is empty"
                )
            contraction = contraction_mortality(float(shock), profile.annual_births)
        (
            deaths,
            attack,
            peak_gd,
            peak_go,
            peak_id,
            peak_io,
            trig,
            burned,
            beta,
        ) = summaries[kind]
        if not burned:
            not_burned_out.append(f"{iso3}/{kind}")
        rows.append(
            SweepRow(
                iso3=iso3,
                name=profile.name,
                income_group=profile.income_group.value,
                scenario=kind,
                population=profile.total_population,
                elderly_share=share_65,
                informal_employment_share=profile.informal_employment_share,
                total_deaths=deaths,
                attack_rate=attack,
                peak_gen_demand=peak_gd,
                peak_gen_occupancy=peak_go,
                peak_icu_demand=peak_id,
                peak_icu_occupancy=peak_io,
                trigger_time=trig,
                burned_out=burned,
                fallback_contacts=iso3 in fallback_set,
                beta=beta,
                vsl_usd=vsl,
                vsl_loss_usd=val.vsl_loss_usd,
                loss_pct_gdp=val.loss_pct_gdp,
                marginal_value_pct_gdp=margin,
                contraction_infant_deaths_low=contraction[0] if contraction else None,
                contraction_infant_deaths_high=contraction[1] if contraction else None,
            )
        )
    return rows


RESULTS_CSV = "results.csv"
METADATA_JSON = "run_metadata.json"

_RESULT_COLUMNS = [
    "iso3",
    "name",
    "income_group",
    "scenario",
    "population",
    "elderly_share",
    "informal_employment_share",
    "total_deaths",
    "attack_rate",
    "peak_gen_demand",
    "peak_gen_occupancy",
    "peak_icu_demand",
    "peak_icu_occupancy",
    "trigger_time",
    "burned_out",
    "fallback_contacts",
    "beta",
    "vsl_usd",
    "vsl_loss_usd",
    "loss_pct_gdp",
    "marginal_value_pct_gdp",
    "contraction_infant_deaths_low",
    "contraction_infant_deaths_high",
]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results(result: SweepResult, out_dir) -> Path:
    """Write results.csv (deterministic) and run_metadata.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / RESULTS_CSV
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# config_hash={result.config_hash}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_RESULT_COLUMNS)
        for r in result.rows:
            writer.writerow([_cell(getattr(r, c)) for c in _RESULT_COLUMNS])
    with open(out_dir / METADATA_JSON, "w", encoding="utf-8") as fh:
        json.dump(result.metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def rows_as_dicts(result: SweepResult) -> list[dict]:
    """Sweep rows as plain dicts, the form the report functions consume."""
    return [dataclasses.asdict(r) for r in result.rows]


def load_results(results_dir) -> tuple[list[dict], str]:
    """Read back results.csv; returns (rows as typed dicts, config hash)."""
    path = Path(results_dir) / RESULTS_CSV
    if not path.is_file():
        raise InputError("no results.csv in directory", path=path)
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline().strip()
        chash = first.split("=", 1)[1] if first.startswith("# config_hash=") else ""
        reader = csv.DictReader(fh)
        rows = []
        for raw in reader:
            row: dict = dict(raw)
            for key in ("burned_out", "fallback_contacts"):
                row[key] = raw[key] == "true"
            for key in _RESULT_COLUMNS:
                if key in ("iso3", "name", "income_group", "scenario", "burned_out", "fallback_contacts"):
                    continue
                row[key] = float(raw[key]) if raw[key] != "" else None
            rows.append(row)
    return rows, chash
