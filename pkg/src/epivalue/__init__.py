"""Age-structured epidemic scenario simulator with mortality valuation.

Public API re-exported here; see the module docstrings for the details of
each layer (country_data -> policy -> engine -> valuation -> sweep -> report).
"""

__version__ = "0.1.0"

from .country_data import (
    BAND_EDGES,
    ELDERLY_CUTOFF_BAND,
    N_BANDS,
    ContactMatrix,
    CountryProfile,
    EconomicIndicators,
    IncomeGroup,
    SeverityProfile,
    balance_contact_matrix,
    elderly_share,
    load_contact_matrix,
    load_contact_table,
    load_country_profiles,
    load_economics,
    load_severity_profile,
)
from .engine import (
    EpiParams,
    allocate_capacity,
    calibrate_beta,
    integrate,
    next_generation_matrix,
    simulate,
    spectral_radius,
)
from .policy import (
    PolicyScenario,
    ScenarioKind,
    check_trigger,
    contact_scaling,
    default_scenarios,
    make_scenario,
    trigger_time,
)
from .trajectory import (
    Compartment,
    CompartmentState,
    EpidemicTrajectory,
    attack_rate,
    total_deaths,
    weekly_death_rate_per_100k,
    write_trajectory_csv,
    write_trajectory_summary,
)
from .valuation import (
    ValuationParams,
    ValuationResult,
    contraction_mortality,
    marginal_value,
    transfer_vsl,
    value_mortality,
    welfare_loss_pct_gdp,
)
from .sweep import (
    RunConfig,
    SweepResult,
    SweepRow,
    config_hash,
    load_results,
    load_run_config,
    packaged_data_path,
    rows_as_dicts,
    run_sweep,
    write_results,
)
from .report import emit_figure_data, emit_marginal_table, write_marginal_table
from . import errors
