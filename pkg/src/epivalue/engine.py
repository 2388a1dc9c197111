"""Deterministic age-structured SEIR simulator with a hospital pathway.

Disease progression per age band:

    S -> E -> (I_mild | I_case) -> ...
    I_mild recovers after the infectious period.
    I_case enters hospital demand after the infectious period, split into
    general-ward and ICU demand by ``p_icu``. Admission is rationed against
    free capacity (proportional across bands, no age prioritization);
    treated/untreated status is assigned at admission and kept for the whole
    stay. Each pathway exits to R or D with its treated/untreated death
    probability.

Integration is forward Euler at a fixed ``dt`` on continuous person counts.
``simulate`` is a pure function of its inputs: it shares no mutable state and
is safe to call from many worker processes at once.

Conventions fixed for reproducibility:

- Transmission: lambda_i(t) = beta * sum_j m_ij(t) * (I_mild_j + I_case_j) / N_j
  with m_ij(t) the scenario-scaled contact rate and N_j the *alive*
  population of band j (the dead are removed from mixing denominators).
- Next-generation matrix: K_ij = beta * d_I * c_ij * N_i / N_j, whose
  spectral radius is R0; the homogeneous 1-band case reduces to
  beta * c * d_I = R0.
- ICU beds are a subset of the hospital bed total (hence the
  hospital_beds >= icu_beds invariant); general-ward capacity is the
  difference. Admissions see the beds free at the start of the step.
- Suppression triggers are evaluated once per simulated day on the
  trailing-7-day death rate and latch once fired.

The hot loop is compiled with numba (cached to disk); it runs in plain
Python when numba's JIT is disabled, which is handy for debugging.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .country_data import ContactMatrix, CountryProfile, SeverityProfile
from .errors import InvalidR0, InvariantViolation, NonFiniteState, SingularContactMatrix
from .policy import PolicyScenario
from .trajectory import Compartment, EpidemicTrajectory, N_COMPARTMENTS

#: Default bands seeded with the initial infections (ages 20-49).
DEFAULT_SEED_BANDS = tuple(range(4, 10))


@dataclass(frozen=True)
class EpiParams:
    """Simulation parameters. ``beta`` is calibrated, not user-set: leave it
    None and it is derived from ``r0_target`` via the next-generation matrix.
    """

    severity: SeverityProfile
    r0_target: float = 3.0
    beta: float | None = None
    dt: float = 0.25
    horizon: float = 365.0
    seed_infections: float = 20.0
    seed_bands: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.r0_target <= 0:
            raise InvalidR0(f"r0_target must be positive, got {self.r0_target}")
        if self.dt <= 0:
            raise InvariantViolation("dt must be positive")
        if self.horizon < self.dt:
            raise InvariantViolation("horizon must be at least one step")
        if self.seed_infections < 1:
            raise InvariantViolation("seed_infections must be >= 1")


def next_generation_matrix(
    contacts: ContactMatrix, beta: float, infectious_period: float, pop: np.ndarray | None = None
) -> np.ndarray:
    """K_ij = beta * d_I * c_ij * N_i / N_j: expected infections in band i
    caused by one infectious individual in band j over their infectious period.
    """
    pop = contacts.reference_population if pop is None else np.asarray(pop, dtype=np.float64)
    c = contacts.entries
    return beta * infectious_period * c * (pop[:, None] / pop[None, :])


def spectral_radius(m: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(m))))


def calibrate_beta(
    contacts: ContactMatrix, params: EpiParams, pop: np.ndarray | None = None
) -> float:
    """Transmission coefficient giving the target R0.

    beta = r0_target / rho(K-hat) with K-hat the next-generation matrix at
    beta = 1; the NGM evaluated at the returned beta has spectral radius
    r0_target (linearity in beta makes this exact up to eigensolver
    round-off). The homogeneous case recovers beta = R0 / (c * d_I) exactly.
    """
    if params.r0_target <= 0:
        raise InvalidR0(f"r0_target must be positive, got {params.r0_target}")
    d_i = params.severity.infectious_period
    khat = next_generation_matrix(contacts, 1.0, d_i, pop)
    rho = spectral_radius(khat)
    if rho <= 0.0:
        raise SingularContactMatrix("contact matrix has spectral radius 0")
    return params.r0_target / rho


def allocate_capacity(
    demand_gen,
    demand_icu,
    profile: CountryProfile,
    occupied_gen: float = 0.0,
    occupied_icu: float = 0.0,
):
    """Ration new admissions against free beds, proportionally across bands.

    treated = demand * min(1, free / total_demand); untreated is the rest.
    General-ward capacity is hospital_beds - icu_beds. Demands may be scalars
    or per-band arrays; the output matches the input shape.

    Returns (treated_gen, untreated_gen, treated_icu, untreated_icu).
    """
    free_gen = max((profile.hospital_beds - profile.icu_beds) - occupied_gen, 0.0)
    free_icu = max(profile.icu_beds - occupied_icu, 0.0)
    tg, ug = _ration(demand_gen, free_gen)
    ti, ui = _ration(demand_icu, free_icu)
    return tg, ug, ti, ui


def _ration(demand, free: float):
    arr = np.asarray(demand, dtype=np.float64)
    if np.any(arr < 0):
        raise InvariantViolation("demand must be non-negative")
    total = float(arr.sum())
    frac = 1.0 if total <= free else free / total
    treated = arr * frac
    untreated = arr - treated
    if arr.ndim == 0:
        return float(treated), float(untreated)
    return treated, untreated


# Compartment rows inside the kernel state array (mirrors trajectory.Compartment).
_S, _E, _IM, _IC, _HGT, _HGU, _UT, _UU, _R, _D = range(10)


@njit(cache=True)
def _euler_kernel(
    state0,
    pop,
    m_base,
    m_active,
    active_from_start,
    threshold,
    duration,
    beta,
    dt,
    n_steps,
    p_hosp,
    p_icu,
    dh_t,
    dh_u,
    di_t,
    di_u,
    rate_e,
    rate_i,
    rate_g,
    rate_u,
    cap_gen,
    cap_icu,
):
    n = pop.shape[0]
    n_days = int(np.ceil(n_steps * dt - 1e-9))
    if n_days < 1:
        n_days = 1

    states = np.zeros((n_steps + 1, 10, n))
    daily_new = np.zeros((n_days, n))
    gen_dem = np.zeros(n_steps + 1)
    gen_occ = np.zeros(n_steps + 1)
    icu_dem = np.zeros(n_steps + 1)
    icu_occ = np.zeros(n_steps + 1)
    active_flags = np.zeros(n_steps + 1, dtype=np.uint8)
    cum_daily = np.zeros(n_days + 1)

    state = state0.copy()
    pop_total = pop.sum()

    inf_frac = np.zeros(n)
    lam = np.zeros(n)
    out_e = np.zeros(n)
    out_im = np.zeros(n)
    out_ic = np.zeros(n)
    dem_g = np.zeros(n)
    dem_u = np.zeros(n)

    for c in range(10):
        for i in range(n):
            states[0, c, i] = state[c, i]
    gen_occ[0] = state[_HGT].sum()
    gen_dem[0] = gen_occ[0] + state[_HGU].sum()
    icu_occ[0] = state[_UT].sum()
    icu_dem[0] = icu_occ[0] + state[_UU].sum()

    fired = False
    trigger_day = -1.0
    measure_start = 0.0 if active_from_start else np.inf

    status = 0
    bad_step = -1

    for k in range(n_steps):
        t = k * dt
        active = t >= measure_start - 1e-9 and t < measure_start + duration - 1e-9
        active_flags[k] = 1 if active else 0
        m = m_active if active else m_base

        # force of infection; the dead are removed from mixing denominators
        for j in range(n):
            alive = pop[j] - state[_D, j]
            if alive > 0.0:
                inf_frac[j] = (state[_IM, j] + state[_IC, j]) / alive
            else:
                inf_frac[j] = 0.0
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += m[i, j] * inf_frac[j]
            lam[i] = beta * acc

        # progression outflows and new hospital demand
        tot_dem_g = 0.0
        tot_dem_u = 0.0
        for i in range(n):
            out_e[i] = state[_E, i] * rate_e * dt
            out_im[i] = state[_IM, i] * rate_i * dt
            out_ic[i] = state[_IC, i] * rate_i * dt
            d_u = out_ic[i] * p_icu[i]
            dem_u[i] = d_u
            dem_g[i] = out_ic[i] - d_u
            tot_dem_g += dem_g[i]
            tot_dem_u += d_u

        # proportional rationing against beds free at the start of the step
        occ_g = state[_HGT].sum()
        occ_u = state[_UT].sum()
        free_g = cap_gen - occ_g
        if free_g < 0.0:
            free_g = 0.0
        free_u = cap_icu - occ_u
        if free_u < 0.0:
            free_u = 0.0
        r_g = 1.0 if tot_dem_g <= free_g else free_g / tot_dem_g
        r_u = 1.0 if tot_dem_u <= free_u else free_u / tot_dem_u

        day0 = int(t + 1e-9)
        for i in range(n):
            new_e = lam[i] * state[_S, i] * dt
            to_case = out_e[i] * p_hosp[i]
            to_mild = out_e[i] - to_case

            adm_gt = dem_g[i] * r_g
            adm_gu = dem_g[i] - adm_gt
            adm_ut = dem_u[i] * r_u
            adm_uu = dem_u[i] - adm_ut

            o_gt = state[_HGT, i] * rate_g * dt
            o_gu = state[_HGU, i] * rate_g * dt
            o_ut = state[_UT, i] * rate_u * dt
            o_uu = state[_UU, i] * rate_u * dt
            die_gt = o_gt * dh_t[i]
            die_gu = o_gu * dh_u[i]
            die_ut = o_ut * di_t[i]
            die_uu = o_uu * di_u[i]

            state[_S, i] -= new_e
            state[_E, i] += new_e - out_e[i]
            state[_IM, i] += to_mild - out_im[i]
            state[_IC, i] += to_case - out_ic[i]
            state[_HGT, i] += adm_gt - o_gt
            state[_HGU, i] += adm_gu - o_gu
            state[_UT, i] += adm_ut - o_ut
            state[_UU, i] += adm_uu - o_uu
            state[_R, i] += (
                out_im[i] + (o_gt - die_gt) + (o_gu - die_gu) + (o_ut - die_ut) + (o_uu - die_uu)
            )
            state[_D, i] += die_gt + die_gu + die_ut + die_uu

            daily_new[day0, i] += new_e

        # numerical sanity: negative or non-finite means dt is too large
        for c in range(10):
            for i in range(n):
                v = state[c, i]
                if not (v >= 0.0 and v < np.inf):
                    status = 1
                    bad_step = k
        if status != 0:
            break

        for c in range(10):
            for i in range(n):
                states[k + 1, c, i] = state[c, i]
        gen_occ[k + 1] = state[_HGT].sum()
        gen_dem[k + 1] = gen_occ[k + 1] + state[_HGU].sum()
        icu_occ[k + 1] = state[_UT].sum()
        icu_dem[k + 1] = icu_occ[k + 1] + state[_UU].sum()

        # once-daily bookkeeping: record deaths, evaluate the trigger (latching)
        t1 = (k + 1) * dt
        d1 = int(t1 + 1e-9)
        if d1 > day0:
            d_tot = state[_D].sum()
            for d in range(day0 + 1, min(d1, n_days) + 1):
                cum_daily[d] = d_tot
                if not fired and threshold >= 0.0:
                    lo = d - 7 if d >= 7 else 0
                    rate = (cum_daily[d] - cum_daily[lo]) / pop_total * 1e5
                    if rate >= threshold and rate > 0.0:
                        fired = True
                        trigger_day = float(d)
                        if not active_from_start:
                            measure_start = float(d)

    t_end = n_steps * dt
    end_active = t_end >= measure_start - 1e-9 and t_end < measure_start + duration - 1e-9
    active_flags[n_steps] = 1 if end_active else 0

    return (
        states,
        daily_new,
        gen_dem,
        gen_occ,
        icu_dem,
        icu_occ,
        active_flags,
        trigger_day,
        status,
        bad_step,
    )


def integrate(
    pop: np.ndarray,
    contacts: ContactMatrix,
    params: EpiParams,
    scenario: PolicyScenario,
    hospital_beds: float = 0.0,
    icu_beds: float = 0.0,
    scenario_label: str | None = None,
) -> EpidemicTrajectory:
    """Run the simulator on raw arrays (any band count).

    This is the band-count-agnostic core behind :func:`simulate`; reduced
    models (1- or 2-band) used in calibration checks call it directly.
    """
    pop = np.asarray(pop, dtype=np.float64)
    n = pop.shape[0]
    sev = params.severity
    if contacts.n_bands != n or sev.n_bands != n:
        raise InvariantViolation(
            f"band mismatch: pop has {n}, contacts {contacts.n_bands}, severity {sev.n_bands}"
        )
    if hospital_beds < icu_beds:
        raise InvariantViolation("hospital_beds must be >= icu_beds")

    beta = params.beta if params.beta is not None else calibrate_beta(contacts, params, pop)
    dt = params.dt
    n_steps = int(round(params.horizon / dt))

    # explicit Euler stays non-negative iff no outflow rate empties a
    # compartment within one step; check the constant rates up front
    for label, period in (
        ("latent_period", sev.latent_period),
        ("infectious_period", sev.infectious_period),
        ("hosp_stay_general", sev.hosp_stay_general),
        ("hosp_stay_icu", sev.hosp_stay_icu),
    ):
        if dt / period > 1.0:
            raise NonFiniteState(
                f"dt={dt} exceeds {label}={period}; reduce dt below the shortest duration"
            )

    seed_bands = params.seed_bands
    if seed_bands is None:
        seed_bands = tuple(b for b in DEFAULT_SEED_BANDS if b < n) or tuple(range(n))
    weights = np.zeros(n)
    weights[list(seed_bands)] = pop[list(seed_bands)]
    if weights.sum() <= 0:
        weights = pop.astype(np.float64).copy()
    seeds = params.seed_infections * weights / weights.sum()
    if np.any(seeds > pop):
        raise InvariantViolation("seed_infections exceed the population of a seeded band")

    state0 = np.zeros((N_COMPARTMENTS, n))
    state0[Compartment.S] = pop - seeds
    state0[Compartment.I_CASE] = seeds * sev.p_hosp
    state0[Compartment.I_MILD] = seeds - state0[Compartment.I_CASE]

    scale_active = scenario.scaling_matrix(n, active=True)
    m_base = np.ascontiguousarray(contacts.entries)
    m_active = np.ascontiguousarray(contacts.entries * scale_active)
    threshold = scenario.trigger_threshold if scenario.triggered else -1.0
    duration = np.inf if scenario.duration is None else float(scenario.duration)
    cap_gen = float(hospital_beds - icu_beds)
    cap_icu = float(icu_beds)

    (
        states,
        daily_new,
        gen_dem,
        gen_occ,
        icu_dem,
        icu_occ,
        active_flags,
        trigger_day,
        status,
        bad_step,
    ) = _euler_kernel(
        state0,
        pop,
        m_base,
        m_active,
        bool(scenario.active_from_start),
        float(threshold),
        float(duration),
        float(beta),
        float(dt),
        n_steps,
        np.ascontiguousarray(sev.p_hosp),
        np.ascontiguousarray(sev.p_icu),
        np.ascontiguousarray(sev.d_hosp_treated),
        np.ascontiguousarray(sev.d_hosp_untreated),
        np.ascontiguousarray(sev.d_icu_treated),
        np.ascontiguousarray(sev.d_icu_untreated),
        1.0 / sev.latent_period,
        1.0 / sev.infectious_period,
        1.0 / sev.hosp_stay_general,
        1.0 / sev.hosp_stay_icu,
        cap_gen,
        cap_icu,
    )
    if status != 0:
        raise NonFiniteState(
            f"state went negative or non-finite at step {bad_step} "
            f"(t={bad_step * dt:.2f}d); dt={dt} is too large for these parameters"
        )

    scale_diag = np.ones((n_steps + 1, n))
    active_diag = np.diag(scale_active)
    scale_diag[active_flags.astype(bool)] = active_diag

    return EpidemicTrajectory(
        times=np.arange(n_steps + 1) * dt,
        states=states,
        daily_new_infections=daily_new,
        gen_demand=gen_dem,
        gen_occupancy=gen_occ,
        icu_demand=icu_dem,
        icu_occupancy=icu_occ,
        contact_scale_by_band=scale_diag,
        trigger_time=None if trigger_day < 0 else float(trigger_day),
        population=pop,
        gen_capacity=cap_gen,
        icu_capacity=cap_icu,
        scenario_kind=scenario_label or scenario.kind.value,
        beta=float(beta),
    )


def simulate(
    profile: CountryProfile,
    contacts: ContactMatrix,
    params: EpiParams,
    scenario: PolicyScenario,
) -> EpidemicTrajectory:
    """Simulate one country under one policy scenario."""
    return integrate(
        profile.population_by_band,
        contacts,
        params,
        scenario,
        hospital_beds=profile.hospital_beds,
        icu_beds=profile.icu_beds,
    )
