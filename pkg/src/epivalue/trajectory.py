"""Epidemic trajectory container and summary operations.

A trajectory holds the full compartment time series of one simulation run
plus the bookkeeping series (incidence, bed demand vs occupancy, applied
contact scaling, trigger time). It is produced by :func:`epivalue.engine.simulate`
and consumed by the valuation and reporting layers.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from enum import IntEnum

import numpy as np


class Compartment(IntEnum):
    """Row index into the per-step state array."""

    S = 0
    E = 1
    I_MILD = 2
    I_CASE = 3
    H_GEN_TREATED = 4
    H_GEN_UNTREATED = 5
    ICU_TREATED = 6
    ICU_UNTREATED = 7
    R = 8
    D = 9


N_COMPARTMENTS = len(Compartment)


@dataclass(frozen=True, eq=False)
class CompartmentState:
    """One time slice: per-band person counts for every compartment."""

    values: np.ndarray  # (N_COMPARTMENTS, n_bands)

    def __getattr__(self, name):
        try:
            comp = Compartment[name]
        except KeyError:
            raise AttributeError(name) from None
        return self.values[comp]

    def band_totals(self) -> np.ndarray:
        """Sum over compartments: the (constant) per-band population."""
        return self.values.sum(axis=0)


@dataclass(frozen=True, eq=False)
class EpidemicTrajectory:
    """Full output of one simulation run.

    ``states`` has shape (n_steps + 1, N_COMPARTMENTS, n_bands); step 0 is the
    seeded initial condition. Demand/occupancy series count people currently
    needing (demand) versus holding (occupancy) a general bed or ICU place.
    ``contact_scale_by_band`` records, per grid point, the multiplier applied
    to each band's own-band contacts (the diagonal of the pair-scaling
    matrix). ``trigger_time`` is the day a suppression trigger fired, if any.
    """

    times: np.ndarray
    states: np.ndarray
    daily_new_infections: np.ndarray  # (n_days, n_bands)
    gen_demand: np.ndarray
    gen_occupancy: np.ndarray
    icu_demand: np.ndarray
    icu_occupancy: np.ndarray
    contact_scale_by_band: np.ndarray  # (n_steps + 1, n_bands)
    trigger_time: float | None
    population: np.ndarray  # initial per-band population
    gen_capacity: float
    icu_capacity: float
    scenario_kind: str
    beta: float

    @property
    def n_bands(self) -> int:
        return self.states.shape[2]

    def state_at(self, step: int) -> CompartmentState:
        return CompartmentState(self.states[step])

    @property
    def cumulative_deaths(self) -> np.ndarray:
        """Total deaths (all bands) at every grid point."""
        return self.states[:, Compartment.D, :].sum(axis=1)

    def deaths_by_band(self) -> np.ndarray:
        return self.states[-1, Compartment.D, :]

    @property
    def burned_out(self) -> bool:
        """True when the epidemic has run its course: <1 new infection on the last day."""
        return float(self.daily_new_infections[-1].sum()) < 1.0


def total_deaths(traj: EpidemicTrajectory) -> float:
    """Final cumulative deaths summed over bands."""
    return float(traj.states[-1, Compartment.D, :].sum())


def attack_rate(traj: EpidemicTrajectory) -> float:
    """Cumulative fraction of the population ever infected, (N - S_final) / N."""
    n_total = traj.population.sum()
    s_final = traj.states[-1, Compartment.S, :].sum()
    return float((n_total - s_final) / n_total)


def _cum_deaths_at(traj: EpidemicTrajectory, t: float) -> float:
    """Cumulative deaths at the last grid point <= t (tiny slack for float grids)."""
    idx = int(np.searchsorted(traj.times, t + 1e-9, side="right")) - 1
    idx = max(0, min(idx, len(traj.times) - 1))
    return float(traj.cumulative_deaths[idx])


def weekly_death_rate_per_100k(traj: EpidemicTrajectory, t: float) -> float:
    """Deaths per 100,000 population over the trailing 7 days ending at t.

    For t < 7 the window is [0, t]. The denominator is the initial total
    population.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    lo = max(t - 7.0, 0.0)
    window_deaths = _cum_deaths_at(traj, t) - _cum_deaths_at(traj, lo)
    return float(window_deaths / traj.population.sum() * 1e5)


def peak_demand(traj: EpidemicTrajectory) -> tuple[float, float]:
    """Peak general-bed and ICU demand over the run."""
    return float(traj.gen_demand.max()), float(traj.icu_demand.max())


_CSV_COLUMNS = (
    ["step", "time", "band"]
    + [c.name for c in Compartment]
    + ["contact_scale", "gen_demand", "gen_occupancy", "icu_demand", "icu_occupancy"]
)


def write_trajectory_csv(traj: EpidemicTrajectory, path) -> None:
    """Serialize the full trajectory, one row per step per band."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_CSV_COLUMNS)
        for k, t in enumerate(traj.times):
            for b in range(traj.n_bands):
                writer.writerow(
                    [k, repr(float(t)), b]
                    + [repr(float(traj.states[k, c, b])) for c in Compartment]
                    + [
                        repr(float(traj.contact_scale_by_band[k, b])),
                        repr(float(traj.gen_demand[k])),
                        repr(float(traj.gen_occupancy[k])),
                        repr(float(traj.icu_demand[k])),
                        repr(float(traj.icu_occupancy[k])),
                    ]
                )


def summary_dict(traj: EpidemicTrajectory) -> dict:
    """Compact JSON-ready summary of one run."""
    peak_gen, peak_icu = peak_demand(traj)
    return {
        "scenario": traj.scenario_kind,
        "total_deaths": total_deaths(traj),
        "attack_rate": attack_rate(traj),
        "peak_gen_demand": peak_gen,
        "peak_icu_demand": peak_icu,
        "peak_gen_occupancy": float(traj.gen_occupancy.max()),
        "peak_icu_occupancy": float(traj.icu_occupancy.max()),
        "trigger_time": traj.trigger_time,
        "burned_out": traj.burned_out,
        "beta": traj.beta,
    }


def write_trajectory_summary(traj: EpidemicTrajectory, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary_dict(traj), fh, indent=2, sort_keys=True)
        fh.write("\n")
