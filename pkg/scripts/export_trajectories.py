#!/usr/bin/env python3
"""Export full per-step trajectories for one country under every strategy.

Writes one CSV (step x band compartment series) and one JSON summary per
scenario, using the packaged default inputs. Useful for plotting epidemic
curves or inspecting bed demand against capacity.

    python scripts/export_trajectories.py XUS /tmp/traj
    python scripts/export_trajectories.py XBD /tmp/traj --horizon 500
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from epivalue.country_data import balance_contact_matrix, load_contact_table, load_country_profiles, load_severity_profile
from epivalue.engine import EpiParams, simulate
from epivalue.policy import default_scenarios
from epivalue.sweep import packaged_data_path
from epivalue.trajectory import total_deaths, write_trajectory_csv, write_trajectory_summary


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("iso3", help="country code from the packaged countries file")
    parser.add_argument("out_dir", type=Path)
    parser.add_argument("--horizon", type=float, default=365.0)
    parser.add_argument("--dt", type=float, default=0.25)
    args = parser.parse_args()

    profiles = {p.country_id: p for p in load_country_profiles(packaged_data_path("countries"))}
    if args.iso3 not in profiles:
        parser.error(f"{args.iso3} not in packaged countries file")
    profile = profiles[args.iso3]

    tables = load_contact_table(packaged_data_path("contacts"))
    source = args.iso3 if args.iso3 in tables else "DEFAULT"
    contacts = balance_contact_matrix(tables[source], profile.population_by_band, source_id=source)
    severity = load_severity_profile(packaged_data_path("severity"))
    params = EpiParams(severity=severity, horizon=args.horizon, dt=args.dt)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    for scenario in default_scenarios():
        traj = simulate(profile, contacts, params, scenario)
        stem = f"{args.iso3}_{scenario.kind.value}"
        write_trajectory_csv(traj, args.out_dir / f"{stem}.csv")
        write_trajectory_summary(traj, args.out_dir / f"{stem}.json")
        print(
            f"{stem}: deaths={total_deaths(traj):,.0f} "
            f"peak_icu_demand={traj.icu_demand.max():,.0f} trigger={traj.trigger_time}"
        )


if __name__ == "__main__":
    main()
