"""Command-line interface.

    epivalue run --config run.json [--countries ISO3,ISO3] [--workers N] [--out DIR]
    epivalue table --results DIR [--countries ISO3,ISO3]
    epivalue figures --results DIR

Exit codes: 0 success, 1 config/load error, 2 partial failure (some countries
failed; the rest were written), 3 numerical failure (no country simulated
successfully). Set EPIVALUE_LOG=debug|info|warning to control verbosity.
"""

from __future__ import annotations

import logging
import os
import sys

import click

from .errors import EpiValueError, InputError, NonFiniteState, PartialFailure, UnknownCountry
from .report import emit_figure_data, write_marginal_table
from .sweep import load_results, load_run_config, rows_as_dicts, run_sweep, write_results

log = logging.getLogger("epivalue")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2
EXIT_NUMERICAL = 3


def _setup_logging():
    level_name = os.environ.get("EPIVALUE_LOG", "warning").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _split_countries(text):
    if text is None:
        return None
    return [c.strip().upper() for c in text.split(",") if c.strip()]


@click.group()
def main():
    """Epidemic scenario sweeps with country-level mortality valuation."""
    _setup_logging()


@main.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(), help="Run-config JSON.")
@click.option("--countries", default=None, help="Comma-separated ISO3 filter (default: all).")
@click.option("--workers", default=None, type=int, help="Parallel worker processes.")
@click.option("--out", "out_dir", default=None, type=click.Path(), help="Output directory.")
def run_cmd(config_path, countries, workers, out_dir):
    """Run the country x scenario sweep and write results, table and figures."""
    try:
        config = load_run_config(
            config_path,
            countries=_split_countries(countries),
            workers=workers,
            output_dir=out_dir,
        )
    except EpiValueError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)

    exit_code = EXIT_OK
    try:
        result = run_sweep(config)
    except PartialFailure as exc:
        result = exc.result
        numerical = [r for _, r in exc.failures if r.startswith("NonFiniteState")]
        if not result.rows and numerical:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(EXIT_NUMERICAL)
        click.echo(f"partial failure: {exc}", err=True)
        exit_code = EXIT_PARTIAL
    except (InputError, UnknownCountry) as exc:
        click.echo(f"load error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except NonFiniteState as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)

    out = config.output_dir
    write_results(result, out)
    rows = rows_as_dicts(result)
    write_marginal_table(rows, out, config_hash=result.config_hash)
    emit_figure_data(rows, out, config_hash=result.config_hash)
    click.echo(f"wrote {len(result.rows)} rows to {out}")
    sys.exit(exit_code)


@main.command("table")
@click.option("--results", "results_dir", required=True, type=click.Path(), help="Directory with results.csv.")
@click.option("--countries", default=None, help="Comma-separated ISO3 column selection.")
def table_cmd(results_dir, countries):
    """Render the marginal-value table from an existing results directory."""
    try:
        rows, chash = load_results(results_dir)
        paths = write_marginal_table(
            rows, results_dir, countries=_split_countries(countries), config_hash=chash
        )
    except EpiValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    click.echo(paths[0].read_text(encoding="utf-8"))


@main.command("figures")
@click.option("--results", "results_dir", required=True, type=click.Path(), help="Directory with results.csv.")
def figures_cmd(results_dir):
    """Write figure datasets and SVG charts from an existing results directory."""
    try:
        rows, chash = load_results(results_dir)
        paths = emit_figure_data(rows, results_dir, config_hash=chash)
    except EpiValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    for p in paths:
        click.echo(str(p))


if __name__ == "__main__":
    main()
