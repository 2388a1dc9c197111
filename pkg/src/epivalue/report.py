"""Report views over sweep results: the marginal-value table and figure data.

The text table mirrors the presentation of the headline comparison: rows are
strategies, columns are countries grouped by income classification from
richest to poorest, cells are the marginal value of the strategy relative to
the unmitigated baseline as a percentage of the country's own GDP, rounded
to integers. The baseline row renders as ``--``; a genuine zero renders as
``0``. The companion CSV keeps full precision (baseline cells are empty).

Figure datasets are plain CSVs plus small hand-emitted SVG charts:

- fig1: unmitigated mortality and 65+ population share, with their
  distribution by income group (box summaries) and population-weighted
  group aggregates in a side CSV.
- fig2: absolute welfare loss (VSL terms) per country and scenario.
- fig3: the same loss relative to each country's own GDP.

Every emitted file starts with a ``# config_hash=`` comment so outputs can
be traced back to the exact inputs that produced them.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .country_data import INCOME_GROUP_ORDER, INCOME_GROUP_TITLES
from .errors import UnknownCountry
from .policy import SCENARIO_ORDER, SCENARIO_TITLES, ScenarioKind

_UNMITIGATED = ScenarioKind.UNMITIGATED.value


def _group_countries(rows: list[dict], countries: list[str] | None) -> list[tuple[str, list[str]]]:
    """Order countries into income-group blocks, richest group first."""
    info = {r["iso3"]: r["income_group"] for r in rows}
    if countries is None:
        countries = sorted(info)
    unknown = [c for c in countries if c not in info]
    if unknown:
        raise UnknownCountry(f"countries not present in results: {unknown}")
    blocks = []
    for group in INCOME_GROUP_ORDER:
        members = [c for c in countries if info[c] == group.value]
        if members:
            blocks.append((INCOME_GROUP_TITLES[group], members))
    return blocks


def _marginal_lookup(rows: list[dict]) -> dict[tuple[str, str], float]:
    return {(r["iso3"], r["scenario"]): r["marginal_value_pct_gdp"] for r in rows}


def emit_marginal_table(
    rows: list[dict], countries: list[str] | None = None, config_hash: str = ""
) -> tuple[str, str]:
    """Render the marginal-value table. Returns (text view, CSV view)."""
    blocks = _group_countries(rows, countries)
    lookup = _marginal_lookup(rows)
    ordered = [c for _, members in blocks for c in members]
    scenario_kinds = [k.value for k in SCENARIO_ORDER if any((c, k.value) in lookup for c in ordered)]

    if not ordered or not scenario_kinds:
        header = f"# config_hash={config_hash}\n"
        return header + "Strategy (no countries selected)\n", header + "strategy\n"

    label_w = max(len(SCENARIO_TITLES[ScenarioKind(k)]) for k in scenario_kinds) + 1
    col_w = 6

    def cell_text(kind, iso3):
        if kind == _UNMITIGATED:
            return "--"
        value = lookup.get((iso3, kind))
        return "" if value is None else str(round(value))

    # each block is wide enough for both its country columns and its title
    block_ws = [max(col_w * len(members) + 1, len(title) + 2) for title, members in blocks]

    lines = []
    lines.append(f"# config_hash={config_hash}")
    lines.append("Marginal value of interventions relative to the unmitigated scenario (% of GDP)")
    lines.append("")
    group_line = " " * label_w + "|"
    head_line = "Strategy".ljust(label_w) + "|"
    rule_line = "-" * label_w + "+"
    for (title, members), bw in zip(blocks, block_ws):
        group_line += f" {title}".ljust(bw) + "|"
        head_line += (" " + "".join(c.ljust(col_w) for c in members)).ljust(bw) + "|"
        rule_line += "-" * bw + "+"
    lines.append(group_line)
    lines.append(head_line)
    lines.append(rule_line)
    for kind in scenario_kinds:
        line = SCENARIO_TITLES[ScenarioKind(kind)].ljust(label_w) + "|"
        for (_, members), bw in zip(blocks, block_ws):
            line += (" " + "".join(cell_text(kind, c).ljust(col_w) for c in members)).ljust(bw) + "|"
        lines.append(line)
    lines.append("")
    lines.append(
        "Note: VSL-based values extrapolate willingness-to-pay measured on small"
        " risk changes to much larger epidemic risks; treat levels as indicative."
    )
    text = "\n".join(lines) + "\n"

    buf = io.StringIO()
    buf.write(f"# config_hash={config_hash}\n")
    buf.write("# columns grouped by income_group, richest first\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["strategy"] + ordered)
    writer.writerow(["income_group"] + [next(g for g, ms in blocks if c in ms) for c in ordered])
    for kind in scenario_kinds:
        if kind == _UNMITIGATED:
            writer.writerow([kind] + ["" for _ in ordered])
        else:
            values = (lookup.get((c, kind)) for c in ordered)
            writer.writerow([kind] + ["" if v is None else repr(float(v)) for v in values])
    return text, buf.getvalue()


def write_marginal_table(rows, out_dir, countries=None, config_hash: str = "") -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    text, csv_text = emit_marginal_table(rows, countries, config_hash)
    paths = [out_dir / "marginal_table.txt", out_dir / "marginal_table.csv"]
    paths[0].write_text(text, encoding="utf-8")
    paths[1].write_text(csv_text, encoding="utf-8")
    return paths


# ---------------------------------------------------------------------------
# Figure data


def _fmt_float(v) -> str:
    return "" if v is None else repr(float(v))


def _write_csv(path: Path, config_hash: str, header: list[str], data_rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in data_rows:
            writer.writerow(row)


def _quartiles(values: list[float]) -> tuple[float, float, float, float, float]:
    """(min, q1, median, q3, max) with linear interpolation; empty-safe."""
    vs = sorted(values)
    n = len(vs)
    if n == 0:
        return (0.0, 0.0, 0.0, 0.0, 0.0)

    def q(p):
        pos = p * (n - 1)
        lo = int(pos)
        hi = min(lo + 1, n - 1)
        frac = pos - lo
        return vs[lo] * (1 - frac) + vs[hi] * frac

    return (vs[0], q(0.25), q(0.5), q(0.75), vs[-1])


def _svg_header(width, height, title, config_hash="") -> list[str]:
    return [
        f"<!-- config_hash={config_hash} -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<text x="{width / 2:.1f}" y="16" text-anchor="middle" font-size="14">{title}</text>',
    ]


def _svg_box_panel(lines, x0, y0, w, h, groups, title):
    """Append one box-summary panel (one box per group) to an SVG body."""
    lines.append(f'<text x="{x0 + w / 2:.1f}" y="{y0 - 6:.1f}" text-anchor="middle">{title}</text>')
    all_vals = [v for _, vals in groups for v in vals]
    vmax = max(all_vals) if all_vals else 1.0
    vmax = vmax if vmax > 0 else 1.0
    n = max(len(groups), 1)
    slot = w / n
    for gi, (label, vals) in enumerate(groups):
        cx = x0 + slot * (gi + 0.5)
        mn, q1, med, q3, mx = _quartiles(vals)

        def y(v):
            return y0 + h - (v / vmax) * h

        bw = slot * 0.4
        lines.append(
            f'<line x1="{cx:.1f}" y1="{y(mn):.1f}" x2="{cx:.1f}" y2="{y(mx):.1f}" stroke="black"/>'
        )
        lines.append(
            f'<rect x="{cx - bw / 2:.1f}" y="{y(q3):.1f}" width="{bw:.1f}" '
            f'height="{max(y(q1) - y(q3), 0.5):.1f}" fill="#9ecae1" stroke="black"/>'
        )
        lines.append(
            f'<line x1="{cx - bw / 2:.1f}" y1="{y(med):.1f}" x2="{cx + bw / 2:.1f}" '
            f'y2="{y(med):.1f}" stroke="black" stroke-width="2"/>'
        )
        lines.append(
            f'<text x="{cx:.1f}" y="{y0 + h + 14:.1f}" text-anchor="middle">{label}</text>'
        )
    lines.append(
        f'<text x="{x0 - 6:.1f}" y="{y0 + 4:.1f}" text-anchor="end">{vmax:.3g}</text>'
    )
    lines.append(f'<text x="{x0 - 6:.1f}" y="{y0 + h + 4:.1f}" text-anchor="end">0</text>')
    lines.append(
        f'<line x1="{x0:.1f}" y1="{y0:.1f}" x2="{x0:.1f}" y2="{y0 + h:.1f}" stroke="black"/>'
    )
    lines.append(
        f'<line x1="{x0:.1f}" y1="{y0 + h:.1f}" x2="{x0 + w:.1f}" y2="{y0 + h:.1f}" stroke="black"/>'
    )


_SCENARIO_COLORS = {
    "unmitigated": "#636363",
    "social_distancing": "#3182bd",
    "social_distancing_plus": "#9ecae1",
    "late_suppression": "#e6550d",
    "early_suppression": "#fdae6b",
}


def _svg_grouped_bars(path: Path, title: str, ylabel: str, countries, values_by_scenario, config_hash=""):
    """Horizontal grouped bar chart: one row per country, one bar per scenario."""
    kinds = [k for k in (s.value for s in SCENARIO_ORDER) if k in values_by_scenario]
    row_h = 6 * max(len(kinds), 1) + 10
    left, top, plot_w = 60, 40, 640
    height = top + row_h * max(len(countries), 1) + 30
    width = left + plot_w + 160
    vmax = max(
        (v for k in kinds for v in values_by_scenario[k].values() if v is not None), default=1.0
    )
    vmax = vmax if vmax > 0 else 1.0
    lines = _svg_header(width, height, title, config_hash)
    lines.append(f'<text x="{left}" y="30">{ylabel} (bar length; max = {vmax:.4g})</text>')
    for ci, iso3 in enumerate(countries):
        y = top + ci * row_h
        lines.append(f'<text x="{left - 6}" y="{y + row_h / 2:.1f}" text-anchor="end">{iso3}</text>')
        for ki, kind in enumerate(kinds):
            v = values_by_scenario[kind].get(iso3)
            if v is None:
                continue
            bar = max(plot_w * v / vmax, 0.0)
            lines.append(
                f'<rect x="{left}" y="{y + 3 + ki * 6:.1f}" width="{bar:.2f}" height="5" '
                f'fill="{_SCENARIO_COLORS.get(kind, "#888")}"/>'
            )
    for ki, kind in enumerate(kinds):
        ly = top + ki * 14
        lines.append(
            f'<rect x="{left + plot_w + 16}" y="{ly}" width="10" height="10" '
            f'fill="{_SCENARIO_COLORS.get(kind, "#888")}"/>'
        )
        lines.append(f'<text x="{left + plot_w + 30}" y="{ly + 9}">{kind}</text>')
    lines.append("</svg>")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_figure_data(rows: list[dict], out_dir, config_hash: str = "") -> list[Path]:
    """Write the three figure datasets (CSV) and their SVG charts."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []

    unmit = [dict(r) for r in rows if r["scenario"] == _UNMITIGATED]
    unmit.sort(key=lambda r: r["iso3"])
    for r in unmit:
        r["mortality_pct"] = 100.0 * r["total_deaths"] / r["population"]

    # fig 1: mortality risk and demography
    fig1_rows = [
        [
            r["iso3"],
            r["name"],
            r["income_group"],
            _fmt_float(r["elderly_share"]),
            _fmt_float(r["mortality_pct"]),
            _fmt_float(r["informal_employment_share"]),
        ]
        for r in unmit
    ]
    fig1 = out_dir / "fig1_mortality_demography.csv"
    _write_csv(
        fig1,
        config_hash,
        ["iso3", "name", "income_group", "elderly_share", "mortality_pct_unmitigated", "informal_employment_share"],
        fig1_rows,
    )
    paths.append(fig1)

    # population-weighted aggregates by income group
    agg = out_dir / "fig1_income_group_aggregates.csv"
    agg_rows = []
    for group in INCOME_GROUP_ORDER:
        members = [r for r in unmit if r["income_group"] == group.value]
        if not members:
            continue
        weights = [r["population"] for r in members]
        wsum = sum(weights)
        wmort = sum(r["mortality_pct"] * w for r, w in zip(members, weights)) / wsum
        weld = sum(r["elderly_share"] * w for r, w in zip(members, weights)) / wsum
        agg_rows.append([group.value, len(members), repr(wmort), repr(weld)])
    _write_csv(
        agg,
        config_hash,
        ["income_group", "n_countries", "pop_weighted_mortality_pct", "pop_weighted_elderly_share"],
        agg_rows,
    )
    paths.append(agg)

    fig1_svg = out_dir / "fig1_mortality_demography.svg"
    groups_mort = []
    groups_eld = []
    for group in INCOME_GROUP_ORDER:
        members = [r for r in unmit if r["income_group"] == group.value]
        if members:
            label = group.value
            groups_mort.append((label, [r["mortality_pct"] for r in members]))
            groups_eld.append((label, [100.0 * r["elderly_share"] for r in members]))
    lines = _svg_header(860, 320, "Unmitigated mortality and 65+ share by income group", config_hash)
    _svg_box_panel(lines, 70, 60, 340, 200, groups_mort, "mortality, % of population")
    _svg_box_panel(lines, 490, 60, 340, 200, groups_eld, "population 65+, %")
    lines.append("</svg>")
    fig1_svg.write_text("\n".join(lines) + "\n", encoding="utf-8")
    paths.append(fig1_svg)

    # fig 2 and 3: losses per scenario, absolute and relative to GDP
    countries = [r["iso3"] for r in unmit]
    for stem, column, title, ylabel in (
        ("fig2_vsl_loss", "vsl_loss_usd", "Welfare loss by scenario (USD, VSL terms)", "loss in USD"),
        ("fig3_loss_pct_gdp", "loss_pct_gdp", "Welfare loss by scenario, % of own GDP", "% of GDP"),
    ):
        data_csv = out_dir / f"{stem}.csv"
        _write_csv(
            data_csv,
            config_hash,
            ["iso3", "income_group", "scenario", column],
            [
                [r["iso3"], r["income_group"], r["scenario"], _fmt_float(r[column])]
                for r in sorted(rows, key=lambda r: (r["iso3"], _scenario_rank(r["scenario"])))
            ],
        )
        paths.append(data_csv)
        by_scenario: dict[str, dict[str, float]] = {}
        for r in rows:
            by_scenario.setdefault(r["scenario"], {})[r["iso3"]] = r[column]
        svg = out_dir / f"{stem}.svg"
        _svg_grouped_bars(svg, title, ylabel, countries, by_scenario, config_hash)
        paths.append(svg)

    return paths


def _scenario_rank(kind: str) -> int:
    order = [k.value for k in SCENARIO_ORDER]
    return order.index(kind) if kind in order else len(order)
