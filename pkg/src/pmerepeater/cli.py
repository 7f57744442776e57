"""Command-line front end: ``pmerepeater {analytic,simulate,verify,sweep}``.

CSV column orders are fixed per subcommand (see the ``*_COLUMNS`` tuples);
JSON output is an array of flat records with the same keys.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from typing import Sequence

from . import analytics, verify
from .config import ENV_VAR, OUTPUT_FORMATS, ConfigError, RunConfig, load_config
from .sim import SimConfig, convergence_report

ANALYTIC_COLUMNS = (
    "n", "L_n", "L0", "p_r", "p_b", "p_i", "eta_t", "T_l", "T_tot", "delta_F",
    "T_SPS", "T_DLCZ", "speedup_vs_SPS", "speedup_vs_DLCZ", "R_sn",
)
SWEEP_COLUMNS = ("axis", "value", "n", "L_n", "L0", "p_r", "p_b", "p_i", "eta_t", "T_l", "T_tot", "delta_F")
SIMULATE_COLUMNS = (
    "level", "samples", "mc_mean", "std_error", "analytic", "ratio", "ratio_low", "ratio_high",
    "within", "attempts", "success_rate", "trials", "seed",
)
VERIFY_COLUMNS = ("check", "passed", "metric", "detail")


class UsageError(Exception):
    pass


def render(records: Sequence[dict], columns: Sequence[str], fmt: str) -> str:
    rows = [{c: r.get(c) for c in columns} for r in records]
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(columns))
        writer.writeheader()
        writer.writerows({k: ("" if v is None else repr(v) if isinstance(v, float) else v) for k, v in r.items()} for r in rows)
        return buf.getvalue()
    cells = [[_pretty(r[c]) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(x.rjust(w) for x, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _pretty(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.output_path:
        with open(cfg.output_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def analytic_record(cfg: RunConfig) -> dict:
    p = cfg.protocol
    rates = analytics.success_probs(p)
    comp = analytics.reference_comparison(p)
    rec = {"n": p.n, "L_n": p.L_n, "L0": p.L0, **rates.as_dict()}
    rec.update(comp.as_dict())
    rec["R_sn"] = analytics.cavity_snr(cfg.cavity) if cfg.cavity is not None else None
    return rec


def cmd_analytic(cfg: RunConfig, args) -> int:
    _emit(render([analytic_record(cfg)], ANALYTIC_COLUMNS, cfg.output), cfg)
    return 0


def parse_values(text: str) -> list[float]:
    """``"2..6"`` (inclusive integer range) or a comma-separated list."""
    text = text.strip()
    if not text:
        raise UsageError("--values: empty range")
    if ".." in text:
        lo, hi = (int(x) for x in text.split("..", 1))
        values = list(range(lo, hi + 1))
    else:
        values = [float(x) for x in text.split(",") if x.strip()]
    if not values:
        raise UsageError("--values: empty range")
    return values


def cmd_sweep(cfg: RunConfig, args) -> int:
    if not args.axis:
        raise UsageError("sweep needs --axis")
    if args.values is None:
        raise UsageError("sweep needs --values")
    values = parse_values(args.values)
    if args.axis == "n":
        values = [int(v) for v in values]
    try:
        rows = analytics.sweep(cfg.protocol, args.axis, values)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    records = [
        {"axis": r.axis, "value": r.value, "n": r.params.n, "L_n": r.params.L_n, "L0": r.params.L0, **r.breakdown.as_dict()}
        for r in rows
    ]
    _emit(render(records, SWEEP_COLUMNS, cfg.output), cfg)
    return 0


def cmd_simulate(cfg: RunConfig, args) -> int:
    sim = cfg.sim or SimConfig(cfg.protocol)
    overrides = {k: v for k, v in (("trials", args.trials), ("seed", args.seed), ("workers", args.workers)) if v is not None}
    try:
        sim = dataclasses.replace(sim, **overrides)
    except ValueError as exc:
        raise ConfigError(f"sim: {exc}") from None
    report = convergence_report(sim)
    out = report.outcome
    records = []
    for row in report.rows:
        rec = row.as_dict()
        rec["attempts"] = out.attempts_per_level[row.level]
        rec["success_rate"] = out.success_rate_conditional[row.level]
        rec["trials"] = out.trials
        rec["seed"] = out.seed
        records.append(rec)
    _emit(render(records, SIMULATE_COLUMNS, cfg.output), cfg)
    return 0


def cmd_verify(cfg: RunConfig, args) -> int:
    checks = verify.run_battery(cfg.protocol, args.phase_grid)
    _emit(render([c.as_dict() for c in checks], VERIFY_COLUMNS, cfg.output), cfg)
    failed = [c.name for c in checks if not c.passed]
    if failed:
        print(f"verification failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


COMMANDS = {
    "analytic": cmd_analytic,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmerepeater",
        description="Rates, Monte Carlo and state verification for the PME quantum repeater.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help=f"JSON config path or preset name (default: ${ENV_VAR}, else 'paper')")
    parser.add_argument("--output", choices=OUTPUT_FORMATS, help="output format (overrides config)")
    parser.add_argument("-o", "--output-path", help="write output to this file")
    parser.add_argument("--seed", type=int, help="Monte Carlo root seed")
    parser.add_argument("--trials", type=int, help="Monte Carlo trials")
    parser.add_argument("--workers", type=int, help="worker processes for Monte Carlo")
    parser.add_argument("--axis", help="ProtocolParams field to sweep")
    parser.add_argument("--values", help="sweep values: '2..6' or '0.8,0.9'")
    parser.add_argument("--phase-grid", type=int, default=8, help="phase grid points per check (verify)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.output:
            cfg = dataclasses.replace(cfg, output=args.output)
        if args.output_path:
            cfg = dataclasses.replace(cfg, output_path=args.output_path)
        if args.phase_grid < 1:
            raise UsageError("--phase-grid must be >= 1")
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
