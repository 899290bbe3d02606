"""Scenario runner: executes runs, writes reports, checks beacon uniformity.

Subcommands:
  run               one scenario file, honest vs. manipulated, both modes
  attack-suite      every bundled scenario, with a coalition-gain summary
  beacon-uniformity chi-square check of the one-honest-player claim

Reports are written as JSON plus an aligned text table. They contain no
timestamps and all numbers are exact strings, so the same scenario and seed
always produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from scipy import stats

from .adversaries import (
    ExecutionMode,
    ManipulationReport,
    exact_str,
    run_with_adversary,
)
from .beacon import uniformity_histogram
from .errors import InvariantViolation, ValidationError
from .scenario import (
    Scenario,
    ScenarioError,
    bundled_scenario_names,
    load_bundled,
    load_scenario,
)

OUT_DIR_ENV = "TRUSTLESS_MECH_OUT"
DEFAULT_OUT = "reports"
SIGNIFICANCE = 0.001

ALL_MODES = (ExecutionMode.CENTRALIZED_SEQUENTIAL, ExecutionMode.DECENTRALIZED_COMMIT_REVEAL)


def _out_dir(arg: str | None) -> Path:
    return Path(arg or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT)


def _run_modes(scenario: Scenario, mode_arg: str | None) -> dict[str, ManipulationReport]:
    modes = ALL_MODES if mode_arg is None else (ExecutionMode(mode_arg),)
    return {
        mode.value: run_with_adversary(scenario, scenario.adversary, mode) for mode in modes
    }


def _format_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [
        max(len(header[i]), *(len(row[i]) for row in rows)) if rows else len(header[i])
        for i in range(len(header))
    ]

    def line(cells: list[str]) -> str:
        return "  ".join(cell.ljust(w) for cell, w in zip(cells, widths)).rstrip()

    out = [line(header), line(["-" * w for w in widths])]
    out.extend(line(row) for row in rows)
    return "\n".join(out)


def _gain_rows(mode: str, report: ManipulationReport) -> list[list[str]]:
    absolutes: dict[str, tuple[str, str]] = {
        "seller": (exact_str(report.honest_revenue), exact_str(report.manipulated_revenue))
    }
    for agent in report.honest_utilities:
        absolutes[f"agent:{agent}"] = (
            exact_str(report.honest_utilities[agent]),
            exact_str(report.manipulated_utilities[agent]),
        )
    rows = []
    for party in sorted(report.gain_per_party):
        honest, manipulated = absolutes.get(party, (".", "."))
        rows.append([mode, party, honest, manipulated, exact_str(report.gain_per_party[party])])
    return rows


def _report_text(scenario: Scenario, reports: dict[str, ManipulationReport]) -> str:
    strategy = scenario.adversary.kind.value if scenario.adversary else "none"
    rows: list[list[str]] = []
    for mode, report in reports.items():
        rows.extend(_gain_rows(mode, report))
    notes: list[str] = []
    for mode, report in reports.items():
        for note in (*report.notes, *report.honest.notes, *report.manipulated.notes):
            tagged = f"[{mode}] {note}"
            if tagged not in notes:
                notes.append(tagged)
    parts = [
        f"scenario: {scenario.name}",
        f"mechanism: {scenario.mechanism.tag.value}",
        f"strategy: {strategy}",
        "",
        _format_table(["mode", "party", "honest", "manipulated", "delta"], rows),
    ]
    if notes:
        parts.extend(["", "notes:"])
        parts.extend(f"  {note}" for note in notes)
    return "\n".join(parts) + "\n"


def _report_doc(scenario: Scenario, reports: dict[str, ManipulationReport]) -> dict:
    return {
        "scenario": scenario.name,
        "mechanism": scenario.mechanism.tag.value,
        "modes": {mode: report.canonical() for mode, report in reports.items()},
    }


def _write_reports(
    out_dir: Path, scenario: Scenario, reports: dict[str, ManipulationReport]
) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / f"{scenario.name}.report.json"
    txt_path = out_dir / f"{scenario.name}.report.txt"
    doc = _report_doc(scenario, reports)
    json_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    txt_path.write_text(_report_text(scenario, reports))
    return json_path, txt_path


def cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    reports = _run_modes(scenario, args.mode)
    json_path, txt_path = _write_reports(_out_dir(args.out), scenario, reports)
    sys.stdout.write(_report_text(scenario, reports))
    print(f"wrote {json_path}")
    print(f"wrote {txt_path}")
    return 0


def cmd_attack_suite(args: argparse.Namespace) -> int:
    out_dir = _out_dir(args.out)
    summary_rows = []
    for name in bundled_scenario_names():
        scenario = load_bundled(name)
        reports = _run_modes(scenario, None)
        _write_reports(out_dir, scenario, reports)
        strategy = scenario.adversary.kind.value if scenario.adversary else "none"
        summary_rows.append(
            {
                "scenario": scenario.name,
                "strategy": strategy,
                "centralized": exact_str(reports["centralized"].gain_per_party["coalition"]),
                "decentralized": exact_str(reports["decentralized"].gain_per_party["coalition"]),
            }
        )

    table = _format_table(
        ["scenario", "strategy", "centralized", "decentralized"],
        [[r["scenario"], r["strategy"], r["centralized"], r["decentralized"]] for r in summary_rows],
    )
    text = (
        "coalition gain per strategy and execution mode\n"
        "(the decentralized column is the sealed-input claim: all zeros)\n\n"
        + table
        + "\n"
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "summary.json").write_text(
        json.dumps({"rows": summary_rows}, indent=2, sort_keys=True) + "\n"
    )
    (out_dir / "summary.txt").write_text(text)
    sys.stdout.write(text)
    print(f"wrote {out_dir / 'summary.json'}")
    print(f"wrote {out_dir / 'summary.txt'}")
    return 0


def cmd_beacon_uniformity(args: argparse.Namespace) -> int:
    counts = uniformity_histogram(args.trials, seed=args.seed)
    result = stats.chisquare(counts)
    print(f"trials: {args.trials}")
    print(f"bins: {len(counts)}")
    print(f"chi-square statistic: {result.statistic:.4f}")
    print(f"p-value: {result.pvalue:.6f}")
    if result.pvalue >= SIGNIFICANCE:
        print(f"PASS: consistent with uniform output (significance {SIGNIFICANCE})")
        return 0
    print(f"FAIL: uniformity rejected at significance {SIGNIFICANCE}")
    return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trustless-mech",
        description="commit-reveal mechanism simulator: honest runs, manipulations, reports",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario file and write its reports")
    p_run.add_argument("scenario", help="path to a scenario JSON file")
    p_run.add_argument(
        "--mode",
        choices=[m.value for m in ALL_MODES],
        default=None,
        help="restrict to one execution mode (default: run both)",
    )
    p_run.add_argument(
        "--out", default=None, help=f"output directory (default: ${OUT_DIR_ENV} or ./{DEFAULT_OUT})"
    )

    p_suite = sub.add_parser(
        "attack-suite", help="run every bundled scenario in both modes and summarize"
    )
    p_suite.add_argument(
        "--out", default=None, help=f"output directory (default: ${OUT_DIR_ENV} or ./{DEFAULT_OUT})"
    )

    p_beacon = sub.add_parser(
        "beacon-uniformity", help="chi-square the beacon output with one honest contributor"
    )
    p_beacon.add_argument("--trials", type=int, required=True, help="number of aggregations")
    p_beacon.add_argument("--seed", type=int, default=0, help="stream seed for the honest draws")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": cmd_run,
        "attack-suite": cmd_attack_suite,
        "beacon-uniformity": cmd_beacon_uniformity,
    }
    try:
        return handlers[args.command](args)
    except (ScenarioError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
