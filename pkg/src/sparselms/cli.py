"""Command-line entry point.

    sparselms run --preset example1 --runs 10 --seed 42 --out out.csv
    sparselms sweep-sparsity --runs 50 --out sweep.csv
    sparselms print-preset example2 > my_scenario.yaml
    sparselms run --scenario my_scenario.yaml --set params.rho.stage2=1e-4 --out out.json --format json

``SPARSELMS_SEED`` supplies a default master seed; ``--seed`` and
``--set seed=...`` take precedence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

from .config import ConfigError, apply_overrides, dump_document, load_document, scenario_from_dict
from .harness import Scenario, msd_in_db, run_monte_carlo
from .presets import PRESETS, preset_document, verify_presets

log = logging.getLogger("sparselms")

SEED_ENV = "SPARSELMS_SEED"
SWEEP_RHO = 0.0005


def _stage_sr(scenario: Scenario) -> list[Fraction]:
    return [spec.sparsity_ratio for spec, _ in scenario.schedule.stages]


def resolve_document(preset: str | None, scenario_file: str | None, overrides, runs=None, seed=None) -> dict:
    """Preset or scenario file, then env seed, ``--set`` overrides, ``--runs``/``--seed``."""
    if scenario_file is not None:
        if preset not in (None, "custom"):
            raise ConfigError("--scenario is only accepted with --preset custom")
        doc = load_document(scenario_file)
    elif preset is None:
        raise ConfigError("give --preset NAME or --scenario FILE")
    elif preset == "custom":
        raise ConfigError("--preset custom requires --scenario FILE")
    else:
        doc = preset_document(preset)
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        try:
            doc["seed"] = int(env_seed)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env_seed!r}") from None
    doc = apply_overrides(doc, overrides or [])
    if runs is not None:
        doc["runs"] = runs
    if seed is not None:
        doc["seed"] = seed
    return doc


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(out: str | None, text: str) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        _write_atomic(Path(out), text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def summary_rows(scenario: Scenario, curves) -> list[list]:
    rows = []
    srs = _stage_sr(scenario)
    for algorithm, curve in curves.items():
        for stage, value in enumerate(curve.steady_state_msd_per_stage):
            rows.append([algorithm.value, stage + 1, float(srs[stage]), value, msd_in_db(value)])
    return rows


SUMMARY_HEADER = ["algorithm", "stage", "sr", "ssmsd", "ssmsd_db"]


def _summary_path(out: str) -> Path:
    path = Path(out)
    return path.with_name(f"{path.stem}.summary{path.suffix or '.csv'}")


def run(scenario: Scenario, out: str | None, fmt: str = "csv", document: dict | None = None) -> None:
    """Run the Monte-Carlo ensemble and write per-iteration MSD plus a summary."""
    start = time.perf_counter()
    curves = run_monte_carlo(scenario)
    log.info("ran %d trials x %d algorithms in %.1f s", scenario.runs, len(curves), time.perf_counter() - start)

    stage_of = scenario.schedule.stage_index()
    srs = [float(sr) for sr in _stage_sr(scenario)]
    columns = {
        "iteration": list(range(1, scenario.total_iterations + 1)),
        "stage": [int(s) + 1 for s in stage_of],
        "sr": [srs[s] for s in stage_of],
    }
    for algorithm, curve in curves.items():
        columns[f"msd_{algorithm.value}"] = [float(v) for v in curve.per_iteration_msd]
    summary = summary_rows(scenario, curves)

    if fmt == "json":
        payload = {
            "scenario": document,
            "columns": columns,
            "summary": [dict(zip(SUMMARY_HEADER, row)) for row in summary],
        }
        _emit(out, json.dumps(payload, indent=1) + "\n")
        return
    header = list(columns)
    _emit(out, _csv_text(header, zip(*columns.values())))
    if out in (None, "-"):
        sys.stderr.write(_csv_text(SUMMARY_HEADER, summary))
    else:
        _write_atomic(_summary_path(out), _csv_text(SUMMARY_HEADER, summary))


def parse_sr_grid(text: str | None, n_taps: int) -> list[int]:
    """Sparsity grid as nonzero-tap counts; ``None`` means every k/N."""
    if text is None:
        return list(range(1, n_taps + 1))
    counts = []
    for item in text.split(","):
        try:
            sr = Fraction(item.strip())
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"--grid: cannot parse sparsity ratio {item!r}") from None
        k = sr * n_taps
        if k.denominator != 1 or not 0 <= k <= n_taps:
            raise ConfigError(f"--grid: {item} is not a multiple of 1/{n_taps} in [0, 1]")
        counts.append(int(k))
    return counts


def sweep_documents(base: dict, grid: list[int], rho: float = SWEEP_RHO) -> list[dict]:
    """Single-stage variants of ``base``, one per nonzero count, with fixed rho."""
    iterations = base["stages"]["stage1"]["iterations"]
    docs = []
    for k in grid:
        doc = json.loads(json.dumps(base))
        doc["stages"] = {"stage1": {"iterations": iterations, "nonzero": k}}
        doc["params"]["rho"] = {"stage1": rho}
        docs.append(doc)
    return docs


def sweep_sparsity(base: dict, grid: list[int], out: str | None, fmt: str = "csv", rho: float = SWEEP_RHO):
    """Steady-state MSD of every algorithm across sparsity ratios."""
    rows = []
    algorithms = None
    for doc in sweep_documents(base, grid, rho):
        scenario = scenario_from_dict(doc)
        curves = run_monte_carlo(scenario)
        algorithms = list(curves)
        sr = float(scenario.schedule.stages[0][0].sparsity_ratio)
        rows.append([sr] + [curves[a].steady_state_msd_per_stage[0] for a in algorithms])
        log.info("sr=%.4f done", sr)
    header = ["sr"] + [f"ssmsd_{a.value}" for a in algorithms]
    if fmt == "json":
        _emit(out, json.dumps({"rho": rho, "rows": [dict(zip(header, r)) for r in rows]}, indent=1) + "\n")
    else:
        _emit(out, _csv_text(header, rows))
    return rows


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparselms", description="Sparse system identification with p-norm LMS filters.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_preset):
        p.add_argument("--preset", choices=list(PRESETS) + ["custom"], default=default_preset)
        p.add_argument("--scenario", help="YAML scenario file (with --preset custom)")
        p.add_argument("--runs", type=_positive_int)
        p.add_argument("--seed", type=_nonneg_int)
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")

    p_run = sub.add_parser("run", help="Monte-Carlo MSD curves for a preset or scenario file")
    common(p_run, None)
    p_sweep = sub.add_parser("sweep-sparsity", help="steady-state MSD against sparsity ratio")
    common(p_sweep, "example1")
    p_sweep.add_argument("--grid", help="comma-separated ratios, e.g. 1/16,8/16,16/16")
    p_sweep.add_argument("--rho", type=float, default=SWEEP_RHO)
    p_print = sub.add_parser("print-preset", help="print a preset as a YAML scenario document")
    p_print.add_argument("name", choices=list(PRESETS))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        verify_presets()
        if args.command == "print-preset":
            sys.stdout.write(dump_document(preset_document(args.name)))
            return 0
        preset = args.preset
        if args.scenario is not None and preset is None:
            preset = "custom"
        doc = resolve_document(preset, args.scenario, args.overrides, args.runs, args.seed)
        scenario = scenario_from_dict(doc)
        if args.command == "run":
            run(scenario, args.out, args.format, doc)
        else:
            if args.rho < 0:
                raise ConfigError(f"--rho must be >= 0, got {args.rho}")
            sweep_sparsity(doc, parse_sr_grid(args.grid, scenario.n_taps), args.out, args.format, args.rho)
    except ConfigError as exc:
        print(f"sparselms: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"sparselms: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
