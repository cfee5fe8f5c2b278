"""Command-line entry points: run, compare, verify, bench."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from fedsim import _kernels
from fedsim.aggregation import (
    STRATEGIES,
    ClientRoundInput,
    PidCoefficients,
    StrategySpec,
    aggregate,
)
from fedsim.config import KEY_TO_FIELD, SimulationConfig, parse_config
from fedsim.errors import ConfigError, FedsimError
from fedsim.metrics import comm_cost_summary, write_run_outputs
from fedsim.params import ParameterVector
from fedsim.selection import SELECTION_MODES
from fedsim.sim import TASK_KINDS, run_federation

logger = logging.getLogger(__name__)

VERIFY_TOLERANCE = 1e-12


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="flat key=value config file")
    parser.add_argument("--task", dest="task_kind", choices=TASK_KINDS)
    parser.add_argument("--dim", type=int)
    parser.add_argument("--client-shift", type=float)
    parser.add_argument("--noise-sigma", type=float)
    parser.add_argument("--clients", type=int)
    parser.add_argument("--lambda", dest="lam", type=float, help="Poisson mean for client sizes")
    parser.add_argument("--strategy", choices=STRATEGIES)
    parser.add_argument("--cw-alpha", type=float, help="size/cost mix for fedcostwavg")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--window", type=int, help="integral window length")
    parser.add_argument(
        "--k-abs",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="read the cost-change term as a magnitude instead of signed",
    )
    parser.add_argument("--selection-mode", choices=SELECTION_MODES)
    parser.add_argument("--full-participation-period", type=int)
    parser.add_argument("--rounds", type=int)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out-dir", help="directory for records.jsonl/summary.csv/final_model.fpv")
    parser.add_argument("--patience", type=int, help="early-stop patience; 0 disables")
    parser.add_argument("--tol", type=float, help="relative improvement threshold")


def _config_from_args(args: argparse.Namespace) -> SimulationConfig:
    overrides = {
        field: getattr(args, field)
        for field in KEY_TO_FIELD.values()
        if hasattr(args, field)
    }
    return parse_config(args.config, overrides)


def _default_out_dir(config: SimulationConfig) -> str:
    return f"runs/{config.strategy}-seed{config.seed}"


def cmd_run(config: SimulationConfig) -> int:
    records, state = run_federation(config)
    out_dir = Path(config.out_dir or _default_out_dir(config))
    write_run_outputs(records, state.global_model, out_dir)
    print(f"backend: {_kernels.BACKEND}")
    print(f"rounds completed: {len(records)}")
    if records:
        print(f"final global cost: {records[-1].global_cost:.6g}")
        print(f"mean participation fraction: {comm_cost_summary(records):.6g}")
    print(f"wrote {out_dir}/records.jsonl, summary.csv, final_model.fpv")
    return 0


def cmd_compare(config: SimulationConfig, strategies: list[str]) -> int:
    # Early stopping off so every strategy reports the same round count
    # and rows stay comparable.
    base = dataclasses.replace(config, patience=0)
    rows = []
    for name in strategies:
        records, _ = run_federation(dataclasses.replace(base, strategy=name))
        final_cost = records[-1].global_cost if records else math.nan
        comm = comm_cost_summary(records) if records else math.nan
        rows.append((name, len(records), final_cost, comm))
    print(f"{'strategy':<14}{'rounds':>8}{'final_cost':>16}{'comm_cost':>12}")
    for name, rounds, cost, comm in rows:
        print(f"{name:<14}{rounds:>8}{cost:>16.6g}{comm:>12.6g}")
    if config.out_dir:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "compare.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write("strategy,rounds,final_cost,comm_cost\n")
            for name, rounds, cost, comm in rows:
                fh.write(f"{name},{rounds},{cost!r},{comm!r}\n")
        print(f"wrote {out / 'compare.csv'}")
    return 0


def _load_fixture(path: Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _check_fixture(fixture: dict) -> list[str]:
    """Replay one stored aggregation case; return mismatch descriptions."""
    spec_args = fixture.get("params", {})
    coeffs = spec_args.get("coeffs")
    strategy = StrategySpec(
        name=fixture["strategy"],
        cw_alpha=spec_args.get("cw_alpha", 0.5),
        coeffs=PidCoefficients(*coeffs) if coeffs else None,
        window=spec_args.get("window", 6),
        k_abs=spec_args.get("k_abs", False),
    )
    inputs = [
        ClientRoundInput(
            client_id=c["client_id"],
            size=c["size"],
            model=ParameterVector(c["model"]),
            cost_history=tuple(c["cost_history"]),
        )
        for c in fixture["inputs"]
    ]
    model, weights = aggregate(strategy, inputs)
    expected = fixture["expected"]
    problems = []
    got_w = np.asarray(weights.weights)
    want_w = np.asarray(expected["weights"], dtype=np.float64)
    if got_w.shape != want_w.shape:
        problems.append(f"weight count {got_w.size} != expected {want_w.size}")
    else:
        err = float(np.max(np.abs(got_w - want_w)))
        if err > VERIFY_TOLERANCE:
            problems.append(f"weights deviate by {err:.3e}")
    want_m = np.asarray(expected["model"], dtype=np.float64)
    err = float(np.max(np.abs(model.values - want_m)))
    if err > VERIFY_TOLERANCE:
        problems.append(f"model deviates by {err:.3e}")
    if weights.fallback_applied != expected["fallback"]:
        problems.append(
            f"fallback {weights.fallback_applied!r} != expected {expected['fallback']!r}"
        )
    return problems


def cmd_verify(fixtures_dir: str | None) -> int:
    if fixtures_dir is None:
        root = Path(str(resources.files("fedsim").joinpath("fixtures")))
    else:
        root = Path(fixtures_dir)
    paths = sorted(root.glob("*.json"))
    if not paths:
        print(f"no fixtures found in {root}", file=sys.stderr)
        return 1
    failures = 0
    for path in paths:
        fixture = _load_fixture(path)
        problems = _check_fixture(fixture)
        name = fixture.get("name", path.stem)
        if problems:
            failures += 1
            print(f"FAIL {name}: {'; '.join(problems)}")
        else:
            print(f"ok {name}")
    print(f"{len(paths) - failures}/{len(paths)} fixtures passed")
    return 0 if failures == 0 else 1


def cmd_bench(args: argparse.Namespace) -> int:
    from fedsim.bench import format_results, run_benchmarks

    results = run_benchmarks(
        n_models=args.models,
        dim=args.dim,
        n_samples=args.samples,
        epochs=args.epochs,
        repeats=args.repeats,
    )
    print(f"active backend: {_kernels.BACKEND}")
    print(format_results(results))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedsim",
        description="Federated-learning simulator with pluggable aggregation.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one simulation and write outputs")
    _add_config_flags(p_run)

    p_cmp = sub.add_parser("compare", help="run several strategies on one federation")
    _add_config_flags(p_cmp)
    p_cmp.add_argument(
        "--strategies",
        nargs="+",
        choices=STRATEGIES,
        default=list(STRATEGIES),
        help="strategies to compare (default: all)",
    )

    p_ver = sub.add_parser("verify", help="check aggregation against stored fixtures")
    p_ver.add_argument(
        "--fixtures",
        metavar="DIR",
        default=None,
        help="fixture directory (default: the packaged fixtures)",
    )

    p_bench = sub.add_parser("bench", help="time compiled vs pure kernels")
    p_bench.add_argument("--models", type=int, default=64)
    p_bench.add_argument("--dim", type=int, default=32)
    p_bench.add_argument("--samples", type=int, default=24)
    p_bench.add_argument("--epochs", type=int, default=400)
    p_bench.add_argument("--repeats", type=int, default=5)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        if args.command == "run":
            return cmd_run(_config_from_args(args))
        if args.command == "compare":
            return cmd_compare(_config_from_args(args), args.strategies)
        if args.command == "verify":
            return cmd_verify(args.fixtures)
        return cmd_bench(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FedsimError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
