"""Command-line entry point: ``pla {run,oracle,baseline,check,sweep}``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import checks, harness, meta
from .core import ConfigError, ExperimentConfig, config_to_dict, load_config, replication_seed, validate_config
from .saa import OracleResult, global_optimum

log = logging.getLogger("pla")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG = 0, 1, 2
LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "trace": logging.DEBUG}


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors already; keep the message on stderr."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _window(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'a,b' with integers, got {text!r}") from exc
    if not 1 <= lo < hi:
        raise argparse.ArgumentTypeError(f"window must satisfy 1 <= a < b, got {text!r}")
    return lo, hi


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pla", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="JSON experiment config")
        p.add_argument("--seed", type=_u64, help="master seed (overrides the config)")
        p.add_argument("--reps", type=int, help="replications; replication r uses seed + r")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--window", type=_window, help="slope-fit window 'a,b' (default: T/32,T)")
        p.add_argument("--mc-oracle", type=int, default=0, metavar="N",
                       help="Monte Carlo oracle with N centred samples for continuous noise")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for replications")

    common(sub.add_parser("run", help="run the LCB meta algorithm"))
    common(sub.add_parser("oracle", help="write the exact optimum per interval"))
    b = sub.add_parser("baseline", help="run the fixed-grid UCB comparator")
    common(b)
    b.add_argument("--grid", type=int, help="grid size G (default ceil(T^(1/3)))")
    c = sub.add_parser("check", help="run the randomized property suites")
    c.add_argument("--suite", action="append", help="run only the named suite(s)")
    s = sub.add_parser("sweep", help="vary one config field over a list of values")
    common(s)
    s.add_argument("--field", required=True, help="dotted path, e.g. market.I_max or horizon")
    s.add_argument("--values", required=True, help="JSON list of values")
    return parser


def _configure_logging() -> None:
    level = os.environ.get("PLA_LOG", "quiet").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def _resolve(args) -> ExperimentConfig:
    config = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.reps is not None:
        changes["replications"] = args.reps
    if args.out is not None:
        changes["output"] = args.out
    return config.with_updates(**changes) if changes else config


def _oracle_model(config: ExperimentConfig, mc_samples: int):
    if config.demand.finite:
        return config.demand
    if mc_samples <= 0:
        raise ConfigError(["demand.noise: continuous noise has no exact oracle; pass --mc-oracle N"])
    return harness.monte_carlo_model(config.demand, mc_samples, np.random.default_rng(config.seed))


def _default_window(T: int) -> tuple[int, int]:
    return max(1, T // 32), T


def _replicate(task):
    """One replication; module-level so worker processes can pickle it."""
    kind, config, seed, window, oracle, model, grid = task
    if kind == "run":
        result = meta.run(config, seed=seed)
        logs, arms, split = result.logs, len(result.intervals), [ag.T_K for ag in result.agents]
    else:
        logs = harness.baseline_ucb_grid(config, grid, seed=seed)
        arms, split = 0, []
    series = harness.compute_regret(logs, oracle, model, config.market, window=window, replication=seed)
    return seed, logs, arms, split, series


def _simulate(kind: str, config: ExperimentConfig, args, grid: int | None = None) -> list[dict]:
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    model = _oracle_model(config, args.mc_oracle)
    oracle = global_optimum(model, config.market)
    harness.write_oracle_csv(out / "oracle.csv", oracle)
    window = args.window or _default_window(config.horizon)
    seeds = [replication_seed(config.seed, r) for r in range(config.replications)]
    tasks = [(kind, config, seed, window, oracle, model, grid) for seed in seeds]
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_replicate, tasks))
    else:
        results = [_replicate(task) for task in tasks]

    rows = []
    prefix = "" if kind == "run" else "baseline_"
    m, n = config.market.m, config.market.n
    for seed, logs, arms, split, series in results:
        harness.write_steps_csv(out / f"{prefix}steps_{seed}.csv", logs, m, n, arms)
        harness.write_regret_csv(out / f"{prefix}regret_{seed}.csv", series)
        row = {"algorithm": kind, "seed": seed, "T": config.horizon, "regret_T": series.final,
               "slope": series.slope, "window": f"{window[0]},{window[1]}"}
        row.update({f"T_{K}": v for K, v in enumerate(split)})
        rows.append(row)
        print(f"{kind} seed={seed}: Reg(T)={series.final:.6g} slope={series.slope:.4f}")
    harness.write_summary_csv(out / f"{prefix}summary.csv", rows)
    return rows


def _cmd_oracle(config: ExperimentConfig, args) -> OracleResult:
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    oracle = global_optimum(_oracle_model(config, args.mc_oracle), config.market)
    harness.write_oracle_csv(out / "oracle.csv", oracle)
    print(f"p*={oracle.p_star:.10g} W*={oracle.W_star:.10g} I*={np.array2string(oracle.I_star, precision=6)}")
    return oracle


def _cmd_check(args) -> int:
    suites = {fn.__name__.removeprefix("check_"): fn for fn in checks.SUITES}
    chosen = args.suite or list(suites)
    unknown = [s for s in chosen if s not in suites]
    if unknown:
        raise _UsageError(f"unknown suite(s) {unknown}; choose from {sorted(suites)}")
    ok = True
    for name in chosen:
        result = suites[name]()
        print(result.line())
        ok &= result.passed
    return EXIT_OK if ok else EXIT_CHECK


def set_field(raw: dict, dotted: str, value) -> dict:
    node = raw
    keys = dotted.split(".")
    for key in keys[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise ConfigError([f"{dotted}: no such config field"])
        node = node[key]
    if not isinstance(node, dict) or keys[-1] not in node:
        raise ConfigError([f"{dotted}: no such config field"])
    node[keys[-1]] = value
    return raw


def _cmd_sweep(config: ExperimentConfig, args) -> int:
    try:
        values = json.loads(args.values)
    except json.JSONDecodeError as exc:
        raise _UsageError(f"--values must be a JSON list ({exc})") from exc
    if not isinstance(values, list) or not values:
        raise _UsageError("--values must be a non-empty JSON list")
    base = Path(config.output)
    rows = []
    for k, value in enumerate(values):
        raw = set_field(config_to_dict(config), args.field, value)
        raw["output"] = str(base / f"{args.field}={value}")
        variant = validate_config(raw)
        for row in _simulate("run", variant, args):
            rows.append({"field": args.field, "value": json.dumps(value), **row})
    harness.write_summary_csv(base / "sweep_summary.csv", rows)
    return EXIT_OK


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "check":
            return _cmd_check(args)
        config = _resolve(args)
        if args.command == "run":
            _simulate("run", config, args)
        elif args.command == "baseline":
            grid = args.grid or math.ceil(config.horizon ** (1.0 / 3.0) - 1e-9)
            _simulate("baseline", config, args, grid=grid)
        elif args.command == "oracle":
            _cmd_oracle(config, args)
        else:
            return _cmd_sweep(config, args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        for msg in exc.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"pla: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
