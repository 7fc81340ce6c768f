"""Command-line surface: simulate one instance, sweep densities, read crossings.

Exit codes: 0 success, 1 usage/config error, 2 solver non-convergence,
3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import Config, parse_config
from .errors import CnAllocError, ConfigError, NonConvergenceError
from .geometry import Window
from .io import emit_instance_json, emit_plot, emit_sweep_csv, load_sweep_csv
from .metrics import run_instance, sweep


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="cn-alloc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="solve one instance end to end")
    sim.add_argument("--config", help="flat JSON config file")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--method", choices=["exact", "approximate"])
    sim.add_argument("--out", required=True, help="output JSON path")

    swp = sub.add_parser("sweep", help="Monte-Carlo sweep over density ratios")
    swp.add_argument("--config", help="flat JSON config file")
    swp.add_argument("--ratios", required=True, help="start:stop:step (stop inclusive)")
    swp.add_argument("--iterations", type=int, required=True)
    swp.add_argument("--method", choices=["exact", "approximate"])
    swp.add_argument("--seed", type=int, default=0)
    swp.add_argument("--out", required=True, help="output CSV path")
    swp.add_argument("--plot", help="optional SVG path")
    swp.add_argument("--workers", type=int, help="parallel workers (default: CN_ALLOC_THREADS or CPU count)")

    crs = sub.add_parser("crossing", help="working point of a sweep CSV")
    crs.add_argument("--in", dest="infile", required=True)
    return parser


def _load_config(path) -> Config:
    if path is None:
        return Config()
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    return parse_config(text)


def _parse_ratios(spec: str) -> np.ndarray:
    try:
        start, stop, step = (float(part) for part in spec.split(":"))
    except ValueError as err:
        raise ConfigError(f"--ratios must be start:stop:step, got {spec!r}") from err
    if step <= 0 or stop < start:
        raise ConfigError(f"--ratios must increase, got {spec!r}")
    return np.arange(start, stop + step / 2, step)


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    method = args.method or cfg.method
    result = run_instance(
        cfg.lambda_m,
        cfg.lambda_n,
        cfg.deployment,
        cfg.radio_params(),
        method,
        args.seed,
        beta=cfg.beta,
        window=Window(cfg.window_side),
        supply_mode=cfg.supply_mode,
        allocate_mode=cfg.allocate_mode,
        cost_weight=cfg.cost_weight,
        support_threshold=cfg.support_threshold,
        tol=cfg.tol,
    )
    if result.degenerate:
        print("degenerate instance (fewer than 2 stations or no users)", file=sys.stderr)
        return 2
    emit_instance_json(result, args.out, config=cfg, support_threshold=cfg.support_threshold)
    print(f"wrote {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    method = args.method or cfg.method
    ratios = _parse_ratios(args.ratios)
    result = sweep(
        ratios,
        args.iterations,
        method,
        cfg.deployment,
        cfg.radio_params(),
        args.seed,
        lambda_n=cfg.lambda_n,
        beta=cfg.beta,
        window=Window(cfg.window_side),
        supply_mode=cfg.supply_mode,
        allocate_mode=cfg.allocate_mode,
        cost_weight=cfg.cost_weight,
        support_threshold=cfg.support_threshold,
        tol=cfg.tol,
        workers=args.workers,
    )
    emit_sweep_csv(result, args.out)
    if args.plot:
        emit_plot(result, args.plot)
    if result.crossing is not None:
        print(f"crossing ratio={result.crossing.ratio:.9g} level={result.crossing.level:.9g}")
    else:
        print("crossing none")
    print(f"wrote {args.out}")
    return 0


def _cmd_crossing(args) -> int:
    result = load_sweep_csv(args.infile)
    if result.crossing is None:
        print("none")
    else:
        print(f"{result.crossing.ratio:.9g} {result.crossing.level:.9g}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_crossing(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except NonConvergenceError as err:
        print(f"solver did not converge: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return 3
    except CnAllocError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
