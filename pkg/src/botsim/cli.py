"""Command line entry point: ``botsim run <config> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from .config import load_config
from .engine import ConfigError, SimConfig
from .experiment import ExperimentError, ExperimentSpec, run_experiment
from .trust import Model

OUT_ENV = "BOTSIM_OUT"


def _error(kind: str, message: str) -> None:
    print("error: " + json.dumps({"kind": kind, "message": message}, sort_keys=True), file=sys.stderr)


def _int_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed list {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("seed list must not be empty")
    return values


def _model_list(text: str) -> List[Model]:
    try:
        return [Model.parse(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="botsim", description="Trust-enabled P2P botnet simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a simulation experiment")
    r.add_argument("config", help="config file (use '-' for all defaults)")
    r.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./runs)")
    r.add_argument("--seeds", type=_int_list, help="comma separated seeds, e.g. 0,1,2")
    r.add_argument("--models", type=_model_list, help="comma separated subset of ebay,beta,sl,ct")
    r.add_argument("--baseline", action="store_true", help="also run trust-disabled baselines per seed")
    r.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    r.add_argument("--quiet", action="store_true")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    log = logging.getLogger("botsim")

    try:
        base = load_config(args.config) if args.config != "-" else None
    except ConfigError as exc:
        _error("config", str(exc))
        return 2
    except OSError as exc:
        _error("config", f"cannot read {args.config}: {exc.strerror}")
        return 2
    if base is None:
        base = SimConfig()

    out = Path(args.out or os.environ.get(OUT_ENV) or "runs")
    seeds = tuple(args.seeds) if args.seeds else (base.seed,)
    spec = ExperimentSpec(
        base=base,
        output_dir=out,
        seeds=seeds,
        models=tuple(args.models) if args.models is not None else None,
        baseline=args.baseline,
    )

    def progress(label, seed, summary):
        reduction = "" if summary.reduction_pct is None else f" reduction={summary.reduction_pct:.2f}%"
        precision = "n/a" if summary.precision is None else f"{summary.precision:.4f}"
        log.info("%s seed=%d final_in_degree=%.2f precision=%s%s (%.1fs)", label, seed,
                 summary.final_mean_sensor_in_degree, precision, reduction, summary.runtime_wall_clock)

    try:
        result = run_experiment(spec, jobs=max(1, args.jobs), progress=progress)
    except ExperimentError as exc:
        _error("output", str(exc))
        return 3
    if not result.ok:
        for label, seed, err in result.failures:
            _error("run", f"{label} seed={seed}: {err}")
        return 1
    log.info("wrote %s", out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
