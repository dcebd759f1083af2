"""``fppchaos`` command line entry point."""
from __future__ import annotations

import argparse
import sys

from ..influence import CensoringBudgetExceeded
from .config import EXPERIMENTS, load_config, parse_t_grid
from .output import EXIT_CENSORED, write_outputs
from .runners import run_experiment

__all__ = ["main", "build_parser"]


def _target(text: str) -> tuple[int, ...]:
    parts = [int(x) for x in text.split(",") if x.strip()]
    return tuple(parts)


def _sizes(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fppchaos",
        description="Dynamical first-passage percolation experiments.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--seed", type=int)
    p.add_argument("--v", type=_target,
                   help="target vertex as comma-separated coordinates, or a single |v|_1")
    p.add_argument("--dist", help="weight law, e.g. uniform:0,1 or atomic:1=0.5,2=0.5")
    p.add_argument("--t-grid", type=parse_t_grid, help="a:b:n or a comma-separated list")
    p.add_argument("--samples", type=int, dest="n_samples")
    p.add_argument("--sizes", type=_sizes, help="comma-separated |v|_1 values")
    p.add_argument("--k", type=int, help="replica count for valleys")
    p.add_argument("--padding", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="CSV path; a .json summary is written next to it")
    p.add_argument("--plot", action="store_true", default=None,
                   help="also write a gnuplot script")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("config",) and v is not None}
    try:
        cfg = load_config(args.config, **overrides)
    except ValueError as exc:
        print(f"fppchaos: {exc}", file=sys.stderr)
        return 1
    try:
        result = run_experiment(cfg)
    except CensoringBudgetExceeded as exc:
        print(f"fppchaos: censoring budget exceeded: {exc}", file=sys.stderr)
        return EXIT_CENSORED
    written = write_outputs(result, cfg.out, plot=cfg.plot)
    if cfg.experiment in ("oracle", "lemmas"):
        sys.stdout.write(result.to_json())
    elif not written:
        sys.stdout.write(result.to_csv())
    for path in written:
        print(f"wrote {path}", file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
