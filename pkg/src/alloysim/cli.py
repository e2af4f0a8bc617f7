"""Command line entry point: run, suite, emit-plot-data."""

from __future__ import annotations

import argparse
from typing import Optional, Sequence

from .experiments import emit_plot_data, experiment_kinds, run, suite


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="alloysim",
        description=(
            "Seeded Monte Carlo experiments for lattice alloy models: "
            "concentration and conditioning checks, Green-function moment "
            "estimators, eigenvalue counting, and spectral statistics. "
            f"Experiment kinds: {', '.join(experiment_kinds())}."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a single experiment config")
    p_run.add_argument("config", help="path to the experiment JSON config")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", default=None, help="override the output directory")

    p_suite = sub.add_parser("suite", help="run every config in a suite manifest")
    p_suite.add_argument("manifest", help="path to the suite manifest JSON")

    p_plot = sub.add_parser(
        "emit-plot-data", help="collect plot-ready CSV series from completed runs"
    )
    p_plot.add_argument("results_dir", help="directory containing run outputs")

    args = parser.parse_args(argv)
    if args.command == "run":
        return run(args.config, seed=args.seed, out=args.out)
    if args.command == "suite":
        return suite(args.manifest)
    return emit_plot_data(args.results_dir)


if __name__ == "__main__":
    raise SystemExit(main())
