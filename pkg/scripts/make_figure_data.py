#!/usr/bin/env python3
"""Generate the CSV inputs the figure scripts consume.

Runs the desk-scale presets for the SNR-sweep figures into an output
directory (results/ by default). Pass --full for paper-scale budgets, or
--preset to pick a subset.
"""

import argparse
import pathlib
import sys

from lasmimo.cli import PRESETS, main as cli_main

SWEEPS = ("fig3", "fig11", "fig13")


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results", type=pathlib.Path)
    parser.add_argument("--preset", action="append", choices=sorted(PRESETS), default=None)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--full", action="store_true")
    args = parser.parse_args(argv)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    presets = args.preset or list(SWEEPS)
    for name in presets:
        out = args.out_dir / f"{name}.csv"
        cli_args = [
            "preset", name,
            "--out", str(out),
            "--seed", str(args.seed),
            "--workers", str(args.workers),
        ]
        if args.full:
            cli_args.append("--full")
        print(f"== {name} -> {out}")
        code = cli_main(cli_args)
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(run())
