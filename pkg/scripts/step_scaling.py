#!/usr/bin/env python3
"""Measure LAS convergence cost: average bit checks per bit versus system size.

The per-bit step count should stay roughly flat as N_t = N_r grows, which is
what makes the search's per-bit complexity O(N_t N_r) overall.
"""

import argparse
import sys

import numpy as np

from lasmimo.detectors import build_effective, mf_detect, mmse_detect, zf_detect
from lasmimo.las import las_run, step_statistics
from lasmimo.model import Modulation, NoiseSpec, generate_channel, random_frame, transmit


def measure(n, snr_db, start, trials, seed):
    rng = np.random.default_rng(seed)
    runs = []
    for _ in range(trials):
        ch = generate_channel(n, n, rng)
        frame = random_frame(n, Modulation.BPSK, rng)
        noise = NoiseSpec.for_system(snr_db, n)
        y = transmit(frame, ch, noise, rng)
        sys_ = build_effective(ch, y)
        if start == "mf":
            b0 = mf_detect(sys_).hard
        elif start == "zf":
            b0 = zf_detect(ch, y).hard
        else:
            b0 = mmse_detect(ch, y, noise.n0).hard
        _, stats = las_run(sys_, b0)
        runs.append(stats)
    return step_statistics(runs)


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="20,50,100,200")
    parser.add_argument("--snr-db", type=float, default=10.0)
    parser.add_argument("--starts", default="mf,zf,mmse")
    parser.add_argument("--trials", type=int, default=25)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    sizes = [int(s) for s in args.sizes.split(",")]
    starts = args.starts.split(",")
    print(f"steps per bit at {args.snr_db} dB ({args.trials} trials per point)")
    header = "n".rjust(6) + "".join(s.rjust(10) for s in starts)
    print(header)
    for n in sizes:
        row = f"{n:6d}"
        for start in starts:
            row += f"{measure(n, args.snr_db, start, args.trials, args.seed):10.2f}"
        print(row)
    return 0


if __name__ == "__main__":
    sys.exit(run())
