"""Closed-form reference curves overlaid on the simulated data.

Local re-implementations (this package reads CSVs only): gamma is the linear
average received SNR, noise has per-component variance n0/2, so the BPSK AWGN
reference is erfc(sqrt(gamma))/2 and a 4-QAM rail gives Q(sqrt(gamma)).
"""

from __future__ import annotations

import math


def _gamma(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


def q_func(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def awgn_bpsk(snr_db: float) -> float:
    return 0.5 * math.erfc(math.sqrt(_gamma(snr_db)))


def awgn_qam4(snr_db: float) -> float:
    return q_func(math.sqrt(_gamma(snr_db)))


def rayleigh_bpsk(snr_db: float) -> float:
    g = _gamma(snr_db)
    return 0.5 * (1.0 - math.sqrt(g / (1.0 + g)))


def mrc_bpsk(branches: int, snr_db_per_branch: float) -> float:
    g = _gamma(snr_db_per_branch)
    mu = math.sqrt(g / (1.0 + g))
    p, q = 0.5 * (1.0 - mu), 0.5 * (1.0 + mu)
    return (p**branches) * sum(
        math.comb(branches - 1 + k, k) * q**k for k in range(branches)
    )


def mrc_split_power(branches: int, total_snr_db: float) -> float:
    """MRC bound when unit transmit power is split across the branches."""
    per_branch = total_snr_db - 10.0 * math.log10(branches)
    return mrc_bpsk(branches, per_branch)
