"""Channel, noise, and modulation primitives shared by all link-level scenarios.

Conventions used throughout the package: SNR enters in dB at API boundaries
and is converted to linear scale internally; the average symbol energy is
fixed at 1, so the per-receive-antenna noise variance is n0 = n_t / gamma
with gamma the average received SNR per receive antenna (linear).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

SYMBOL_ENERGY = 1.0


def db_to_linear(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


def linear_to_db(gamma: float) -> float:
    return 10.0 * math.log10(gamma)


def q_func(x: float) -> float:
    """Gaussian tail probability Q(x) via erfc, stable far into the tail."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def complex_gaussian(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with total variance `var`."""
    scale = math.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


class Modulation(Enum):
    BPSK = "bpsk"
    QAM4 = "qam4"

    @property
    def bits_per_symbol(self) -> int:
        return 1 if self is Modulation.BPSK else 2


@dataclass
class ChannelMatrix:
    """Complex n_r x n_t matrix of i.i.d. Rayleigh path gains.

    Entries are circularly-symmetric complex Gaussian with per-component
    variance 0.5, so E|h|^2 = 1.
    """

    entries: np.ndarray
    n_t: int
    n_r: int

    def __post_init__(self):
        if self.n_t < 1 or self.n_r < 1:
            raise ValueError(f"antenna counts must be positive, got {self.n_t}x{self.n_r}")
        if self.n_t > self.n_r:
            raise ValueError(f"n_t={self.n_t} must not exceed n_r={self.n_r}")
        if self.entries.shape != (self.n_r, self.n_t):
            raise ValueError(
                f"entries shape {self.entries.shape} does not match ({self.n_r}, {self.n_t})"
            )


@dataclass
class NoiseSpec:
    """Receiver noise level tied to the average received SNR per antenna."""

    snr_db: float
    n0: float

    @classmethod
    def for_system(cls, snr_db: float, n_t: int, es: float = SYMBOL_ENERGY) -> "NoiseSpec":
        return cls(snr_db=snr_db, n0=n_t * es / db_to_linear(snr_db))


@dataclass
class TxFrame:
    """One transmitted vector: +-1 bits and their symbol mapping.

    BPSK carries one bit per antenna; 4-QAM carries two (the in-phase bits
    for all antennas first, then the quadrature bits), each rail scaled by
    1/sqrt(2) so the average symbol energy stays exactly 1.
    """

    bits: np.ndarray
    symbols: np.ndarray
    modulation: Modulation


def bits_to_symbols(bits: np.ndarray, modulation: Modulation) -> np.ndarray:
    bits = np.asarray(bits, dtype=float)
    if modulation is Modulation.BPSK:
        return bits.astype(complex)
    if bits.size % 2:
        raise ValueError("4-QAM needs an even bit count (I rails then Q rails)")
    half = bits.size // 2
    return (bits[:half] + 1j * bits[half:]) / math.sqrt(2.0)


def symbols_to_bits(symbols: np.ndarray, modulation: Modulation) -> np.ndarray:
    symbols = np.asarray(symbols)
    if modulation is Modulation.BPSK:
        return np.where(symbols.real >= 0, 1.0, -1.0)
    re = np.where(symbols.real >= 0, 1.0, -1.0)
    im = np.where(symbols.imag >= 0, 1.0, -1.0)
    return np.concatenate([re, im])


def frame_from_bits(bits: np.ndarray, modulation: Modulation) -> TxFrame:
    bits = np.asarray(bits, dtype=float)
    if not np.all(np.abs(bits) == 1.0):
        raise ValueError("bits must be +-1")
    return TxFrame(bits=bits, symbols=bits_to_symbols(bits, modulation), modulation=modulation)


def random_frame(n_t: int, modulation: Modulation, rng: np.random.Generator) -> TxFrame:
    nbits = n_t * modulation.bits_per_symbol
    bits = 2.0 * rng.integers(0, 2, size=nbits) - 1.0
    return frame_from_bits(bits, modulation)


def generate_channel(n_t: int, n_r: int, rng: np.random.Generator) -> ChannelMatrix:
    """Draw an i.i.d. Rayleigh channel; deterministic given the generator state."""
    if n_t < 1 or n_r < 1:
        raise ValueError(f"antenna counts must be positive, got {n_t}x{n_r}")
    if n_t > n_r:
        raise ValueError(f"n_t={n_t} must not exceed n_r={n_r}")
    return ChannelMatrix(entries=complex_gaussian(rng, (n_r, n_t)), n_t=n_t, n_r=n_r)


def transmit(
    frame: TxFrame,
    channel: ChannelMatrix,
    noise: NoiseSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    """y = H b + n with complex noise of per-component variance n0/2."""
    if frame.symbols.size != channel.n_t:
        raise ValueError(
            f"frame has {frame.symbols.size} symbols for a {channel.n_t}-antenna channel"
        )
    n = complex_gaussian(rng, channel.n_r, var=1.0) * math.sqrt(noise.n0)
    return channel.entries @ frame.symbols + n


def perturb_channel(
    channel: ChannelMatrix, sigma_e_sq: float, rng: np.random.Generator
) -> ChannelMatrix:
    """Receiver-side channel estimate H + dH, dH i.i.d. complex Gaussian.

    sigma_e_sq is the total variance per complex entry (per-component
    variance sigma_e_sq/2).
    """
    if sigma_e_sq < 0:
        raise ValueError(f"estimation error variance must be >= 0, got {sigma_e_sq}")
    delta = complex_gaussian(rng, channel.entries.shape, var=1.0) * math.sqrt(sigma_e_sq)
    return ChannelMatrix(entries=channel.entries + delta, n_t=channel.n_t, n_r=channel.n_r)


def siso_rayleigh_ber(snr_db: float) -> float:
    """Closed-form BPSK error rate on a flat Rayleigh channel, coherent detection."""
    g = db_to_linear(snr_db)
    return 0.5 * (1.0 - math.sqrt(g / (1.0 + g)))


def siso_awgn_ber(snr_db: float, modulation: Modulation = Modulation.BPSK) -> float:
    """Uncoded error rate on a nonfading channel under the gamma = Es/n0 convention.

    BPSK decides on the real noise component (variance n0/2), giving
    erfc(sqrt(gamma))/2; each 4-QAM rail carries Es/2 per bit, giving
    Q(sqrt(gamma)).
    """
    g = db_to_linear(snr_db)
    if modulation is Modulation.BPSK:
        return 0.5 * math.erfc(math.sqrt(g))
    return q_func(math.sqrt(g))
