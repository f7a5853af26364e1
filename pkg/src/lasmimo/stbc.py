"""Full-rate non-orthogonal space-time block codes built from cyclic division algebras.

An n x n code matrix carries n^2 data symbols x[u, v]. Entry (r, c) draws
symbol family u = (r - c) mod n with coefficient w_n^(c v) t^v, w_n = exp(2 pi j / n),
and a leading delta exactly when r < c. The information-lossless (ILL)
parameterization sets delta = t = 1; the full-diversity variant (FD-ILL) uses
delta = exp(sqrt(5) j), t = exp(j). Linearizing H X(x) into an equivalent
channel acting on vec(x) lets the standard detectors decode these codes
unchanged.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import las
from .detectors import (
    build_effective,
    mf_detect,
    mmse_detect,
    real_decompose,
    zf_detect,
)
from .model import Modulation, NoiseSpec, bits_to_symbols, symbols_to_bits


class StbcParam(Enum):
    ILL = "ill"
    FD_ILL = "fd_ill"


@dataclass(frozen=True)
class StbcCode:
    """Code size n, unit-modulus scalars delta and t, and the n^2 weight matrices.

    weights[u * n + v] is the n x n coefficient matrix of symbol x[u, v]; each
    has exactly one nonzero entry per column, of modulus 1 when delta = t = 1.
    """

    n: int
    delta: complex
    t: complex
    weights: np.ndarray


@dataclass(frozen=True)
class EquivalentChannel:
    """Complex (n n_r) x n^2 map from vec(x) to the received block stacked slot-major."""

    matrix: np.ndarray
    n: int
    n_r: int


def build_code(n: int, param: StbcParam = StbcParam.ILL) -> StbcCode:
    if n < 1:
        raise ValueError(f"code size must be positive, got {n}")
    if param is StbcParam.ILL:
        delta, t = 1.0 + 0.0j, 1.0 + 0.0j
    else:
        delta, t = cmath.exp(1j * math.sqrt(5.0)), cmath.exp(1j)
    omega = cmath.exp(2j * math.pi / n)
    weights = np.zeros((n * n, n, n), dtype=complex)
    for u in range(n):
        for v in range(n):
            for c in range(n):
                r = (u + c) % n
                coeff = (omega ** (c * v)) * (t**v)
                if r < c:
                    coeff *= delta
                weights[u * n + v, r, c] = coeff
    return StbcCode(n=n, delta=delta, t=t, weights=weights)


def encode(code: StbcCode, symbols: np.ndarray) -> np.ndarray:
    """Weighted sum of the code's coefficient matrices; symbols ordered x[u, v] row-major."""
    symbols = np.asarray(symbols)
    if symbols.shape != (code.n * code.n,):
        raise ValueError(f"expected {code.n * code.n} symbols, got {symbols.shape}")
    return np.tensordot(symbols, code.weights, axes=([0], [0]))


def linearize(code: StbcCode, h) -> EquivalentChannel:
    """Equivalent channel whose column (u, v) is vec(H A[u, v]), slot-major stacking."""
    hm = np.asarray(getattr(h, "entries", h))
    if hm.shape[1] != code.n:
        raise ValueError(f"channel has {hm.shape[1]} columns, code needs {code.n}")
    n_r = hm.shape[0]
    # hm @ weights broadcasts to (n^2, n_r, n); vec in column-major (per time slot)
    stacked = np.transpose(hm @ code.weights, (0, 2, 1)).reshape(code.n * code.n, -1)
    return EquivalentChannel(matrix=stacked.T, n=code.n, n_r=n_r)


def transmit_block(
    code: StbcCode,
    symbols: np.ndarray,
    h,
    noise: NoiseSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    """Received n_r x n block for one code matrix, sent at Es per antenna per slot.

    The code matrix is scaled by 1/sqrt(n) so each antenna radiates unit
    average energy per slot and the per-receive-antenna SNR convention holds
    with n transmit antennas.
    """
    hm = np.asarray(getattr(h, "entries", h))
    x = encode(code, symbols) / math.sqrt(code.n)
    w = math.sqrt(noise.n0 / 2.0) * (
        rng.standard_normal((hm.shape[0], code.n))
        + 1j * rng.standard_normal((hm.shape[0], code.n))
    )
    return hm @ x + w


def _bit_pipeline(code: StbcCode, h, y_block: np.ndarray):
    """Real +-1 bit system for one received block (channel scaled for Es/antenna)."""
    eq = linearize(code, h).matrix / math.sqrt(code.n)
    y_vec = np.asarray(y_block).flatten(order="F")
    h_r, y_r = real_decompose(eq, y_vec)
    h_bits = h_r / math.sqrt(2.0)  # 4-QAM rails carry +-1/sqrt(2)
    return build_effective(h_bits, y_r), h_bits, y_r


def _initial_bits(sys, h_bits, y_r, n0: float, start: str) -> np.ndarray:
    if start == "mf":
        return mf_detect(sys).hard
    if start == "zf":
        return zf_detect(h_bits, y_r).hard
    if start == "mmse":
        return mmse_detect(h_bits, y_r, n0 / 2.0).hard
    raise ValueError(f"unknown initial detector {start!r}")


def stbc_decode_las(
    code: StbcCode,
    h,
    y_block: np.ndarray,
    noise: NoiseSpec,
    initial: str = "mmse",
) -> tuple[np.ndarray, np.ndarray, las.LasRunStats]:
    """Decode one received block: linearize, real-decompose, seed LAS, slice.

    Returns (symbol decisions, raw +-1 bits, LAS run stats). `initial` picks
    the detector whose hard output seeds the search: "mf", "zf", or "mmse".
    """
    sys, h_bits, y_r = _bit_pipeline(code, h, y_block)
    b0 = _initial_bits(sys, h_bits, y_r, noise.n0, initial)
    b_fp, stats = las.las_run(sys, b0)
    symbols = bits_to_symbols(b_fp, Modulation.QAM4)
    return symbols, b_fp, stats


def stbc_decode_baseline(
    code: StbcCode,
    h,
    y_block: np.ndarray,
    noise: NoiseSpec,
    detector: str,
) -> np.ndarray:
    """Hard +-1 bits from a linear detector alone (no search), same pipeline."""
    sys, h_bits, y_r = _bit_pipeline(code, h, y_block)
    return _initial_bits(sys, h_bits, y_r, noise.n0, detector)


def block_bits(symbols: np.ndarray) -> np.ndarray:
    """The +-1 bits (I rails then Q rails) carried by a block's 4-QAM symbols."""
    return symbols_to_bits(symbols, Modulation.QAM4)
