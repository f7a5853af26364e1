"""Synchronous multicarrier DS-CDMA: spreading, per-subcarrier fading, LAS adapter.

K users send one bit each over M subcarriers with length-N random binary
signatures. Matched filtering each subcarrier yields
y_i = R_i H_i A b + n_i with R_i the signature cross-correlation matrix,
H_i the diagonal fading matrix, and colored noise of covariance sigma^2 R_i.
Summing the per-subcarrier matched statistics produces an effective system
with the same algebra as the MIMO case, so the LAS search applies unchanged.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import las
from .detectors import (
    DetectorOutput,
    EffectiveSystem,
    SingularChannelError,
    mf_detect,
)
from .model import complex_gaussian, db_to_linear, siso_rayleigh_ber


@dataclass
class McCdmaConfig:
    """System dimensions and per-user transmit amplitudes (total across subcarriers)."""

    k_users: int
    m_subcarriers: int
    n_chips: int
    amplitudes: np.ndarray | None = None

    def __post_init__(self):
        if min(self.k_users, self.m_subcarriers, self.n_chips) < 1:
            raise ValueError("k_users, m_subcarriers, n_chips must all be positive")
        if self.amplitudes is None:
            self.amplitudes = np.ones(self.k_users)
        else:
            self.amplitudes = np.asarray(self.amplitudes, dtype=float)
            if self.amplitudes.shape != (self.k_users,):
                raise ValueError("need one amplitude per user")

    @property
    def loading(self) -> float:
        return self.k_users / (self.m_subcarriers * self.n_chips)

    @property
    def load_class(self) -> str:
        a = self.loading
        return "underloaded" if a < 1 else ("fully loaded" if a == 1 else "overloaded")


@dataclass
class SubcarrierSystem:
    """One subcarrier's signatures, cross-correlations, fading, and noise level."""

    spreading: np.ndarray  # N x K, columns +-1/sqrt(N)
    r_matrix: np.ndarray  # K x K, unit diagonal
    channel: np.ndarray  # K complex diagonal entries
    noise_var: float


def draw_subcarrier_systems(
    cfg: McCdmaConfig, snr_db: float, rng: np.random.Generator
) -> list[SubcarrierSystem]:
    """Fresh random signatures and i.i.d. Rayleigh fades for each subcarrier.

    The average received SNR of a unit-amplitude user is A^2/sigma^2, so the
    chip noise variance is sigma^2 = 1/gamma.
    """
    sigma_sq = 1.0 / db_to_linear(snr_db)
    systems = []
    for _ in range(cfg.m_subcarriers):
        c = (2.0 * rng.integers(0, 2, size=(cfg.n_chips, cfg.k_users)) - 1.0) / math.sqrt(
            cfg.n_chips
        )
        systems.append(
            SubcarrierSystem(
                spreading=c,
                r_matrix=c.T @ c,
                channel=complex_gaussian(rng, cfg.k_users),
                noise_var=sigma_sq,
            )
        )
    return systems


def _sub_amplitudes(cfg: McCdmaConfig) -> np.ndarray:
    # total transmit power fixed: each subcarrier carries A_k / sqrt(M)
    return cfg.amplitudes / math.sqrt(cfg.m_subcarriers)


def simulate_received(
    cfg: McCdmaConfig,
    systems: list[SubcarrierSystem],
    bits: np.ndarray,
    rng: np.random.Generator,
    return_chips: bool = False,
):
    """Chip-level synthesis and matched filtering on every subcarrier.

    r_i = C_i H_i A b + w_i with white chip noise of variance sigma^2, then
    y_i = C_i' r_i, which equals R_i H_i A b + n_i with noise covariance
    sigma^2 R_i. Returns the M matched-filter vectors (and the chip noise
    when asked, for equivalence checks).
    """
    bits = np.asarray(bits, dtype=float)
    if bits.shape != (cfg.k_users,):
        raise ValueError(f"expected {cfg.k_users} bits, got {bits.shape}")
    a_sub = _sub_amplitudes(cfg)
    ys = []
    chips = []
    for sub in systems:
        w = complex_gaussian(rng, cfg.n_chips, var=sub.noise_var)
        r_chip = sub.spreading @ (sub.channel * a_sub * bits) + w
        ys.append(sub.spreading.T @ r_chip)
        chips.append(w)
    if return_chips:
        return ys, chips
    return ys


def build_effective_mc(
    cfg: McCdmaConfig, systems: list[SubcarrierSystem], ys: list[np.ndarray]
) -> EffectiveSystem:
    """Combine the per-subcarrier matched statistics into one real quadratic system.

    y_ceff = sum_i (H_i* y_i + H_i y_i*), H_ceff = sum_i A H_i R_i H_i* A, and
    the working vector folds the amplitudes: y_eff = A y_ceff. The result
    plugs directly into the LAS search.
    """
    if len(ys) != cfg.m_subcarriers or len(systems) != cfg.m_subcarriers:
        raise ValueError("need one observation and one system per subcarrier")
    k = cfg.k_users
    a_sub = _sub_amplitudes(cfg)
    y_ceff = np.zeros(k)
    h_ceff = np.zeros((k, k), dtype=complex)
    for sub, y in zip(systems, ys):
        y = np.asarray(y)
        if y.shape != (k,):
            raise ValueError(f"observation has shape {y.shape}, expected ({k},)")
        hy = sub.channel.conj() * y
        y_ceff += np.real(hy + hy.conj())
        h_ceff += (a_sub[:, None] * sub.channel[:, None]) * sub.r_matrix * (
            sub.channel.conj()[None, :] * a_sub[None, :]
        )
    y_eff = a_sub * y_ceff
    h_real = 2.0 * np.real(h_ceff)
    return EffectiveSystem(y_eff=y_eff, h_eff=h_ceff, h_real=h_real, d=k)


def mrc_su_ber(m_branches: int, snr_db_per_branch: float) -> float:
    """Closed-form BPSK error rate with m-fold maximal ratio combining.

    i.i.d. Rayleigh branches at the given average SNR each; m = 1 reduces to
    the flat-fading closed form.
    """
    if m_branches < 1:
        raise ValueError(f"branch count must be >= 1, got {m_branches}")
    g = db_to_linear(snr_db_per_branch)
    mu = math.sqrt(g / (1.0 + g))
    p = 0.5 * (1.0 - mu)
    q = 0.5 * (1.0 + mu)
    return (p**m_branches) * sum(
        math.comb(m_branches - 1 + k, k) * q**k for k in range(m_branches)
    )


def _zf_solve(h_real: np.ndarray, y_eff: np.ndarray) -> np.ndarray:
    """Solve H_creal x = y_eff, refusing near-singular systems explicitly."""
    w = np.linalg.eigvalsh(h_real)
    if w[-1] <= 0 or w[0] <= 1e-12 * w[-1]:
        raise SingularChannelError(
            "combined cross-correlation matrix is singular (overloaded ZF undefined)"
        )
    return np.linalg.solve(h_real, y_eff)


METHODS = ("mf", "zf", "mmse", "mf_las", "zf_las", "mmse_las")


def mccdma_detect(
    cfg: McCdmaConfig,
    systems: list[SubcarrierSystem],
    ys: list[np.ndarray],
    method: str,
    return_stats: bool = False,
):
    """Detect all K bits with a baseline or a LAS-refined detector.

    Baselines slice the effective system directly; LAS variants run the
    search from the corresponding start. An overloaded ZF start falls back to
    the MMSE start with a warning, while the plain "zf" method raises.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    sys = build_effective_mc(cfg, systems, ys)
    sigma_sq = systems[0].noise_var
    stats = None
    if method in ("mf", "mf_las"):
        out = mf_detect(sys)
    elif method in ("zf", "zf_las"):
        try:
            if cfg.loading > 1:
                # more users than spreading dimensions: the decorrelator
                # does not exist (the real-part system may still be formally
                # invertible, but it is not the ZF anyone means)
                raise SingularChannelError(
                    f"ZF undefined at loading {cfg.loading:.3g} > 1"
                )
            soft = _zf_solve(sys.h_real, sys.y_eff)
            out = DetectorOutput(hard=np.where(soft >= 0, 1.0, -1.0), soft=soft)
        except SingularChannelError:
            if method == "zf":
                raise
            warnings.warn(
                f"ZF start undefined at loading {cfg.loading:.3g}; using MMSE start",
                stacklevel=2,
            )
            out = _mmse_effective(sys, sigma_sq)
    else:
        out = _mmse_effective(sys, sigma_sq)
    bits = out.hard
    if method.endswith("_las"):
        bits, stats = las.las_run(sys, out.hard)
    if return_stats:
        return bits, stats
    return bits


def _mmse_effective(sys: EffectiveSystem, sigma_sq: float) -> DetectorOutput:
    # Wiener filter for y_eff = H_creal b + v, cov(v) = sigma^2 H_creal
    soft = np.linalg.solve(sys.h_real + sigma_sq * np.eye(sys.d), sys.y_eff)
    return DetectorOutput(hard=np.where(soft >= 0, 1.0, -1.0), soft=soft)
