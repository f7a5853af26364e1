"""Effective-likelihood construction and baseline detectors.

Detection works on the real quadratic likelihood
Lambda(b) = b'.y_eff - b'.H_eff.b built from the received vector, where
y_eff = H^H y + (H^H y)* and H_eff = H^H H. All functions accept either a
complex channel matrix or a real equivalent channel (for the 4-QAM real
decomposition); conjugation is a no-op in the real case.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ChannelMatrix

RCOND = 1e-12  # relative conditioning floor for pseudo-inverses


class SingularChannelError(np.linalg.LinAlgError):
    """Channel (or deflated channel) is rank deficient beyond RCOND."""


@dataclass
class EffectiveSystem:
    """Real-valued triple (y_eff, H_eff, H_real) defining the likelihood."""

    y_eff: np.ndarray
    h_eff: np.ndarray
    h_real: np.ndarray
    d: int


@dataclass
class DetectorOutput:
    hard: np.ndarray
    soft: np.ndarray


@dataclass
class OpCounter:
    """Accumulates work units (scalar multiply counts from actual array dims)."""

    ops: int = 0

    def add(self, n: int) -> None:
        self.ops += int(n)


def as_matrix(h) -> np.ndarray:
    if isinstance(h, ChannelMatrix):
        return h.entries
    return np.asarray(h)


def _slice(soft: np.ndarray) -> np.ndarray:
    # ties (soft exactly 0) go to +1 for deterministic replay
    return np.where(soft >= 0, 1.0, -1.0)


def build_effective(h, y: np.ndarray) -> EffectiveSystem:
    hm = as_matrix(h)
    y = np.asarray(y)
    if hm.shape[0] != y.shape[0]:
        raise ValueError(f"channel has {hm.shape[0]} rows but y has length {y.shape[0]}")
    hy = hm.conj().T @ y
    y_eff = np.real(hy + hy.conj())
    h_eff = hm.conj().T @ hm
    h_real = 2.0 * np.real(h_eff)
    return EffectiveSystem(y_eff=y_eff, h_eff=h_eff, h_real=h_real, d=hm.shape[1])


def likelihood(sys: EffectiveSystem, b: np.ndarray) -> float:
    """Lambda(b) = b'.y_eff - b'.H_eff.b, evaluated through the real H_real/2."""
    b = np.asarray(b, dtype=float)
    return float(b @ sys.y_eff - 0.5 * b @ (sys.h_real @ b))


def _pinv_checked(hm: np.ndarray) -> np.ndarray:
    """Left pseudo-inverse via SVD with an explicit rank check (no regularization)."""
    u, s, vh = np.linalg.svd(hm, full_matrices=False)
    if s[0] == 0.0 or s[-1] <= RCOND * s[0]:
        raise SingularChannelError(
            f"matrix of shape {hm.shape} is rank deficient (cond > {1.0 / RCOND:g})"
        )
    return (vh.conj().T * (1.0 / s)) @ u.conj().T


def mf_detect(sys: EffectiveSystem) -> DetectorOutput:
    """Matched filter: soft output Re(H^H y), i.e. y_eff / 2."""
    soft = 0.5 * sys.y_eff
    return DetectorOutput(hard=_slice(soft), soft=soft)


def zf_detect(h, y: np.ndarray) -> DetectorOutput:
    """Zero forcing through the left pseudo-inverse; errors out on rank deficiency."""
    hm = as_matrix(h)
    soft = np.real(_pinv_checked(hm) @ np.asarray(y))
    return DetectorOutput(hard=_slice(soft), soft=soft)


def mmse_detect(h, y: np.ndarray, n0: float, es: float = 1.0) -> DetectorOutput:
    """Linear MMSE: soft = Re((H^H H + (n0/es) I)^-1 H^H y)."""
    if n0 < 0:
        raise ValueError(f"noise variance must be >= 0, got {n0}")
    hm = as_matrix(h)
    gram = hm.conj().T @ hm
    reg = gram + (n0 / es) * np.eye(hm.shape[1])
    soft = np.real(np.linalg.solve(reg, hm.conj().T @ np.asarray(y)))
    return DetectorOutput(hard=_slice(soft), soft=soft)


def zf_sic_detect(h, y: np.ndarray, ops: OpCounter | None = None) -> DetectorOutput:
    """Ordered ZF with successive cancellation (nulling-and-cancelling V-BLAST).

    At each stage the stream with the smallest pseudo-inverse row norm
    (highest post-detection SNR) is sliced, its contribution cancelled, and
    its column removed. `ops`, when given, accumulates the multiply counts
    of each stage so the N_t^2 N_r per-bit scaling can be measured.
    """
    hm = as_matrix(h).copy()
    y_cur = np.asarray(y).astype(hm.dtype, copy=True)
    n_r, n_t = hm.shape
    hard = np.empty(n_t)
    soft = np.empty(n_t)
    remaining = list(range(n_t))
    while remaining:
        k = hm.shape[1]
        g = _pinv_checked(hm)
        if ops is not None:
            ops.add(k * k * n_r + k * k * k)  # SVD-based pseudo-inverse
        norms = np.sum(np.abs(g) ** 2, axis=1)
        if ops is not None:
            ops.add(k * n_r)
        i = int(np.argmin(norms))
        s = float(np.real(g[i] @ y_cur))
        if ops is not None:
            ops.add(n_r)
        b_hat = 1.0 if s >= 0 else -1.0
        idx = remaining.pop(i)
        hard[idx] = b_hat
        soft[idx] = s
        y_cur = y_cur - hm[:, i] * b_hat
        if ops is not None:
            ops.add(n_r)
        hm = np.delete(hm, i, axis=1)
    return DetectorOutput(hard=hard, soft=soft)


def ml_oracle(sys: EffectiveSystem, max_d: int = 20) -> np.ndarray:
    """Exhaustive maximizer of Lambda over {+-1}^d; ties resolve toward +1.

    Candidates are scanned with +1 preferred in earlier positions, so the
    first maximum encountered is the tie-break winner (d=1 with y_eff=0
    returns +1, matching the slicer convention).
    """
    d = sys.d
    if d > max_d:
        raise ValueError(f"exhaustive search over 2^{d} candidates refused (d > {max_d})")
    best_b = None
    best_lam = -np.inf
    shifts = np.arange(d - 1, -1, -1)
    for start in range(0, 2**d, 65536):
        codes = np.arange(start, min(start + 65536, 2**d), dtype=np.int64)
        bits = (codes[:, None] >> shifts) & 1
        cand = 1.0 - 2.0 * bits  # code 0 -> all +1, later positions flip first
        lam = cand @ sys.y_eff - 0.5 * np.einsum("ij,ij->i", cand @ sys.h_real, cand)
        i = int(np.argmax(lam))
        if lam[i] > best_lam:
            best_lam = float(lam[i])
            best_b = cand[i].copy()
    return best_b


def real_decompose(h, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stack a complex system into its exact real form.

    H_r = [[Re H, -Im H], [Im H, Re H]], y_r = [Re y; Im y], so that
    H_r [Re b; Im b] reproduces Re/Im of H b for any complex b.
    """
    hm = as_matrix(h)
    y = np.asarray(y)
    h_r = np.block([[hm.real, -hm.imag], [hm.imag, hm.real]])
    y_r = np.concatenate([y.real, y.imag])
    return h_r, y_r
