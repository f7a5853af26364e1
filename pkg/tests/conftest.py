import numpy as np
import pytest

from lasmimo.detectors import build_effective
from lasmimo.model import NoiseSpec, Modulation, generate_channel, random_frame, transmit


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_instance(n_t, n_r, snr_db, rng):
    """Random BPSK instance: channel, transmitted bits, received vector, system."""
    ch = generate_channel(n_t, n_r, rng)
    frame = random_frame(n_t, Modulation.BPSK, rng)
    noise = NoiseSpec.for_system(snr_db, n_t)
    y = transmit(frame, ch, noise, rng)
    return ch, frame, noise, y, build_effective(ch, y)


def eq3_likelihood(h, y, b):
    """Direct evaluation of b'.H^H y + b'(H^H y)* - b'.H^H H b (independent oracle)."""
    hm = np.asarray(getattr(h, "entries", h))
    hy = hm.conj().T @ np.asarray(y)
    b = np.asarray(b, dtype=float)
    val = b @ hy + b @ hy.conj() - b @ (hm.conj().T @ hm @ b)
    assert abs(val.imag) < 1e-9
    return float(val.real)
