import itertools
import math

import numpy as np
import pytest

from conftest import eq3_likelihood, make_instance
from lasmimo.detectors import (
    OpCounter,
    SingularChannelError,
    build_effective,
    likelihood,
    mf_detect,
    ml_oracle,
    mmse_detect,
    real_decompose,
    zf_detect,
    zf_sic_detect,
)
from lasmimo.model import Modulation, NoiseSpec, generate_channel, random_frame, transmit


def all_pm1(d):
    return [np.array(b, dtype=float) for b in itertools.product([1.0, -1.0], repeat=d)]


class TestBuildEffective:
    def test_identity_channel(self):
        b = np.array([1.0, -1.0])
        sys = build_effective(np.eye(2, dtype=complex), b.astype(complex))
        np.testing.assert_allclose(sys.y_eff, 2 * b)
        np.testing.assert_allclose(sys.h_real, 2 * np.eye(2))

    def test_zero_observation(self, rng):
        ch = generate_channel(3, 4, rng)
        sys = build_effective(ch, np.zeros(4, dtype=complex))
        np.testing.assert_array_equal(sys.y_eff, np.zeros(3))
        for b in all_pm1(3):
            assert likelihood(sys, b) <= 1e-12

    def test_invariants(self, rng):
        ch, _, _, y, sys = make_instance(4, 4, 10.0, rng)
        np.testing.assert_allclose(sys.h_real, sys.h_real.T, atol=1e-12)
        np.testing.assert_allclose(sys.h_real, 2 * np.real(sys.h_eff), atol=1e-12)
        assert np.min(np.linalg.eigvalsh(sys.h_eff)) > -1e-10
        assert np.isrealobj(sys.y_eff)

    def test_likelihood_matches_direct_form(self, rng):
        ch, _, _, y, sys = make_instance(4, 4, 10.0, rng)
        for _ in range(100):
            b = 2.0 * rng.integers(0, 2, 4) - 1.0
            assert abs(likelihood(sys, b) - eq3_likelihood(ch, y, b)) < 1e-10

    def test_dim_mismatch(self, rng):
        ch = generate_channel(3, 4, rng)
        with pytest.raises(ValueError):
            build_effective(ch, np.zeros(3, dtype=complex))


class TestMf:
    def test_identity_noiseless(self, rng):
        b = 2.0 * rng.integers(0, 2, 5) - 1.0
        sys = build_effective(np.eye(5, dtype=complex), b.astype(complex))
        np.testing.assert_array_equal(mf_detect(sys).hard, b)

    def test_matches_direct_computation(self, rng):
        ch, _, _, y, sys = make_instance(5, 6, 8.0, rng)
        expected = np.sign(np.real(ch.entries.conj().T @ y))
        expected[expected == 0] = 1.0
        np.testing.assert_array_equal(mf_detect(sys).hard, expected)
        np.testing.assert_allclose(mf_detect(sys).soft, np.real(ch.entries.conj().T @ y))


class TestZf:
    def test_noiseless_inversion(self, rng):
        for _ in range(20):
            ch, frame, _, _, _ = make_instance(4, 6, 10.0, rng)
            y = ch.entries @ frame.symbols
            np.testing.assert_array_equal(zf_detect(ch, y).hard, frame.bits)

    def test_pinv_identity(self, rng):
        h = generate_channel(8, 8, rng).entries
        soft_rows = []
        for col in np.eye(8, dtype=complex).T:
            soft_rows.append(zf_detect(h, h @ col).soft)
        np.testing.assert_allclose(np.array(soft_rows).T, np.eye(8), atol=1e-10)

    def test_singular_raises(self):
        h = np.ones((4, 2), dtype=complex)  # rank 1
        with pytest.raises(SingularChannelError):
            zf_detect(h, np.zeros(4, dtype=complex))


class TestMmse:
    def test_zero_noise_equals_zf(self, rng):
        ch, _, _, y, _ = make_instance(4, 5, 10.0, rng)
        np.testing.assert_allclose(
            mmse_detect(ch, y, 0.0).soft, zf_detect(ch, y).soft, atol=1e-8
        )

    def test_wiener_orthogonality(self):
        # real system: error after the Wiener filter is uncorrelated with y
        rng = np.random.default_rng(77)
        h = rng.standard_normal((4, 4))
        sigma_sq = 0.5
        acc = np.zeros((4, 4))
        trials = 10**4
        for _ in range(trials):
            b = 2.0 * rng.integers(0, 2, 4) - 1.0
            y = h @ b + math.sqrt(sigma_sq) * rng.standard_normal(4)
            soft = mmse_detect(h, y, sigma_sq).soft
            acc += np.outer(b - soft, y)
        assert np.max(np.abs(acc / trials)) < 0.05

    def test_negative_noise_rejected(self, rng):
        ch, _, _, y, _ = make_instance(2, 2, 10.0, rng)
        with pytest.raises(ValueError):
            mmse_detect(ch, y, -1.0)


class TestZfSic:
    def test_noiseless_recovery(self, rng):
        for _ in range(20):
            ch, frame, _, _, _ = make_instance(5, 6, 10.0, rng)
            y = ch.entries @ frame.symbols
            np.testing.assert_array_equal(zf_sic_detect(ch, y).hard, frame.bits)

    def test_two_stream_order_oracle(self, rng):
        # exhaustive oracle: both detection orders, min-norm-first rule
        def oracle(h, y):
            g = np.linalg.pinv(h)
            norms = np.sum(np.abs(g) ** 2, axis=1)
            first = int(np.argmin(norms))
            hard = np.empty(2)
            s = float(np.real(g[first] @ y))
            hard[first] = 1.0 if s >= 0 else -1.0
            other = 1 - first
            y2 = y - h[:, first] * hard[first]
            h2 = h[:, [other]]
            g2 = np.linalg.pinv(h2)
            s2 = float(np.real(g2[0] @ y2))
            hard[other] = 1.0 if s2 >= 0 else -1.0
            return hard

        for _ in range(50):
            ch, frame, noise, y, _ = make_instance(2, 3, 6.0, rng)
            np.testing.assert_array_equal(zf_sic_detect(ch, y).hard, oracle(ch.entries, y))

    def test_per_bit_work_scales_cubically(self, rng):
        # counted multiply units per bit should grow ~ n_t^2 n_r = n^3 for square
        per_bit = []
        sizes = (8, 16, 32)
        for n in sizes:
            ch, frame, noise, y, _ = make_instance(n, n, 10.0, rng)
            ops = OpCounter()
            zf_sic_detect(ch, y, ops=ops)
            per_bit.append(ops.ops / n)
        exponent = np.polyfit(np.log(sizes), np.log(per_bit), 1)[0]
        assert 2.5 < exponent < 3.5

    def test_mid_deflation_rank_failure(self):
        h = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]], dtype=complex)
        with pytest.raises(SingularChannelError):
            zf_sic_detect(h, np.ones(3, dtype=complex))


class TestMlOracle:
    def test_d1_sign_rule(self):
        sys = build_effective(np.eye(1, dtype=complex), np.array([0.7 + 0j]))
        assert ml_oracle(sys)[0] == 1.0
        sys = build_effective(np.eye(1, dtype=complex), np.array([-0.7 + 0j]))
        assert ml_oracle(sys)[0] == -1.0
        sys = build_effective(np.eye(1, dtype=complex), np.array([0.0 + 0j]))
        assert ml_oracle(sys)[0] == 1.0  # tie goes to +1

    def test_noiseless_recovers_truth(self, rng):
        for _ in range(10):
            ch, frame, _, _, _ = make_instance(4, 4, 10.0, rng)
            sys = build_effective(ch, ch.entries @ frame.symbols)
            np.testing.assert_array_equal(ml_oracle(sys), frame.bits)

    def test_exhaustive_dominance(self, rng):
        for _ in range(25):
            ch, _, _, y, sys = make_instance(4, 4, 4.0, rng)
            best = ml_oracle(sys)
            lam_best = likelihood(sys, best)
            for b in all_pm1(4):
                assert lam_best >= likelihood(sys, b) - 1e-12

    def test_dominates_other_detectors(self, rng):
        for _ in range(20):
            ch, _, noise, y, sys = make_instance(4, 4, 6.0, rng)
            lam_ml = likelihood(sys, ml_oracle(sys))
            for out in (mf_detect(sys), zf_detect(ch, y), mmse_detect(ch, y, noise.n0)):
                assert lam_ml >= likelihood(sys, out.hard) - 1e-12

    def test_dimension_guard(self, rng):
        ch = generate_channel(21, 21, rng)
        sys = build_effective(ch, np.zeros(21, dtype=complex))
        with pytest.raises(ValueError):
            ml_oracle(sys)


class TestRealDecompose:
    def test_scalar_rotation(self):
        h = np.array([[1j]])
        b = np.array([(1 + 1j) / math.sqrt(2)])
        h_r, y_r = real_decompose(h, h @ b)
        np.testing.assert_allclose(h_r @ np.array([b[0].real, b[0].imag]), y_r, atol=1e-15)

    def test_reconstruction(self, rng):
        h = generate_channel(4, 4, rng).entries
        for _ in range(50):
            frame = random_frame(4, Modulation.QAM4, rng)
            y = h @ frame.symbols
            h_r, y_r = real_decompose(h, y)
            b_r = np.concatenate([frame.symbols.real, frame.symbols.imag])
            assert np.max(np.abs(h_r @ b_r - y_r)) < 1e-12

    def test_real_channel_block_diagonal(self, rng):
        h = rng.standard_normal((3, 3)).astype(complex)
        h_r, _ = real_decompose(h, np.zeros(3, dtype=complex))
        np.testing.assert_array_equal(h_r[:3, 3:], np.zeros((3, 3)))
        np.testing.assert_array_equal(h_r[3:, :3], np.zeros((3, 3)))


class TestDetectorRanking:
    def test_mmse_beats_mf_beats_zf_large_system(self):
        # 64x64 stands in for the large-system ranking at desk scale
        rng = np.random.default_rng(4)
        errs = {"mf": 0, "zf": 0, "mmse": 0}
        bits = 0
        for _ in range(60):
            ch = generate_channel(64, 64, rng)
            frame = random_frame(64, Modulation.BPSK, rng)
            noise = NoiseSpec.for_system(10.0, 64)
            y = transmit(frame, ch, noise, rng)
            sys = build_effective(ch, y)
            bits += 64
            errs["mf"] += int(np.sum(mf_detect(sys).hard != frame.bits))
            errs["zf"] += int(np.sum(zf_detect(ch, y).hard != frame.bits))
            errs["mmse"] += int(np.sum(mmse_detect(ch, y, noise.n0).hard != frame.bits))
        assert errs["mmse"] < errs["mf"] < errs["zf"]
