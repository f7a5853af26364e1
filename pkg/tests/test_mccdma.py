import itertools
import math

import numpy as np
import pytest

from lasmimo.detectors import SingularChannelError, likelihood, ml_oracle
from lasmimo.mccdma import (
    McCdmaConfig,
    build_effective_mc,
    draw_subcarrier_systems,
    mccdma_detect,
    mrc_su_ber,
    simulate_received,
)
from lasmimo.model import db_to_linear, linear_to_db, siso_rayleigh_ber


def direct_lambda(cfg, systems, ys, b):
    """The likelihood written out subcarrier by subcarrier (independent oracle)."""
    a = np.diag(cfg.amplitudes / math.sqrt(cfg.m_subcarriers))
    b = np.asarray(b, dtype=float)
    total = 0.0 + 0.0j
    quad = np.zeros((cfg.k_users, cfg.k_users), dtype=complex)
    for sub, y in zip(systems, ys):
        hmat = np.diag(sub.channel)
        total += b @ a @ hmat.conj() @ y + b @ a @ hmat @ y.conj()
        quad += a @ hmat @ sub.r_matrix @ hmat.conj() @ a
    total -= b @ quad @ b
    assert abs(total.imag) < 1e-8
    return float(total.real)


class TestConfig:
    def test_loading_classification(self):
        assert McCdmaConfig(10, 2, 10).loading == 0.5
        assert McCdmaConfig(10, 2, 10).load_class == "underloaded"
        assert McCdmaConfig(100, 1, 100).load_class == "fully loaded"
        assert McCdmaConfig(30, 4, 5).loading == 1.5
        assert McCdmaConfig(30, 4, 5).load_class == "overloaded"

    def test_bad_dims(self):
        with pytest.raises(ValueError):
            McCdmaConfig(0, 1, 8)
        with pytest.raises(ValueError):
            McCdmaConfig(4, 1, 8, amplitudes=np.ones(3))


class TestSubcarrierSystems:
    def test_unit_diagonal_and_symmetry(self, rng):
        cfg = McCdmaConfig(6, 3, 16)
        for sub in draw_subcarrier_systems(cfg, 8.0, rng):
            np.testing.assert_allclose(np.diag(sub.r_matrix), np.ones(6), atol=1e-12)
            np.testing.assert_allclose(sub.r_matrix, sub.r_matrix.T, atol=1e-12)
            np.testing.assert_allclose(np.abs(sub.spreading), np.full((16, 6), 0.25))

    def test_noise_variance_from_snr(self, rng):
        cfg = McCdmaConfig(2, 1, 4)
        sub = draw_subcarrier_systems(cfg, 13.0, rng)[0]
        assert sub.noise_var == pytest.approx(1.0 / db_to_linear(13.0))


class TestSimulateReceived:
    def test_single_user_noiseless(self, rng):
        cfg = McCdmaConfig(1, 1, 8)
        systems = draw_subcarrier_systems(cfg, 10.0, rng)
        systems[0].noise_var = 0.0
        y = simulate_received(cfg, systems, np.array([-1.0]), rng)[0]
        assert y[0] == pytest.approx(systems[0].channel[0] * 1.0 * -1.0)

    def test_orthogonal_spreading_decouples(self, rng):
        cfg = McCdmaConfig(4, 1, 4)
        systems = draw_subcarrier_systems(cfg, 10.0, rng)
        # overwrite with orthonormal signatures: R becomes the identity
        systems[0].spreading = np.eye(4)
        systems[0].r_matrix = np.eye(4)
        systems[0].noise_var = 0.0
        bits = np.array([1.0, -1.0, 1.0, 1.0])
        y = simulate_received(cfg, systems, bits, rng)[0]
        np.testing.assert_allclose(y, systems[0].channel * bits, atol=1e-12)

    def test_matched_filter_equivalence_exact(self, rng):
        cfg = McCdmaConfig(5, 3, 16)
        systems = draw_subcarrier_systems(cfg, 6.0, rng)
        bits = 2.0 * rng.integers(0, 2, 5) - 1.0
        ys, chips = simulate_received(cfg, systems, bits, rng, return_chips=True)
        a_sub = cfg.amplitudes / math.sqrt(cfg.m_subcarriers)
        for sub, y, w in zip(systems, ys, chips):
            closed = sub.r_matrix @ (sub.channel * a_sub * bits) + sub.spreading.T @ w
            assert np.max(np.abs(y - closed)) < 1e-10

    def test_noise_covariance(self):
        # empirical Cov(n) entrywise close to sigma^2 R for the colored MF noise
        rng = np.random.default_rng(21)
        cfg = McCdmaConfig(4, 1, 8)
        systems = draw_subcarrier_systems(cfg, 3.0, rng)
        sub = systems[0]
        bits = np.ones(4)
        clean = sub.r_matrix @ (sub.channel * cfg.amplitudes * bits)
        trials = 30000
        acc = np.zeros((4, 4), dtype=complex)
        for _ in range(trials):
            y = simulate_received(cfg, systems, bits, rng)[0]
            n = y - clean
            acc += np.outer(n, n.conj())
        cov = acc / trials
        target = sub.noise_var * sub.r_matrix
        assert np.max(np.abs(cov - target)) < 0.05 * sub.noise_var


class TestBuildEffective:
    def test_identity_channel_reduces_to_r(self, rng):
        cfg = McCdmaConfig(4, 1, 8)
        systems = draw_subcarrier_systems(cfg, 10.0, rng)
        systems[0].channel = np.ones(4, dtype=complex)
        bits = np.array([1.0, 1.0, -1.0, 1.0])
        ys = simulate_received(cfg, systems, bits, rng)
        sys = build_effective_mc(cfg, systems, ys)
        np.testing.assert_allclose(np.real(sys.h_eff), systems[0].r_matrix, atol=1e-12)
        np.testing.assert_allclose(sys.y_eff, 2.0 * np.real(ys[0]), atol=1e-12)

    def test_lambda_matches_direct_form(self, rng):
        cfg = McCdmaConfig(6, 2, 8)
        systems = draw_subcarrier_systems(cfg, 7.0, rng)
        bits = 2.0 * rng.integers(0, 2, 6) - 1.0
        ys = simulate_received(cfg, systems, bits, rng)
        sys = build_effective_mc(cfg, systems, ys)
        for cand in itertools.product([-1.0, 1.0], repeat=6):
            cand = np.array(cand)
            assert likelihood(sys, cand) == pytest.approx(
                direct_lambda(cfg, systems, ys, cand), rel=1e-8, abs=1e-8
            )

    def test_received_energy_independent_of_m(self):
        # constant total transmit power: useful received energy does not grow with M
        rng = np.random.default_rng(17)
        energies = []
        for m in (1, 2, 4):
            cfg = McCdmaConfig(1, m, 32 // m)
            acc = 0.0
            trials = 4000
            for _ in range(trials):
                systems = draw_subcarrier_systems(cfg, 10.0, rng)
                a = cfg.amplitudes[0] / math.sqrt(m)
                acc += sum(abs(sub.channel[0] * a) ** 2 for sub in systems)
            energies.append(acc / trials)
        assert max(energies) / min(energies) < 1.1


class TestMrcReference:
    def test_m1_equals_flat_rayleigh(self):
        for db in (0.0, 10.0, 20.0):
            assert mrc_su_ber(1, db) == pytest.approx(siso_rayleigh_ber(db))
        assert mrc_su_ber(1, 20.0) == pytest.approx(2.5e-3, rel=0.01)

    @pytest.mark.parametrize("m", [1, 2, 4])
    def test_high_snr_slope_is_diversity_order(self, m):
        s30, s40 = mrc_su_ber(m, 30.0), mrc_su_ber(m, 40.0)
        slope = (math.log10(s30) - math.log10(s40)) / 1.0
        assert slope == pytest.approx(m, rel=0.10)

    def test_m2_matches_single_user_simulation(self):
        rng = np.random.default_rng(30)
        cfg = McCdmaConfig(1, 2, 8)
        snr_db = 10.0
        errors = 0
        trials = 30000
        for _ in range(trials):
            systems = draw_subcarrier_systems(cfg, snr_db, rng)
            bits = 2.0 * rng.integers(0, 2, 1) - 1.0
            ys = simulate_received(cfg, systems, bits, rng)
            hard = mccdma_detect(cfg, systems, ys, "mf")
            errors += int(hard[0] != bits[0])
        predicted = mrc_su_ber(2, linear_to_db(db_to_linear(snr_db) / 2.0))
        assert errors / trials == pytest.approx(predicted, rel=0.25)

    def test_rejects_zero_branches(self):
        with pytest.raises(ValueError):
            mrc_su_ber(0, 10.0)


class TestDetect:
    def test_single_user_all_methods_agree(self, rng):
        cfg = McCdmaConfig(1, 2, 8)
        for _ in range(50):
            systems = draw_subcarrier_systems(cfg, 2.0, rng)
            bits = 2.0 * rng.integers(0, 2, 1) - 1.0
            ys = simulate_received(cfg, systems, bits, rng)
            decisions = {
                method: mccdma_detect(cfg, systems, ys, method)[0]
                for method in ("mf", "zf", "mmse", "mf_las", "zf_las", "mmse_las")
            }
            assert len(set(decisions.values())) == 1

    def test_las_between_initial_and_ml(self, rng):
        cfg = McCdmaConfig(6, 1, 8)
        for _ in range(30):
            systems = draw_subcarrier_systems(cfg, 6.0, rng)
            bits = 2.0 * rng.integers(0, 2, 6) - 1.0
            ys = simulate_received(cfg, systems, bits, rng)
            sys = build_effective_mc(cfg, systems, ys)
            hard = mccdma_detect(cfg, systems, ys, "mf_las")
            lam_mf = likelihood(sys, np.where(sys.y_eff >= 0, 1.0, -1.0))
            lam_las = likelihood(sys, hard)
            lam_ml = likelihood(sys, ml_oracle(sys))
            assert lam_mf - 1e-10 <= lam_las <= lam_ml + 1e-10

    def test_overloaded_zf_raises_but_zf_las_falls_back(self, rng):
        cfg = McCdmaConfig(30, 4, 5)  # alpha = 1.5
        systems = draw_subcarrier_systems(cfg, 8.0, rng)
        bits = 2.0 * rng.integers(0, 2, 30) - 1.0
        ys = simulate_received(cfg, systems, bits, rng)
        with pytest.raises(SingularChannelError):
            mccdma_detect(cfg, systems, ys, "zf")
        with pytest.warns(UserWarning, match="MMSE start"):
            hard = mccdma_detect(cfg, systems, ys, "zf_las")
        assert hard.shape == (30,)

    def test_unknown_method(self, rng):
        cfg = McCdmaConfig(2, 1, 4)
        systems = draw_subcarrier_systems(cfg, 8.0, rng)
        ys = simulate_received(cfg, systems, np.array([1.0, 1.0]), rng)
        with pytest.raises(ValueError):
            mccdma_detect(cfg, systems, ys, "sphere")
