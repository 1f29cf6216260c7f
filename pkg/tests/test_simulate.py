import math

import numpy as np
import pytest

from fbmcber import analytic as an
from fbmcber.constellations import PamConstellation
from fbmcber.interference import FbmcGrid
from fbmcber.modem import fbmc_analyze_frame, fbmc_signal_length
from fbmcber.simulate import (
    ChannelModel,
    FbmcSystem,
    OfdmSystem,
    PamSystem,
    StopRule,
    apply_channel,
    run_ber,
    z_scores,
)

AWGN = ChannelModel("awgn")
RAYLEIGH = ChannelModel("rayleigh")


class TestApplyChannel:
    def test_awgn_zero_noise_identity(self):
        rng = np.random.default_rng(0)
        signal = np.arange(8, dtype=complex)
        received, gain = apply_channel(signal, AWGN, 0.0, rng)
        assert np.array_equal(received, signal)
        assert gain is None

    def test_forced_unit_gain_reduces_to_awgn(self):
        rng = np.random.default_rng(1)
        signal = np.arange(8, dtype=complex)
        received, gain = apply_channel(signal, RAYLEIGH, 0.0, rng, gains=1.0)
        assert np.allclose(received, signal)
        assert gain == 1.0

    def test_noise_variance_calibrated(self):
        rng = np.random.default_rng(2)
        n0 = 0.37
        received, _ = apply_channel(np.zeros(1_000_000), AWGN, n0, rng)
        measured = np.mean(np.abs(received) ** 2)
        assert measured == pytest.approx(n0, rel=0.01)
        assert np.var(received.real) == pytest.approx(n0 / 2, rel=0.01)

    def test_bad_channel_kind(self):
        with pytest.raises(ValueError):
            ChannelModel("fading")
        with pytest.raises(ValueError):
            ChannelModel("rayleigh", coherence=0)


class TestProjectionCalibration:
    def test_null_frame_statistic_variance(self, martin_grid):
        """Projection of pure time-domain noise has variance N0/2."""
        rng = np.random.default_rng(3)
        n0 = 0.8
        n_cols, frames = 24, 60
        length = fbmc_signal_length(martin_grid, n_cols)
        noise = math.sqrt(n0 / 2) * (
            rng.standard_normal((frames, length))
            + 1j * rng.standard_normal((frames, length))
        )
        stats = fbmc_analyze_frame(noise, martin_grid, n_cols).real
        assert np.var(stats) == pytest.approx(n0 / 2, rel=0.02)


class TestReproducibility:
    def test_same_seed_bit_for_bit(self):
        stop = StopRule(100, 500_000)
        a = run_ber(PamSystem(4), AWGN, [4.0, 8.0], stop, seed=42)
        b = run_ber(PamSystem(4), AWGN, [4.0, 8.0], stop, seed=42)
        assert a.points == b.points
        assert a.config == b.config

    def test_different_seed_differs(self):
        stop = StopRule(100, 500_000)
        a = run_ber(PamSystem(4), AWGN, [4.0], stop, seed=1)
        b = run_ber(PamSystem(4), AWGN, [4.0], stop, seed=2)
        assert a.points != b.points


class TestAgainstClosedForms:
    def test_bpsk_awgn_at_10db(self):
        res = run_ber(PamSystem(2), AWGN, [10.0],
                      StopRule(300, 200_000_000), seed=31)
        point = res.points[0]
        assert point.errors >= 300
        z = z_scores(res, [an.pam_awgn_exact(2, 10.0)])[0]
        assert abs(z) <= 3.0

    def test_pam4_awgn_sweep(self):
        db = np.arange(0.0, 13.0, 2.0)
        res = run_ber(PamSystem(4), AWGN, db, StopRule(400, 50_000_000), seed=32)
        zs = z_scores(res, an.pam_awgn_exact(4, an.db_to_linear(db)))
        assert np.max(np.abs(zs)) <= 3.0

    def test_pam8_rayleigh_sweep(self):
        db = np.array([0.0, 10.0, 20.0, 30.0])
        res = run_ber(PamSystem(8), RAYLEIGH, db, StopRule(500, 50_000_000), seed=33)
        zs = z_scores(res, an.pam_rayleigh_exact(8, an.db_to_linear(db)))
        assert np.max(np.abs(zs)) <= 3.0

    def test_ofdm_awgn_and_rayleigh(self):
        system = OfdmSystem(64, 16, 2)
        res = run_ber(system, AWGN, [10.0, 16.0], StopRule(400, 50_000_000), seed=34)
        zs = z_scores(res, an.ofdm_awgn(64, 16, 2, an.db_to_linear([10.0, 16.0])))
        assert np.max(np.abs(zs)) <= 3.0
        res = run_ber(system, RAYLEIGH, [15.0], StopRule(400, 50_000_000), seed=35)
        zs = z_scores(res, an.ofdm_rayleigh(64, 16, 2, an.db_to_linear(15.0)))
        assert np.max(np.abs(zs)) <= 3.0

    def test_fbmc_awgn_martin_point(self, martin_grid, martin_top8):
        res = run_ber(FbmcSystem(8, martin_grid), AWGN, [8.0],
                      StopRule(500, 50_000_000), seed=36)
        z = z_scores(res, [an.fbmc_awgn_exact(8, martin_top8, an.db_to_linear(8.0))])
        assert abs(z[0]) <= 3.0

    def test_zf_no_floor_without_interference(self):
        # Interference-free Rayleigh link: BER keeps falling at high SNR.
        res = run_ber(PamSystem(2), RAYLEIGH, [30.0, 40.0],
                      StopRule(300, 50_000_000), seed=37)
        expected = 0.5 * (1 - np.sqrt(np.array([1e3, 1e4]) / np.array([1001.0, 10001.0])))
        zs = z_scores(res, expected)
        assert np.max(np.abs(zs)) <= 3.0
        assert res.points[1].ber < res.points[0].ber / 5.0


class TestResultContainer:
    def test_ci95_matches_binomial_formula(self):
        res = run_ber(PamSystem(2), AWGN, [4.0], StopRule(200, 1_000_000), seed=38)
        p = res.points[0]
        assert p.ci95 == pytest.approx(
            1.96 * math.sqrt(p.ber * (1 - p.ber) / p.bits), rel=1e-12
        )
        assert p.errors <= p.bits

    def test_upper_bound_flag(self):
        res = run_ber(PamSystem(2), AWGN, [25.0], StopRule(300, 100_000), seed=39)
        p = res.points[0]
        assert p.errors == 0
        assert p.upper_bound_only

    def test_csv_export(self, tmp_path):
        res = run_ber(PamSystem(2), AWGN, [4.0, 6.0], StopRule(100, 500_000), seed=40)
        path = tmp_path / "sim.csv"
        res.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "ebn0_db,bits,errors,ber,ci95"
        assert len(lines) == 3
        fields = lines[1].split(",")
        assert float(fields[0]) == 4.0
        assert int(fields[1]) == res.points[0].bits

    def test_min_frames_extends_run(self):
        quick = run_ber(FbmcSystem(8, FbmcGrid(16, _martin()), frame_symbols=48),
                        RAYLEIGH, [0.0], StopRule(50, 10_000_000, min_frames=1),
                        seed=41)
        long = run_ber(FbmcSystem(8, FbmcGrid(16, _martin()), frame_symbols=48),
                       RAYLEIGH, [0.0], StopRule(50, 10_000_000, min_frames=500),
                       seed=41)
        assert long.points[0].bits > quick.points[0].bits
        assert long.points[0].bits >= 500 * 1536

    def test_z_scores_shape_guard(self):
        res = run_ber(PamSystem(2), AWGN, [4.0], StopRule(100, 500_000), seed=42)
        with pytest.raises(ValueError):
            z_scores(res, [0.1, 0.2])


def _martin():
    from fbmcber.filters import make_martin

    return make_martin(4, 16)


class TestEnergyPerBitConvention:
    def test_fbmc_noise_density_matches_constellation(self):
        system = FbmcSystem(8, FbmcGrid(16, _martin()))
        pam = PamConstellation(8)
        gamma = 7.3
        assert system.noise_density(gamma) == pytest.approx(
            pam.symbol_energy / (pam.bits_per_symbol * gamma)
        )

    def test_ofdm_noise_density_includes_cp_penalty(self):
        system = OfdmSystem(64, 16, 2)
        gamma = 5.0
        base = OfdmSystem(64, 16, 0).noise_density(gamma)
        assert system.noise_density(gamma) == pytest.approx(base * 18.0 / 16.0)
