import numpy as np
import pytest

from fbmcber.constellations import PamConstellation, QamConstellation, SnrPoint
from fbmcber.enumeration import OffsetStream, offset_stream
from fbmcber.errors import ConstellationError, EnumerationBudgetExceeded
from fbmcber.interference import truncate


class TestConstellations:
    @pytest.mark.parametrize("order", [2, 4, 8, 16])
    def test_pam_levels(self, order):
        pam = PamConstellation(order)
        levels = pam.levels
        assert levels.size == order
        assert np.all(np.diff(levels) == 2)
        assert levels.mean() == 0.0
        assert np.mean(levels**2) == pytest.approx(pam.symbol_energy, rel=1e-15)

    def test_gray_adjacency(self):
        for order in (2, 4, 8, 16):
            codes = PamConstellation(order).gray_codes
            for a, b in zip(codes[:-1], codes[1:]):
                assert bin(int(a) ^ int(b)).count("1") == 1

    @pytest.mark.parametrize("order", [0, 1, 3, 6])
    def test_bad_pam_order(self, order):
        with pytest.raises(ConstellationError):
            PamConstellation(order)

    def test_qam(self):
        qam = QamConstellation(64)
        assert qam.pam.order == 8
        assert qam.bits_per_symbol == 6
        assert qam.symbol_energy == pytest.approx(42.0)

    @pytest.mark.parametrize("order", [8, 32, 2, 36])
    def test_bad_qam_order(self, order):
        with pytest.raises(ConstellationError):
            QamConstellation(order)

    def test_snr_point(self):
        point = SnrPoint.from_db(10.0)
        assert point.gamma_b == pytest.approx(10.0)
        # N0 = (Np^2 - 1) / (3 Nb gamma)
        assert point.noise_density(PamConstellation(8)) == pytest.approx(
            63.0 / (3 * 3 * 10.0)
        )
        with pytest.raises(ValueError):
            SnrPoint(0.0)


class TestOffsetStream:
    def test_empty_table(self, martin_table):
        stream = offset_stream(truncate(martin_table, 0), 8)
        assert len(stream) == 1
        assert list(stream) == [0.0]

    def test_single_entry_bpsk(self):
        stream = OffsetStream([0.1], 2)
        assert len(stream) == 2
        assert np.allclose(sorted(stream), [-0.1, 0.1])

    def test_count_for_top8(self, martin_top8):
        stream = offset_stream(martin_top8, 8)
        assert len(stream) == 8**8 == 16_777_216

    def test_mixed_radix_order(self):
        # Entry 0 is the most significant digit.
        stream = OffsetStream([1.0, 0.01], 4)
        levels = PamConstellation(4).levels  # [-3, -1, 1, 3]
        expected = [a + 0.01 * b for a in levels for b in levels]
        assert np.allclose(stream.range(0, 16), expected)

    def test_range_partition_consistency(self):
        stream = OffsetStream([0.3, -0.07, 0.011], 4)
        full = stream.range(0, len(stream))
        parts = np.concatenate([
            stream.range(0, 13), stream.range(13, 40), stream.range(40, 64)
        ])
        assert np.array_equal(full, parts)
        assert np.array_equal(full, np.array(list(stream)))

    def test_range_validation(self):
        stream = OffsetStream([0.1], 2)
        with pytest.raises(IndexError):
            stream.range(0, 3)

    def test_budget_guard(self, martin_top8):
        with pytest.raises(EnumerationBudgetExceeded) as info:
            offset_stream(martin_top8, 8, budget=10**6)
        assert info.value.required == 8**8

    def test_budget_guard_through_bep(self, martin_top8):
        from fbmcber import analytic as an

        with pytest.raises(EnumerationBudgetExceeded):
            an.fbmc_awgn_exact(8, martin_top8, 10.0, budget=1000)


class TestParallelDeterminism:
    def test_workers_do_not_change_results(self, martin_table):
        from fbmcber import analytic as an

        table = truncate(martin_table, 6)
        gammas = 10 ** (np.array([0.0, 6.0, 12.0]) / 10)
        serial = an.fbmc_awgn_exact(8, table, gammas, workers=1, chunk=1 << 15)
        threaded = an.fbmc_awgn_exact(8, table, gammas, workers=4, chunk=1 << 15)
        assert np.max(np.abs(serial - threaded) / serial) < 1e-10
