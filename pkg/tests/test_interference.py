import math

import numpy as np
import pytest

from conftest import random_symmetric_filter
from fbmcber.filters import make_rect
from fbmcber.interference import (
    FbmcGrid,
    build_set,
    epsilon,
    export_table_csv,
    inner_product,
    ordered_magnitudes,
    pulse,
    set_size,
    sir,
    truncate,
)


class TestSetSize:
    def test_table_one_values(self):
        assert set_size(16, 65) == 119
        assert set_size(16, 64) == 119

    def test_degenerate_warns(self):
        with pytest.warns(UserWarning):
            assert set_size(2, 2) == 0

    def test_preconditions(self):
        with pytest.raises(ValueError):
            set_size(15, 65)
        with pytest.raises(ValueError):
            set_size(16, 8)

    def test_matches_enumeration(self, martin_grid, martin_table):
        assert len(martin_table) == set_size(16, martin_grid.filter.length)

    def test_rect_grid_count(self):
        grid = FbmcGrid(16, make_rect(16))
        assert len(build_set(grid)) == set_size(16, 17)


class TestEpsilon:
    def test_reference_energy(self, martin_grid):
        assert epsilon(martin_grid, 0, 0) == pytest.approx(1.0, abs=1e-12)

    def test_odd_parity_exact_zero(self, martin_grid):
        for m, n in [(1, 0), (0, 1), (2, 1), (3, 4), (5, -2)]:
            assert epsilon(martin_grid, m, n) == 0.0

    def test_support_bound(self, martin_grid):
        span = martin_grid.time_span
        for m in range(16):
            assert abs(epsilon(martin_grid, m, span + 1)) < 1e-15
            assert abs(epsilon(martin_grid, m, -(span + 1))) < 1e-15

    def test_oracle_equivalence_full_table(self, martin_grid, martin_table):
        ref = pulse(martin_grid, 0, 0)
        for m, n, eps in zip(martin_table.m, martin_table.n, martin_table.eps):
            direct = inner_product(pulse(martin_grid, int(m), int(n)), ref).real
            assert abs(direct - eps) < 1e-12

    def test_adjacent_pulse_real_projection_is_zero(self, martin_grid):
        # m + n odd: the real projection vanishes for symmetric filters.
        direct = inner_product(pulse(martin_grid, 1, 0), pulse(martin_grid, 0, 0))
        assert abs(direct.real) < 1e-12
        assert abs(epsilon(martin_grid, 1, 0)) == 0.0

    def test_pulse_energy(self, martin_grid):
        for m, n in [(0, 0), (3, 2), (15, -5)]:
            assert pulse(martin_grid, m, n).energy() == pytest.approx(1.0, abs=1e-12)

    def test_pulse_subcarrier_range(self, martin_grid):
        with pytest.raises(ValueError):
            pulse(martin_grid, 16, 0)


class TestSymmetryProperties:
    """Interference element symmetries over randomly drawn filters.

    The circular symmetry in m carries the sign (-1)^(M/2 + n); the
    plain antisymmetric form often quoted for it holds exactly on the
    subset where M/2 + n is odd (all nonzero odd-n elements when M is
    divisible by 4).
    """

    @pytest.mark.parametrize("trial", range(20))
    def test_random_filter_symmetries(self, trial):
        rng = np.random.default_rng(1000 + trial)
        m_sub = 8
        filt = random_symmetric_filter(rng, m_sub, k=3)
        grid = FbmcGrid(m_sub, filt)
        span = grid.time_span
        for n in range(-span, span + 1):
            sign = (-1) ** (m_sub // 2 + n)
            for m in range(m_sub):
                val = epsilon(grid, m, n)
                if (m + n) % 2:
                    assert val == 0.0  # odd m + n parity null
                assert val == pytest.approx(epsilon(grid, m, -n), abs=1e-12)
                if 1 <= m <= m_sub // 2:
                    mirror = epsilon(grid, m_sub - m, n)
                    assert mirror == pytest.approx(sign * val, abs=1e-12)
                    if sign == -1:
                        assert val + mirror == pytest.approx(0.0, abs=1e-12)

    def test_table_invariants_martin(self, martin_table):
        by_key = {
            (int(m), int(n)): e
            for m, n, e in zip(martin_table.m, martin_table.n, martin_table.eps)
        }
        for (m, n), e in by_key.items():
            assert by_key[(m, -n)] == pytest.approx(e, abs=1e-12)
            if 1 <= m <= 8:
                sign = (-1) ** (8 + n)
                assert by_key[(16 - m, n)] == pytest.approx(sign * e, abs=1e-12)
                if n % 2:  # printed antisymmetric form on its valid subset
                    assert by_key[(16 - m, n)] == pytest.approx(-e, abs=1e-12)
            assert (m + n) % 2 == 0
        assert (0, 0) not in by_key


class TestTruncate:
    def test_empty(self, martin_table):
        assert len(truncate(martin_table, 0)) == 0

    def test_identity_keeps_live_entries(self, martin_table):
        full = truncate(martin_table, len(martin_table))
        live = int((~martin_table.null_mask()).sum())
        assert len(full) == live
        assert np.all(np.abs(full.eps) >= 1e-15)

    def test_top8_matches_sort_oracle(self, martin_table):
        top = truncate(martin_table, 8)
        expected = np.sort(np.abs(martin_table.eps))[::-1][:8]
        assert np.allclose(np.sort(np.abs(top.eps))[::-1], expected, atol=0)

    def test_deterministic(self, martin_table):
        a = truncate(martin_table, 8)
        b = truncate(martin_table, 8)
        assert np.array_equal(a.m, b.m) and np.array_equal(a.n, b.n)

    def test_out_of_range(self, martin_table):
        with pytest.raises(ValueError):
            truncate(martin_table, len(martin_table) + 1)


class TestSir:
    def test_single_entry(self, martin_grid):
        from fbmcber.interference import InterferenceTable

        table = InterferenceTable(
            np.array([1]), np.array([1]), np.array([0.1]), 1.0, martin_grid
        )
        assert sir(table) == pytest.approx(20.0, abs=1e-12)

    def test_zero_interference(self, martin_table):
        assert sir(truncate(martin_table, 0)) == math.inf

    def test_martin_regression(self, martin_table):
        assert sir(martin_table) == pytest.approx(65.204, abs=0.01)


class TestOrderedMagnitudes:
    def test_empty(self, martin_table):
        assert ordered_magnitudes(truncate(martin_table, 0)).size == 0

    def test_non_increasing(self, martin_table):
        mags = ordered_magnitudes(martin_table)
        assert np.all(np.diff(mags) <= 0)

    def test_rapid_decay(self, martin_table):
        mags = ordered_magnitudes(martin_table)
        assert mags[7] > 5.0 * mags[19]


class TestCsvExport:
    def test_round_trip(self, tmp_path, martin_table):
        path = tmp_path / "table.csv"
        export_table_csv(martin_table, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "m,n,epsilon"
        assert len(lines) == len(martin_table) + 1
        m, n, e = lines[1].split(",")
        assert int(m) == martin_table.m[0]
        assert int(n) == martin_table.n[0]
        assert float(e) == pytest.approx(martin_table.eps[0], rel=1e-15)


class TestGridValidation:
    def test_odd_m(self, martin16):
        with pytest.raises(ValueError):
            FbmcGrid(15, martin16)

    def test_filter_length_mismatch(self, martin16):
        with pytest.raises(ValueError):
            FbmcGrid(32, martin16)
