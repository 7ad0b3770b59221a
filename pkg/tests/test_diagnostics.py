"""Diagnostics tests: norms, splits, Grashof number, the dimension-bound
formula, tail windows, and the scaling fit."""

import math

import numpy as np
import pytest

from zonalsphere.diagnostics import (attractor_dim_bound, fit_epsilon_slope,
                                     grashof, make_scan_result, sobolev_norm,
                                     tail_statistics, tail_window,
                                     zonal_energy_split)
from zonalsphere.solver import (ForcingSpec, InitialConditionSpec,
                                SolverConfig, run)
from zonalsphere.spharm import SpectralField
from zonalsphere.verify import random_real_field


class TestSobolevNorm:
    def test_single_mode_h1(self):
        f = SpectralField.zeros(3)
        f.coeffs[1, 1 + 3] = 1.0
        assert sobolev_norm(f, 1.0) == pytest.approx(math.sqrt(2.0),
                                                     rel=1e-15)

    def test_s_zero_is_l2(self, rng):
        f = random_real_field(6, rng)
        l2 = math.sqrt(float(np.sum(np.abs(f.coeffs) ** 2)))
        assert sobolev_norm(f, 0.0) == pytest.approx(l2, rel=1e-14)

    def test_poincare(self, rng):
        for _ in range(100):
            f = random_real_field(6, rng)
            assert sobolev_norm(f, 1.0) ** 2 \
                >= 2.0 * sobolev_norm(f, 0.0) ** 2 * (1 - 1e-14)

    def test_monotonicity_with_eigenvalue_floor(self, rng):
        # |u|_{H^s} <= |u|_{H^t} * 2^{(s-t)/2} for s <= t, zero-mean u
        f = random_real_field(7, rng)
        for s, t in [(0.0, 1.0), (0.5, 2.0), (1.0, 3.0)]:
            assert sobolev_norm(f, s) <= sobolev_norm(f, t) \
                * 2.0 ** ((s - t) / 2.0) * (1 + 1e-14)

    def test_fractional_order(self):
        f = SpectralField.zeros(3)
        f.coeffs[2, 3] = 2.0
        assert sobolev_norm(f, 0.5) == pytest.approx(2.0 * 6.0 ** 0.25,
                                                     rel=1e-15)


class TestZonalSplit:
    def test_purely_zonal(self, rng):
        f = random_real_field(5, rng)
        f.coeffs[:, np.arange(11) != 5] = 0.0
        zonal, nonzonal = zonal_energy_split(f)
        assert nonzonal == 0.0
        assert zonal == pytest.approx(float(np.sum(np.abs(f.coeffs) ** 2)))

    def test_single_nonzonal_mode(self):
        f = SpectralField.zeros(4)
        f.coeffs[3, 2 + 4] = 1.0
        assert zonal_energy_split(f) == (0.0, 1.0)

    def test_sum_identity(self, rng):
        f = random_real_field(6, rng)
        zonal, nonzonal = zonal_energy_split(f)
        total = float(np.sum(np.abs(f.coeffs) ** 2))
        assert abs(zonal + nonzonal - total) / total < 1e-14


class TestGrashof:
    def test_zero_forcing(self):
        assert grashof(SpectralField.zeros(4), 1.0) == 0.0

    def test_single_mode(self):
        f = SpectralField.zeros(3)
        f.coeffs[1, 3] = 1.0
        assert grashof(f, 1.0) == pytest.approx(1.0 / math.sqrt(2.0),
                                                rel=1e-15)

    def test_viscosity_scaling(self, rng):
        f = random_real_field(5, rng)
        assert grashof(f, 0.05) == pytest.approx(4.0 * grashof(f, 0.1),
                                                 rel=1e-14)

    def test_requires_positive_viscosity(self, rng):
        with pytest.raises(ValueError):
            grashof(random_real_field(4, rng), 0.0)


class TestDimBound:
    def test_unit_grashof(self):
        assert attractor_dim_bound(1.0, 1.0) == pytest.approx(1.0)

    def test_monotone_in_G(self):
        vals = [attractor_dim_bound(g) for g in (1.0, 2.0, 5.0, 50.0, 1e4)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_value_at_e(self):
        # independent evaluation of c_S G^{2/3}(1 + ln G)^{1/3} at G = e
        expect = math.e ** (2.0 / 3.0) * 2.0 ** (1.0 / 3.0)
        assert attractor_dim_bound(math.e, 1.0) == pytest.approx(expect,
                                                                 rel=1e-14)
        assert expect == pytest.approx(2.45399, abs=5e-5)

    def test_subunit_grashof_clamped(self):
        assert attractor_dim_bound(0.01, 2.0) == attractor_dim_bound(1.0, 2.0)


class TestTailWindow:
    def test_window_after_cutoff(self):
        times = np.linspace(0.0, 200.0, 2001)
        start, end, cutoff = tail_window(times, 0.1)
        assert cutoff == 25.0
        assert start == pytest.approx(25.0 + 0.5 * 175.0)
        assert start >= cutoff
        assert end == 200.0

    def test_short_trajectory_rejected(self):
        with pytest.raises(ValueError, match="transient cutoff"):
            tail_window(np.linspace(0.0, 5.0, 100), 0.1)

    def test_statistics_on_synthetic_record(self):
        cfg = SolverConfig(K=5, mu=0.2, epsilon=1.0, dt=0.05, t_end=60.0,
                           forcing=ForcingSpec.from_real_modes({(2, 1): 0.5}),
                           ic=InitialConditionSpec(kind="zero"),
                           record_every=10)
        rec = run(cfg)
        sup, avg, (start, end, cutoff) = tail_statistics(rec, cfg.mu)
        sel = (rec.times >= start)
        assert sup == pytest.approx(float(np.max(rec.nonzonal_energy[sel])))
        assert avg == pytest.approx(
            float(cfg.mu * np.mean(rec.h1_nonzonal[sel])))


class TestEpsilonFit:
    def test_exact_linear_law(self):
        eps = [1.0, 0.1, 0.01, 0.001]
        sups = [3.0 * e for e in eps]
        slope, r2 = fit_epsilon_slope((eps, sups))
        assert slope == pytest.approx(1.0, abs=1e-12)
        assert r2 == pytest.approx(1.0, abs=1e-12)

    def test_constant_law(self):
        eps = [1.0, 0.1, 0.01]
        slope, r2 = fit_epsilon_slope((eps, [2.0, 2.0, 2.0]))
        assert slope == pytest.approx(0.0, abs=1e-14)
        assert r2 == 1.0

    def test_degenerate_scan_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            fit_epsilon_slope(([0.5, 0.5, 0.5], [1.0, 1.0, 1.0]))

    def test_too_few_values_rejected(self):
        with pytest.raises(ValueError, match="at least 3"):
            fit_epsilon_slope(([1.0, 0.1], [1.0, 0.1]))

    def test_control_runs_excluded(self):
        eps = [math.inf, 1.0, 0.1, 0.01]
        sups = [7.0, 2.0, 0.2, 0.02]
        scan = make_scan_result(eps, sups, [0.0] * 4, (0.0, 1.0, 0.0))
        assert scan.included == (False, True, True, True)
        assert scan.slope == pytest.approx(1.0, abs=1e-12)

    def test_scan_result_accepted_by_fit(self):
        eps = [1.0, 0.25, 0.0625, 0.015625]
        sups = [0.5 * e ** 1.1 for e in eps]
        scan = make_scan_result(eps, sups, [0.0] * 4, (0.0, 1.0, 0.0))
        slope, r2 = fit_epsilon_slope(scan)
        assert slope == pytest.approx(1.1, abs=1e-12)
