import math

import numpy as np
import pytest

from pdfrac.dynamics import CrackSegment, State, jump_set, sine_mode
from pdfrac.errors import ConfigurationError
from pdfrac.kernels import InfluenceSpec, PotentialSpec, calibrate
from pdfrac.lattice import DomainSpec, build_grid
from pdfrac.reference import (GammaField, WaveConfig, WaveSample, aligned_dt,
                              convergence_sweep, field_error, gamma_limit_check, wave_solve)

POT = PotentialSpec()
INF = InfluenceSpec()
MU, GC = calibrate(POT, INF)
C = math.sqrt(2 * MU)
OMEGA = C * math.pi * math.sqrt(2)


def mode_error(h, T=1.0):
    dt = aligned_dt(T, 0.5 * h / (C * math.sqrt(2)))
    traj = wave_solve(WaveConfig(1.0, MU, h, dt, T, sine_mode(1.0)), [T])
    X, Y = np.meshgrid(traj.x, traj.y, indexing="ij")
    exact = np.sin(np.pi * X) * np.sin(np.pi * Y) * math.cos(OMEGA * traj.times[-1])
    return h * math.sqrt(float(np.sum((traj.fields[-1] - exact) ** 2)))


def test_cfl_enforced():
    h = 1 / 32
    with pytest.raises(ConfigurationError, match="CFL"):
        WaveConfig(1.0, MU, h, 1.01 * h / (C * math.sqrt(2)), 1.0)


def test_zero_data_stays_zero():
    traj = wave_solve(WaveConfig(1.0, MU, 1 / 16, 0.01, 0.5))
    assert all(not U.any() for U in traj.fields)


def test_mode_second_order():
    errs = [mode_error(h) for h in (1 / 16, 1 / 32, 1 / 64)]
    rates = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert all(1.8 <= r <= 2.2 for r in rates)
    assert errs[1] / errs[2] >= 3.5


def test_field_error_definition():
    grid = build_grid(DomainSpec(1 / 8, 4.0))
    x = np.linspace(0, 1, 17)
    same = State(0.3, np.zeros(grid.count), np.zeros(grid.count))
    assert field_error(same, WaveSample(0.3, x, x, np.zeros((17, 17)), 0.01), grid) == 0.0
    shifted = WaveSample(0.3, x, x, np.full((17, 17), 0.25), 0.01)
    assert field_error(same, shifted, grid) == pytest.approx(0.25, rel=1e-12)
    with pytest.raises(ValueError, match="mismatch"):
        field_error(same, WaveSample(0.32, x, x, np.zeros((17, 17)), 0.01), grid)


def test_sweep_all_zero():
    r = convergence_sweep([1 / 4, 1 / 8, 1 / 16], 1.0, POT, INF, 0.2, n_samples=4)
    assert r.complete and r.errors == [0.0, 0.0, 0.0]
    assert r.eps == sorted(r.eps, reverse=True)


def test_sweep_requires_three_horizons():
    with pytest.raises(ConfigurationError):
        convergence_sweep([1 / 4, 1 / 8], 1.0, POT, INF, 0.2)


def test_sweep_failure_marks_incomplete():
    r = convergence_sweep([1 / 4, 1 / 8, 1 / 16], 1.0, POT, INF, 2.0, u0=sine_mode(0.1),
                          n_samples=1, dt_factor=400.0)
    assert not r.complete and r.failures
    assert "complete = False" in r.summary()


def test_sweep_smooth_data_trend():
    r = convergence_sweep([1 / 4, 1 / 8, 1 / 16], 1.0, POT, INF, 0.3, u0=sine_mode(0.1),
                          n_samples=3, threads=2)
    assert r.complete and r.errors_decreasing()
    assert max(r.max_abs_u) < 10 * r.initial_sup
    assert len(r.unstable) == 3 and all(len(u.indices) == 0 for u in r.unstable)


def test_gamma_zero_field():
    rows = gamma_limit_check(GammaField("zero"), [1 / 8, 1 / 16], POT, INF)
    assert all(r.pd == 0.0 and r.target == 0.0 for r in rows)


def test_gamma_mode_trend():
    rows = gamma_limit_check(GammaField("mode"), [1 / 8, 1 / 16, 1 / 32], POT, INF, 6.0)
    assert all(r.target == pytest.approx(MU * math.pi ** 2 / 2) for r in rows)
    errs = [abs(r.rel_error) for r in rows]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert all(r.within_upper_bound for r in rows)


def test_gamma_step_target_uses_segment_length():
    crack = CrackSegment((0.3, 0.5), (0.7, 0.5))
    rows = gamma_limit_check(GammaField("step", crack=crack), [1 / 8], POT, INF)
    assert rows[0].target == pytest.approx(GC * 0.4)


def test_step_energy_matches_line_crossing_limit():
    # a saturated jump costs f_inf * int_{H_1} J |xi . n| dxi = 4 f_inf M2 per
    # unit length, counted over the segment and the four edges of its band
    crack = CrackSegment((0.3, 0.5), (0.7, 0.5))
    w = 0.1
    length = sum(s.length for s in jump_set(crack, w))
    assert length == pytest.approx(1.2 + 4 * w)
    limit = 4 * POT.f_infinity * INF.moment(2) * length
    rows = gamma_limit_check(GammaField("step", crack=crack, band_halfwidth=w),
                             [1 / 32, 1 / 64], POT, INF, 6.0)
    errs = [abs(r.pd - limit) / limit for r in rows]
    assert errs[1] < errs[0] and errs[1] < 0.03
