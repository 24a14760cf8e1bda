import math

import numpy as np
import pytest

from conftest import PI
from muscu.errors import SoundnessFailure
from muscu.geometry import MuscleModel, SegmentCoeffs, example1_params
from muscu.stability import AngleInterval, default_theta0
from muscu.verify import (
    OracleConfig,
    cross_validate_windows,
    energy_increase,
    fd_derivative,
    interior_grid,
    relative_error,
    scan_function,
    scan_potential,
    verify_scenario,
)
import muscu.verify as verify


def test_fd_of_sine():
    assert abs(fd_derivative(math.sin, 0.0) - 1.0) < 1e-9
    assert abs(fd_derivative(math.sin, 0.3, order=2) + math.sin(0.3)) < 1e-9


def test_fd_rejects_other_orders():
    with pytest.raises(ValueError):
        fd_derivative(math.sin, 0.0, order=3)


def test_relative_error_floor():
    assert relative_error(1.1, 1.0) == pytest.approx(0.1)
    assert relative_error(1e-9, 0.0, floor=1e-3) == pytest.approx(1e-6)


def test_oracle_config_validation():
    with pytest.raises(ValueError):
        OracleConfig(h=0.0)
    with pytest.raises(ValueError):
        OracleConfig(grid_n=8)
    with pytest.raises(ValueError):
        OracleConfig(fd_rtol1=1e-14)


def test_interior_grid_drops_ends():
    g = interior_grid(0.0, 1.0, 4)
    assert len(g) == 4 and g[0] == pytest.approx(0.2) and g[-1] == pytest.approx(0.8)


def test_quadratic_scan_finds_vertex():
    scan = scan_function(lambda x: (x - 0.3123) ** 2, -1.0, 1.0, 0.3123, grid_n=101)
    assert abs(scan.argmin - 0.3123) <= scan.cell
    assert scan.argmin_near_target and scan.strict_local_min and scan.convex_at_target


def test_stable_potential_minimum_at_target(example1_model, sim_dyn):
    scan = scan_potential(example1_model, sim_dyn)
    assert scan.argmin_near_target
    assert scan.strict_local_min
    assert abs(scan.min) < 1e-9


def test_unstable_target_is_not_a_minimum(fig5_model, sim_dyn):
    scan = scan_potential(fig5_model, sim_dyn)
    assert not scan.strict_local_min
    assert not scan.argmin_near_target


def test_example1_windows_have_no_violations(example1_model):
    checks = cross_validate_windows(example1_model, default_theta0(example1_model))
    assert all(c.violations == 0 and c.samples == 4096 for c in checks.values())
    # the (2,2) endpoint pi/6 shows up as a sign change, with non-convex samples beyond it
    c22 = checks[(2, 2)]
    assert min(abs(x - PI / 6) for x in c22.sign_changes) < 1e-3
    assert c22.outside_nonconvex > 0


def test_empty_window_passes_vacuously(monkeypatch, example1_model):
    monkeypatch.setattr(
        verify, "segment_windows",
        lambda model, theta0: {(1, 1): AngleInterval(1.0, 0.5)},
    )
    checks = cross_validate_windows(example1_model, 0.1)
    assert checks[(1, 1)].samples == 0 and checks[(1, 1)].violations == 0


def test_overclaimed_window_raises(monkeypatch, example1_model):
    # claim (2,2) is convex well past its true endpoint
    monkeypatch.setattr(
        verify, "segment_windows",
        lambda model, theta0: {(2, 2): AngleInterval(0.0, 1.0)},
    )
    with pytest.raises(SoundnessFailure, match=r"\(2, 2\)"):
        cross_validate_windows(example1_model, 0.1)
    checks = cross_validate_windows(example1_model, 0.1, raise_on_violation=False)
    assert checks[(2, 2)].violations > 0 and checks[(2, 2)].min_f2 < 0


def test_unknown_window_is_reported_not_sampled():
    coeffs = SegmentCoeffs.from_abc(-1.0, -0.9 * math.sqrt(2), 1.0, 2, 1)
    base = MuscleModel.from_params(example1_params(1.0, 4.0))
    model = MuscleModel(base.params, {**base.coeffs, (2, 1): coeffs})
    checks = cross_validate_windows(model, PI / 8)
    assert checks[(2, 1)].window is None and checks[(2, 1)].samples == 0


def test_energy_increase_skips_penalised_steps():
    e = np.array([3.0, 2.0, 2.5, 1.0, 1.2])
    active = np.array([False, False, True, False, False])
    assert energy_increase(e, active) == pytest.approx(0.2)
    assert energy_increase(e[:1], active[:1]) == 0.0
    assert energy_increase(e, np.ones(5, dtype=bool)) == 0.0


def test_verify_scenario_example1(example1_model, sim_dyn):
    summary = verify_scenario(example1_model, sim_dyn, default_theta0(example1_model))
    assert summary.ok
    assert summary.Pdd_rel_err < 1e-5
    assert summary.Pdd_analytic == pytest.approx(0.1197, abs=1e-4)
    assert "violations" in summary.render()


def test_verify_scenario_fig5_Pdd_negative(fig5_model, sim_dyn):
    summary = verify_scenario(fig5_model, sim_dyn, default_theta0(fig5_model))
    assert summary.ok and summary.Pdd_analytic < 0
