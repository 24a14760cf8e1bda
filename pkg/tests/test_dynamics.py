import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PI, table1_params, valid_params
from muscu.dynamics import (
    DynParams,
    InternalForce,
    State,
    decompose_tension,
    gain_from_tensions,
    internal_force,
    make_rhs,
    ode_rhs,
    penalty_force,
    potential,
    torque,
)
from muscu.errors import ConfigurationError
from muscu.geometry import MuscleModel, muscle_jacobian, muscle_length
from muscu.verify import fd_derivative, relative_error


def test_internal_force_is_orthogonal_to_jacobian(example1_model):
    v = internal_force(example1_model, PI / 12, 500.0)
    J = muscle_jacobian(example1_model, PI / 12)
    assert abs(J[0] * v.v1 + J[1] * v.v2) < 1e-12 * np.hypot(v.v1, v.v2)


def test_example1_tensions_positive(example1_model):
    v = internal_force(example1_model, PI / 12, 500.0)
    assert v.positive
    # frozen from an independent evaluation of the Jacobian
    assert (v.v1, v.v2) == pytest.approx((10.549, 9.458), abs=5e-3)


def test_negative_tension_is_logged(example1_model, caplog):
    with caplog.at_level(logging.WARNING, logger="muscu.dynamics"):
        v = internal_force(example1_model, 1.8, 1.0)
    assert not v.positive
    assert "non-positive" in caplog.text


def test_table1_gain_back_substitution():
    model = MuscleModel.from_params(table1_params(stable=True))
    k = gain_from_tensions(model, PI / 12, 7.84, 7.05)
    v = internal_force(model, PI / 12, k)
    assert v.v1 == pytest.approx(7.84, rel=1e-12)
    assert v.v2 == pytest.approx(7.05, rel=0.02)
    assert k == pytest.approx(112.6, abs=0.1)


def test_table1_unstable_tensions_need_wider_tolerance():
    model = MuscleModel.from_params(table1_params(stable=False))
    with pytest.raises(ConfigurationError, match="inconsistent"):
        gain_from_tensions(model, PI / 12, 7.84, 7.63)
    assert gain_from_tensions(model, PI / 12, 7.84, 7.63, rtol=0.03) > 0


def test_torque_vanishes_at_target(example1_model):
    v = internal_force(example1_model, PI / 12, 500.0)
    assert abs(torque(example1_model, PI / 12, v)) < 1e-12


def test_torque_restores_towards_target(example1_model):
    v = internal_force(example1_model, PI / 12, 500.0)
    assert torque(example1_model, PI / 18, v) > 0
    assert torque(example1_model, PI / 8, v) < 0


@given(st.floats(0.1, 1e4), st.floats(-0.3, 2.0))
def test_torque_linear_in_gain(k, theta):
    model = MuscleModel.from_params(table1_params(stable=True))
    t1 = torque(model, theta, internal_force(model, PI / 12, k))
    t2 = torque(model, theta, internal_force(model, PI / 12, 2 * k))
    assert t2 == pytest.approx(2 * t1, rel=1e-12, abs=1e-15 * k)


def test_potential_zero_at_target(example1_model):
    v = internal_force(example1_model, PI / 12, 500.0)
    assert potential(example1_model, PI / 12, PI / 12, v) == 0.0


@settings(max_examples=100)
@given(valid_params(), st.floats(-0.7, 3.0), st.floats(-0.7, 3.0))
def test_potential_gradient_is_minus_torque(params, theta_d, theta):
    model = MuscleModel.from_params(params)
    v = internal_force(model, theta_d, 1.0)
    exact = float(torque(model, theta, v))
    fd = -fd_derivative(lambda t: potential(model, t, theta_d, v), theta)
    # rounding in P scales with the muscle lengths, not with tau
    scale = abs(v.v1) * muscle_length(model, 1, theta) + abs(v.v2) * muscle_length(model, 2, theta)
    assert relative_error(fd, exact, floor=1e-3 * scale) < 1e-6


def test_decompose_tension_parts(example1_model):
    F = (3.0, 5.0)
    split = decompose_tension(example1_model, 0.4, F)
    J = np.array(muscle_jacobian(example1_model, 0.4))
    assert np.dot(J, split.internal) == pytest.approx(0.0, abs=1e-12)
    assert J[0] * split.driving[1] - J[1] * split.driving[0] == pytest.approx(0.0, abs=1e-12)
    assert np.add(split.driving, split.internal) == pytest.approx(F)
    assert split.torque == pytest.approx(-float(J @ F))
    assert not split.degenerate


def test_decompose_pure_internal_force(example1_model):
    v = internal_force(example1_model, 0.3, 2.0)
    split = decompose_tension(example1_model, 0.3, (v.v1, v.v2))
    assert split.driving == pytest.approx((0.0, 0.0), abs=1e-12)
    assert split.torque == pytest.approx(0.0, abs=1e-12)


def test_decompose_degenerate_jacobian(monkeypatch, example1_model):
    import muscu.dynamics as dynamics

    monkeypatch.setattr(dynamics, "muscle_jacobian", lambda model, theta: (0.0, 0.0))
    split = dynamics.decompose_tension(example1_model, 0.0, (1.0, 2.0))
    assert split.degenerate
    assert split.driving == (0.0, 0.0)
    assert split.internal == (1.0, 2.0)
    assert split.torque == 0.0


def test_dyn_params_validation():
    ok = dict(I=1.0, mu=0.1, k=1.0, theta_d=0.2, theta_min=-0.1, theta_max=0.5)
    DynParams(**ok)
    for bad in ({"I": 0.0}, {"mu": -1.0}, {"k": float("inf")}, {"epsilon": 0.0}, {"theta_d": 0.6}):
        with pytest.raises(ConfigurationError):
            DynParams(**{**ok, **bad})


def test_equilibrium_is_a_fixed_point(example1_model, sim_dyn):
    assert ode_rhs(State(PI / 12, 0.0), example1_model, sim_dyn) == pytest.approx((0.0, 0.0), abs=1e-12)


@pytest.mark.parametrize("delta", [1e-4, 1e-3, 0.05])
def test_penalty_ramp_above(delta, sim_dyn):
    assert penalty_force(sim_dyn.theta_max + delta, sim_dyn) == pytest.approx(delta / sim_dyn.epsilon)
    assert penalty_force(sim_dyn.theta_min - delta, sim_dyn) == pytest.approx(-delta / sim_dyn.epsilon)


def test_penalty_acceleration_contribution(example1_model, sim_dyn):
    # beyond the wall the acceleration gains exactly -delta/(epsilon*I)
    delta = 0.01
    theta = sim_dyn.theta_max + delta
    with_wall = ode_rhs(State(theta, 0.0), example1_model, sim_dyn)[1]
    free = ode_rhs(State(theta, 0.0), example1_model, DynParams(**{**sim_dyn.__dict__, "epsilon": None}))[1]
    assert with_wall - free == pytest.approx(-delta / (sim_dyn.epsilon * sim_dyn.I), rel=1e-9)


def test_penalty_zero_inside_and_when_absent(sim_dyn):
    inside = np.linspace(sim_dyn.theta_min, sim_dyn.theta_max, 11)
    assert np.all(penalty_force(inside, sim_dyn) == 0.0)
    free = DynParams(**{**sim_dyn.__dict__, "epsilon": None})
    assert penalty_force(10.0, free) == 0.0


@given(st.floats(-0.3, 1.2), st.floats(-5.0, 5.0))
def test_fast_rhs_agrees_with_reference(theta, omega):
    model = MuscleModel.from_params(table1_params(stable=True))
    dyn = DynParams(I=4.2e-3, mu=0.1, k=112.6, theta_d=PI / 12,
                    theta_min=-0.1, theta_max=1.0, epsilon=1e-3)
    ref = ode_rhs(State(theta, omega), model, dyn)
    fast = make_rhs(model, dyn)(theta, omega)
    assert fast[0] == ref[0]
    assert fast[1] == pytest.approx(ref[1], rel=1e-10, abs=1e-9)


def test_internal_force_helpers():
    v = InternalForce(1.0, 2.0)
    assert v.scaled(3.0) == InternalForce(3.0, 6.0)
    assert list(v.as_array()) == [1.0, 2.0]
