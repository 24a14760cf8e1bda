"""Fixed-step RK4 integration of the joint dynamics.

The penalty ramp is evaluated inside every stage, so the integrator sees a
plain (piecewise smooth) ODE. When the penalty engages the step must satisfy
``dt << sqrt(I * epsilon)``; the default ``dt = 1e-4`` s is fine for the
desk-scale parameter sets this package ships with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from .dynamics import DynParams, State, internal_force, make_accel, make_rhs, potential
from .errors import IntegrationDiverged
from .geometry import MuscleModel

DEFAULT_DT = 1e-4

Rhs = Callable[[float, float], Tuple[float, float]]


@dataclass
class Trajectory:
    """Every integration step, sampled at ``t = n * dt``.

    ``energy`` is ``I*omega**2/2 + P(theta)``; ``penalty_active`` marks
    samples outside ``[theta_min, theta_max]`` while a penalty is configured.
    """

    t: np.ndarray
    theta: np.ndarray
    omega: np.ndarray
    energy: np.ndarray
    penalty_active: np.ndarray
    dt: float
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def final(self) -> State:
        return State(float(self.theta[-1]), float(self.omega[-1]))


def sample_count(dt: float, t_final: float) -> int:
    """``floor(t_final/dt) + 1``, robust to ``t_final/dt`` landing a hair below an integer."""
    ratio = t_final / dt
    n = math.floor(ratio)
    if ratio - n > 1.0 - 1e-9:
        n += 1
    return n + 1


def rk4_step(rhs: Rhs, theta: float, omega: float, dt: float) -> Tuple[float, float]:
    k1t, k1w = rhs(theta, omega)
    h = 0.5 * dt
    k2t, k2w = rhs(theta + h * k1t, omega + h * k1w)
    k3t, k3w = rhs(theta + h * k2t, omega + h * k2w)
    k4t, k4w = rhs(theta + dt * k3t, omega + dt * k3w)
    sixth = dt / 6.0
    return (
        theta + sixth * (k1t + 2.0 * (k2t + k3t) + k4t),
        omega + sixth * (k1w + 2.0 * (k2w + k3w) + k4w),
    )


def step(state: State, model: MuscleModel, dyn: DynParams, dt: float) -> State:
    if not dt > 0.0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    try:
        theta, omega = rk4_step(make_rhs(model, dyn), state.theta, state.omega, dt)
    except (OverflowError, ValueError, ZeroDivisionError):
        theta = omega = math.inf
    if not (math.isfinite(theta) and math.isfinite(omega)):
        raise IntegrationDiverged(f"non-finite state after one step from {state}")
    return State(theta, omega)


def energy(model: MuscleModel, dyn: DynParams, theta, omega):
    """Mechanical energy ``I*omega**2/2 + P(theta)`` (penalty work excluded)."""
    v_d = internal_force(model, dyn.theta_d, dyn.k)
    return 0.5 * dyn.I * np.square(omega) + potential(model, theta, dyn.theta_d, v_d)


def _penalty_mask(theta: np.ndarray, dyn: DynParams) -> np.ndarray:
    if dyn.epsilon is None:
        return np.zeros(theta.shape, dtype=bool)
    return (theta > dyn.theta_max) | (theta < dyn.theta_min)


def _assemble(model, dyn, dt, thetas, omegas, metadata) -> Trajectory:
    theta = np.asarray(thetas, dtype=float)
    omega = np.asarray(omegas, dtype=float)
    # a partial trajectory from a blow-up may hold huge but finite values
    with np.errstate(over="ignore", invalid="ignore"):
        total = energy(model, dyn, theta, omega)
    return Trajectory(
        t=np.arange(len(theta)) * dt,
        theta=theta,
        omega=omega,
        energy=total,
        penalty_active=_penalty_mask(theta, dyn),
        dt=dt,
        metadata=dict(metadata or {}),
    )


def simulate(
    init: State,
    model: MuscleModel,
    dyn: DynParams,
    dt: float = DEFAULT_DT,
    t_final: float = 10.0,
    metadata: Optional[Dict[str, Any]] = None,
) -> Trajectory:
    """Integrate from ``init`` to ``t_final`` and record every step.

    Raises
    ------
    IntegrationDiverged
        If the state stops being finite. The exception carries the
        trajectory up to the last finite sample.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    if t_final < 0.0:
        raise ValueError(f"t_final must be >= 0, got {t_final!r}")
    n = sample_count(dt, t_final)
    accel = make_accel(model, dyn)

    thetas = [0.0] * n
    omegas = [0.0] * n
    theta, omega = float(init.theta), float(init.omega)
    thetas[0], omegas[0] = theta, omega
    isfinite = math.isfinite
    h = 0.5 * dt
    sixth = dt / 6.0
    idx = 1
    # rk4_step inlined (dtheta/dt = omega folded in): this loop is the hot path
    try:
        for idx in range(1, n):
            k1w = accel(theta, omega)
            k2t = omega + h * k1w
            k2w = accel(theta + h * omega, k2t)
            k3t = omega + h * k2w
            k3w = accel(theta + h * k2t, k3t)
            k4t = omega + dt * k3w
            k4w = accel(theta + dt * k3t, k4t)
            theta = theta + sixth * (omega + 2.0 * (k2t + k3t) + k4t)
            omega = omega + sixth * (k1w + 2.0 * (k2w + k3w) + k4w)
            if not (isfinite(theta) and isfinite(omega)):
                raise OverflowError
            thetas[idx] = theta
            omegas[idx] = omega
    except (OverflowError, ValueError, ZeroDivisionError):
        # math.sin(inf) raises ValueError, so a blow-up can surface either way
        partial = _assemble(model, dyn, dt, thetas[:idx], omegas[:idx], metadata)
        raise IntegrationDiverged(
            f"state became non-finite at t={idx * dt:.6g} s", trajectory=partial
        ) from None
    return _assemble(model, dyn, dt, thetas, omegas, metadata)
