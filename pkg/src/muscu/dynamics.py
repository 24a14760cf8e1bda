"""Joint torque, internal force and the penalised equation of motion.

The controller holds the muscle tensions constant at ``v(theta_d)``, the
tension pair orthogonal to the muscle-length Jacobian at the target. The
joint then obeys

    I * theta'' + mu * theta' - tau(theta) + penalty(theta) = 0,
    tau(theta) = -<J(theta), v(theta_d)>,

where ``penalty`` is the optional one-sided ramp that keeps the angle inside
``[theta_min, theta_max]``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import ConfigurationError
from .geometry import SEGMENTS, MuscleModel, muscle_jacobian, muscle_length

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DynParams:
    """Inertial, friction, control and penalty constants (SI units)."""

    I: float
    mu: float
    k: float
    theta_d: float
    theta_min: float
    theta_max: float
    epsilon: Optional[float] = None

    def __post_init__(self):
        for name in ("I", "mu", "k"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ConfigurationError(name, f"must be finite and > 0, got {value!r}")
        if self.epsilon is not None and not (math.isfinite(self.epsilon) and self.epsilon > 0.0):
            raise ConfigurationError("epsilon", f"must be > 0 or absent, got {self.epsilon!r}")
        if not self.theta_min < self.theta_d < self.theta_max:
            raise ConfigurationError(
                "theta_d",
                f"requires theta_min < theta_d < theta_max, got "
                f"{self.theta_min!r} < {self.theta_d!r} < {self.theta_max!r}",
            )


@dataclass(frozen=True)
class InternalForce:
    """Balanced tensions of muscle 1 and muscle 2, newtons."""

    v1: float
    v2: float

    @property
    def positive(self) -> bool:
        return self.v1 > 0.0 and self.v2 > 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.v1, self.v2])

    def scaled(self, factor: float) -> "InternalForce":
        return InternalForce(self.v1 * factor, self.v2 * factor)


@dataclass(frozen=True)
class State:
    theta: float
    omega: float


@dataclass(frozen=True)
class TensionSplit:
    """Decomposition of a tension pair at one joint angle.

    ``degenerate`` is set when the Jacobian vanishes: no tension produces
    torque there, so the driving part is zero and the whole input is
    reported as internal.
    """

    driving: Tuple[float, float]
    internal: Tuple[float, float]
    torque: float
    degenerate: bool = False


def internal_force(model: MuscleModel, theta_d: float, k: float) -> InternalForce:
    """Tensions ``k * (dq2/dtheta, -dq1/dtheta)`` evaluated at ``theta_d``.

    Non-positive components are logged as a warning but still returned;
    cables cannot push, so such a configuration is physically questionable.
    """
    dq1, dq2 = muscle_jacobian(model, theta_d)
    v = InternalForce(float(k * dq2), float(-k * dq1))
    if not v.positive:
        log.warning(
            "internal force at theta_d=%.6g has a non-positive tension: v=(%.6g, %.6g)",
            theta_d, v.v1, v.v2,
        )
    return v


def gain_from_tensions(
    model: MuscleModel, theta_d: float, v1: float, v2: float, rtol: float = 0.02
) -> float:
    """Solve the gain ``k`` from a measured tension pair.

    ``k`` is fixed by ``v1 = k * dq2/dtheta(theta_d)``; ``v2`` must then agree
    with ``-k * dq1/dtheta(theta_d)`` to relative tolerance ``rtol``.
    """
    dq1, dq2 = muscle_jacobian(model, theta_d)
    if dq2 == 0.0:
        raise ConfigurationError("tensions", "dq2/dtheta vanishes at theta_d; k is undetermined")
    k = float(v1 / dq2)
    if not k > 0.0:
        raise ConfigurationError("tensions", f"implied gain k={k!r} is not positive")
    predicted = -k * float(dq1)
    mismatch = abs(predicted - v2) / abs(v2)
    if mismatch > rtol:
        raise ConfigurationError(
            "tensions",
            f"v2={v2!r} N is inconsistent with v1: the model predicts {predicted:.6g} N"
            f" ({mismatch:.2%} off, tolerance {rtol:.2%})",
        )
    return k


def torque(model: MuscleModel, theta, v_d: InternalForce):
    """Joint torque ``-<dq/dtheta(theta), v_d>``."""
    dq1, dq2 = muscle_jacobian(model, theta)
    return -(dq1 * v_d.v1 + dq2 * v_d.v2)


def potential(model: MuscleModel, theta, theta_d: float, v_d: InternalForce):
    """``<q(theta) - q(theta_d), v_d>``, zero at the target; ``dP/dtheta = -tau``."""
    q1 = muscle_length(model, 1, theta) - muscle_length(model, 1, theta_d)
    q2 = muscle_length(model, 2, theta) - muscle_length(model, 2, theta_d)
    return q1 * v_d.v1 + q2 * v_d.v2


def decompose_tension(model: MuscleModel, theta: float, F: Tuple[float, float]) -> TensionSplit:
    J = np.array(muscle_jacobian(model, theta), dtype=float)
    F = np.asarray(F, dtype=float)
    tau = -float(J @ F)
    norm2 = float(J @ J)
    if norm2 == 0.0:
        return TensionSplit((0.0, 0.0), (float(F[0]), float(F[1])), tau, degenerate=True)
    driving = -tau * J / norm2
    internal = F - driving
    return TensionSplit(
        (float(driving[0]), float(driving[1])), (float(internal[0]), float(internal[1])), tau
    )


def penalty_force(theta, dyn: DynParams):
    """Restoring force of the one-sided ramps, added with a minus sign to the torque.

    Zero (exactly) inside ``[theta_min, theta_max]`` and whenever
    ``dyn.epsilon`` is absent.
    """
    if dyn.epsilon is None:
        return 0.0 * theta
    above = np.maximum(theta - dyn.theta_max, 0.0)
    below = np.maximum(dyn.theta_min - theta, 0.0)
    return (above - below) / dyn.epsilon


def ode_rhs(state: State, model: MuscleModel, dyn: DynParams) -> Tuple[float, float]:
    """Time derivative of ``(theta, omega)``."""
    v_d = internal_force(model, dyn.theta_d, dyn.k)
    tau = torque(model, state.theta, v_d)
    accel = (tau - dyn.mu * state.omega - penalty_force(state.theta, dyn)) / dyn.I
    return float(state.omega), float(accel)


def make_accel(model: MuscleModel, dyn: DynParams) -> Callable[[float, float], float]:
    """Scalar angular acceleration ``(theta, omega) -> omega'`` for tight loops.

    Same equation as :func:`ode_rhs`, but with every constant folded in and
    only ``math`` calls inside, which is several times faster per call.
    """
    v_d = internal_force(model, dyn.theta_d, dyn.k)
    weights = {1: v_d.v1, 2: v_d.v2}
    # per segment: (B, 2A, A*w/2, cos alpha, sin alpha)
    segs = tuple(
        (
            model[ij].quad_b,
            2.0 * model[ij].quad_a,
            0.5 * model[ij].quad_a * weights[ij[0]],
            math.cos(model[ij].alpha),
            math.sin(model[ij].alpha),
        )
        for ij in SEGMENTS
    )
    (b11, a11, w11, c11, s11), (b12, a12, w12, c12, s12), \
        (b21, a21, w21, c21, s21), (b22, a22, w22, c22, s22) = segs
    inv_i = 1.0 / dyn.I
    mu = dyn.mu
    sin, cos, sqrt = math.sin, math.cos, math.sqrt
    eps = dyn.epsilon
    lo, hi = dyn.theta_min, dyn.theta_max

    def accel(theta: float, omega: float) -> float:
        sh = sin(0.5 * theta)
        ch = cos(0.5 * theta)
        # sum of w * A cos(phi) / (2 f) over segments is <dq/dtheta, v_d> = -tau
        grad = (
            w11 * (ch * c11 - sh * s11) / sqrt(b11 + a11 * (sh * c11 + ch * s11))
            + w12 * (ch * c12 - sh * s12) / sqrt(b12 + a12 * (sh * c12 + ch * s12))
            + w21 * (ch * c21 - sh * s21) / sqrt(b21 + a21 * (sh * c21 + ch * s21))
            + w22 * (ch * c22 - sh * s22) / sqrt(b22 + a22 * (sh * c22 + ch * s22))
        )
        force = -grad - mu * omega
        if eps is not None:
            if theta > hi:
                force -= (theta - hi) / eps
            elif theta < lo:
                force += (lo - theta) / eps
        return force * inv_i

    return accel


def make_rhs(model: MuscleModel, dyn: DynParams) -> Callable[[float, float], Tuple[float, float]]:
    """Scalar right-hand side ``(theta, omega) -> (omega, omega')``."""
    accel = make_accel(model, dyn)
    return lambda theta, omega: (omega, accel(theta, omega))
