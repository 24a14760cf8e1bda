"""Routing-point geometry of the one-link, two-muscle arm.

Each muscle ``i`` runs through two straight segments ``(i, 1)`` and
``(i, 2)``; the routing point between them sits on a virtual link that turns
by half the joint angle. Every segment length can be written in the common
form

    f(theta) = sqrt(a**2 + b**2 + c**2 + 2*b*rho*sin(theta/2 + alpha)),
    rho = hypot(a, c),

so all downstream analysis works on the coefficients ``(a, b, c)``.

Lengths are metres and angles radians throughout. Evaluators accept scalars
or numpy arrays for ``theta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Dict, Tuple

import numpy as np

from .errors import ConfigurationError, DomainError

TWO_PI = 2.0 * math.pi
SEGMENTS: Tuple[Tuple[int, int], ...] = ((1, 1), (1, 2), (2, 1), (2, 2))

# rho == |b| is rejected up to this relative distance
DEGENERACY_RTOL = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """Routing geometry in metres.

    ``b1`` and ``b2`` are signed offsets of the base pulleys along ``L0``;
    every other length must be strictly positive. ``L1`` is carried for
    completeness but does not enter the muscle lengths.
    """

    L0: float
    L1: float
    b1: float
    b2: float
    d1: float
    d2: float
    ell1: float
    ell2: float
    r1: float
    r2: float
    s1: float
    s2: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise ConfigurationError(f.name, f"must be finite, got {value!r}")
            if f.name not in ("b1", "b2") and value <= 0.0:
                raise ConfigurationError(f.name, f"must be > 0, got {value!r}")
        if not self.L0 > self.b1:
            raise ConfigurationError("b1", "requires L0 > b1 (muscle 1 base pulley)")
        if not self.L0 > self.b2:
            raise ConfigurationError("b2", "requires L0 > b2 (muscle 2 base pulley)")

    @classmethod
    def from_mm(cls, **lengths_mm: float) -> "SystemParams":
        return cls(**{name: float(v) * 1e-3 for name, v in lengths_mm.items()})

    def to_mm(self) -> Dict[str, float]:
        return {f.name: getattr(self, f.name) * 1e3 for f in fields(self)}

    def replace(self, **changes: float) -> "SystemParams":
        return replace(self, **changes)

    def scaled(self, factor: float) -> "SystemParams":
        """Every length multiplied by ``factor`` (angles are unchanged)."""
        return SystemParams(**{f.name: getattr(self, f.name) * factor for f in fields(self)})


@dataclass(frozen=True)
class SegmentCoeffs:
    """Canonical coefficients of one muscle segment."""

    a: float
    b: float
    c: float
    alpha: float
    rho: float
    muscle_index: int
    segment_index: int

    @property
    def index(self) -> Tuple[int, int]:
        return (self.muscle_index, self.segment_index)

    @property
    def quad_a(self) -> float:
        """``b * rho``, the amplitude of the sine term (negative)."""
        return self.b * self.rho

    @property
    def quad_b(self) -> float:
        """``a**2 + b**2 + c**2``, the constant term under the root."""
        return self.a * self.a + self.b * self.b + self.c * self.c

    @classmethod
    def from_abc(cls, a: float, b: float, c: float, i: int = 1, j: int = 1) -> "SegmentCoeffs":
        """Build coefficients and validate them for segment ``(i, j)``."""
        coeffs = cls(
            a=float(a), b=float(b), c=float(c),
            alpha=compute_alpha(a, c), rho=math.hypot(a, c),
            muscle_index=i, segment_index=j,
        )
        validate_coeffs(coeffs)
        return coeffs


def compute_alpha(a: float, c: float) -> float:
    """Phase angle in ``[0, 2*pi)`` with ``sin = c/rho`` and ``cos = a/rho``."""
    if a == 0.0 and c == 0.0:
        raise DomainError("alpha is undefined for a = c = 0")
    alpha = math.atan2(c, a)
    if alpha < 0.0:
        alpha += TWO_PI
    # atan2 can return -0.0 or a tiny negative that wraps to exactly 2*pi
    return 0.0 if alpha >= TWO_PI else alpha


def validate_coeffs(coeffs: SegmentCoeffs) -> None:
    """Raise :class:`ConfigurationError` naming the first failed assumption."""
    tag = f"segment({coeffs.muscle_index},{coeffs.segment_index})"
    if not coeffs.b < 0.0:
        raise ConfigurationError(tag, f"sign condition b < 0 fails (b={coeffs.b!r})")
    if not coeffs.c > 0.0:
        raise ConfigurationError(tag, f"sign condition c > 0 fails (c={coeffs.c!r})")
    gap = abs(coeffs.rho - abs(coeffs.b))
    if gap <= DEGENERACY_RTOL * max(coeffs.rho, abs(coeffs.b)):
        raise ConfigurationError(
            tag,
            f"non-degeneracy rho != |b| fails (rho={coeffs.rho!r}, |b|={abs(coeffs.b)!r}):"
            " routing point coincides with a segment end",
        )
    if coeffs.muscle_index == 1 and not coeffs.a > 0.0:
        raise ConfigurationError(tag, f"muscle-1 sign condition a > 0 fails (a={coeffs.a!r})")
    if coeffs.muscle_index == 2 and not coeffs.a < 0.0:
        raise ConfigurationError(tag, f"muscle-2 sign condition a < 0 fails (a={coeffs.a!r})")


def derive_coeffs(params: SystemParams) -> Dict[Tuple[int, int], SegmentCoeffs]:
    """Coefficients of the four segments, validated."""
    p = params
    table = {
        (1, 1): (p.L0 - p.b1, -p.ell1, p.d1),
        (1, 2): (p.r1, -p.ell1, p.s1),
        (2, 1): (-(p.L0 - p.b2), -p.ell2, p.d2),
        (2, 2): (-p.r2, -p.ell2, p.s2),
    }
    return {(i, j): SegmentCoeffs.from_abc(a, b, c, i, j) for (i, j), (a, b, c) in table.items()}


@dataclass(frozen=True)
class MuscleModel:
    params: SystemParams
    coeffs: Dict[Tuple[int, int], SegmentCoeffs]

    @classmethod
    def from_params(cls, params: SystemParams) -> "MuscleModel":
        return cls(params=params, coeffs=derive_coeffs(params))

    def __getitem__(self, ij: Tuple[int, int]) -> SegmentCoeffs:
        return self.coeffs[ij]

    def muscle(self, i: int) -> Tuple[SegmentCoeffs, SegmentCoeffs]:
        return self.coeffs[(i, 1)], self.coeffs[(i, 2)]


def raw_segment_length(params: SystemParams, i: int, j: int, theta):
    """Segment length from the Cartesian positions of the routing points."""
    p = params
    if (i, j) == (1, 1):
        x = p.L0 - p.b1 - p.ell1 * np.sin(theta / 2)
        y = p.d1 - p.ell1 * np.cos(theta / 2)
    elif (i, j) == (1, 2):
        x = p.r1 - p.ell1 * np.sin(theta / 2)
        y = p.s1 - p.ell1 * np.cos(theta / 2)
    elif (i, j) == (2, 1):
        x = p.L0 - p.b2 + p.ell2 * np.cos(np.pi + (np.pi + theta) / 2)
        y = p.d2 + p.ell2 * np.sin(np.pi + (np.pi + theta) / 2)
    elif (i, j) == (2, 2):
        x = p.r2 + p.ell2 * np.cos((np.pi - theta) / 2)
        y = p.s2 - p.ell2 * np.sin((np.pi - theta) / 2)
    else:
        raise DomainError(f"no segment ({i}, {j})")
    return np.sqrt(x * x + y * y)


def segment_length(coeffs: SegmentCoeffs, theta):
    phase = np.sin(theta / 2 + coeffs.alpha)
    return np.sqrt(coeffs.quad_b + 2.0 * coeffs.quad_a * phase)


def segment_length_d1(coeffs: SegmentCoeffs, theta):
    """First derivative ``(b*rho/2) * cos(theta/2 + alpha) / f``."""
    f = segment_length(coeffs, theta)
    return 0.5 * coeffs.quad_a * np.cos(theta / 2 + coeffs.alpha) / f


def segment_length_d2(coeffs: SegmentCoeffs, theta):
    """Second derivative of the segment length.

    Written as ``-(A/4) f**-3 (A s**2 + B s + A)`` with ``s = sin(theta/2 +
    alpha)``, ``A = b*rho`` and ``B = a**2 + b**2 + c**2``; its sign is the
    sign of the quadratic in ``s`` because ``A < 0``.
    """
    qa, qb = coeffs.quad_a, coeffs.quad_b
    s = np.sin(theta / 2 + coeffs.alpha)
    f2 = qb + 2.0 * qa * s
    return -0.25 * qa * (qa * s * s + qb * s + qa) / (f2 * np.sqrt(f2))


def muscle_length(model: MuscleModel, i: int, theta):
    first, second = model.muscle(i)
    return segment_length(first, theta) + segment_length(second, theta)


def muscle_jacobian(model: MuscleModel, theta):
    """``(dq1/dtheta, dq2/dtheta)``."""
    return tuple(
        sum(segment_length_d1(model[(i, j)], theta) for j in (1, 2)) for i in (1, 2)
    )


def muscle_hessian(model: MuscleModel, theta):
    """``(d2q1/dtheta2, d2q2/dtheta2)``."""
    return tuple(
        sum(segment_length_d2(model[(i, j)], theta) for j in (1, 2)) for i in (1, 2)
    )


def example1_params(kappa: float, L0: float, L1: float = 0.0) -> SystemParams:
    """Symmetric reference geometry parametrised by a single length scale.

    Muscle 1 has both segment phases at pi/4, muscle 2 at 3*pi/4. ``L0`` only
    fixes where the base pulleys sit; ``L1`` defaults to ``kappa/2`` when not
    given since it does not affect the muscle lengths.
    """
    root2 = math.sqrt(2.0)
    small = kappa / (2.0 * root2)
    return SystemParams(
        L0=L0, L1=L1 or kappa / 2,
        b1=L0 - 2.0 * kappa, b2=L0 - 2.0 * root2 * kappa,
        d1=2.0 * kappa, d2=2.0 * root2 * kappa,
        ell1=kappa, ell2=kappa,
        r1=small, r2=small, s1=small, s2=small,
    )
