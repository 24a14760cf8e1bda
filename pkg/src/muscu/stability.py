"""Closed-form certification of a target angle.

A target ``theta_d`` is certified asymptotically stable when

* the tensions ``v(theta_d)`` are positive (the *tension window*), and
* every segment length is strictly convex at ``theta_d`` (one *convexity
  window* per segment),

because then the potential ``P`` has a strict minimum at ``theta_d`` and the
viscous joint dissipates energy. Convexity of a segment reduces to
``sin(theta/2 + alpha) > m`` with ``m = min(|b|/rho, rho/|b|)``, which
yields the angle intervals computed here.

The certified set is the *intersection* of all windows: the convexity
argument needs every segment convex at once. All intervals are open.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from .dynamics import DynParams, internal_force
from .errors import ConfigurationError
from .geometry import (
    SEGMENTS,
    MuscleModel,
    SegmentCoeffs,
    muscle_hessian,
    muscle_jacobian,
)

SET_RULE = (
    "certified set = tension window intersected with all four segment convexity"
    " windows (every segment must be convex at theta_d simultaneously)"
)


@dataclass(frozen=True)
class AngleInterval:
    """Open interval ``(lo, hi)`` in radians; empty when ``lo >= hi``."""

    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return not self.lo < self.hi

    @property
    def width(self) -> float:
        return max(0.0, self.hi - self.lo)

    def __contains__(self, theta: float) -> bool:
        return self.lo < theta < self.hi

    def intersect(self, other: "AngleInterval") -> "AngleInterval":
        return AngleInterval(max(self.lo, other.lo), min(self.hi, other.hi))

    def issubset(self, other: "AngleInterval") -> bool:
        return self.empty or (other.lo <= self.lo and self.hi <= other.hi)

    def __str__(self) -> str:
        if self.empty:
            return f"empty ({self.lo:.10g}, {self.hi:.10g})"
        return f"({self.lo:.10g}, {self.hi:.10g})"


@dataclass(frozen=True)
class SegmentGammas:
    """Arcsines of the two roots of the convexity quadratic.

    Only the branch whose argument is at most one is populated: ``gamma1``
    (muscle 1) / ``gamma3`` (muscle 2) when ``rho > |b|``, otherwise
    ``gamma2`` / ``gamma4``.
    """

    gamma1: Optional[float] = None
    gamma2: Optional[float] = None
    gamma3: Optional[float] = None
    gamma4: Optional[float] = None


def segment_gammas(coeffs: SegmentCoeffs) -> SegmentGammas:
    rho, nb = coeffs.rho, abs(coeffs.b)
    small = math.asin(nb / rho) if rho > nb else math.asin(rho / nb)
    if coeffs.muscle_index == 1:
        return SegmentGammas(gamma1=small) if rho > nb else SegmentGammas(gamma2=small)
    return SegmentGammas(gamma3=small) if rho > nb else SegmentGammas(gamma4=small)


def _gamma(coeffs: SegmentCoeffs) -> float:
    g = segment_gammas(coeffs)
    return next(x for x in (g.gamma1, g.gamma2, g.gamma3, g.gamma4) if x is not None)


def theta0_upper_bound(model: MuscleModel) -> float:
    """Largest admissible lower-domain margin ``theta0`` (exclusive).

    ``min(2*min(alpha21, alpha22) - pi, pi/4)``.
    """
    bound = min(2.0 * min(model[(2, 1)].alpha, model[(2, 2)].alpha) - math.pi, math.pi / 4)
    if not bound > 0.0:
        raise ConfigurationError(
            "theta0", f"no admissible theta0: muscle-2 phases too close to pi/2 (bound={bound!r})"
        )
    return bound


def default_theta0(model: MuscleModel) -> float:
    return 0.5 * theta0_upper_bound(model)


def c_theta0(coeffs: SegmentCoeffs, theta0: float) -> float:
    """``rho * sin(alpha - theta0/2)``: for muscle 2, the largest value of
    ``rho * sin(theta/2 + alpha)`` over ``(-theta0, pi)``."""
    return coeffs.rho * math.sin(coeffs.alpha - 0.5 * theta0)


def tension_window(model: MuscleModel, theta0: float) -> AngleInterval:
    """Targets for which both balanced tensions are positive for ``k > 0``."""
    return AngleInterval(-theta0, math.pi - 2.0 * max(model[(1, 1)].alpha, model[(1, 2)].alpha))


def stable_window_muscle1(coeffs: SegmentCoeffs, theta0: float) -> AngleInterval:
    if coeffs.muscle_index != 1:
        raise ValueError(f"expected a muscle-1 segment, got {coeffs.index}")
    if coeffs.rho == abs(coeffs.b):
        raise ValueError("convexity window undefined for rho == |b|")
    gamma = _gamma(coeffs)
    return AngleInterval(
        max(-theta0, 2.0 * (gamma - coeffs.alpha)),
        min(math.pi, 2.0 * (math.pi - gamma - coeffs.alpha)),
    )


def muscle2_case(coeffs: SegmentCoeffs, theta0: float) -> Optional[int]:
    """Which convexity case applies to a muscle-2 segment: 1, 2 or ``None`` (gap).

    Case 1: ``|b| < min(rho, C)``. Case 2: ``|b| > rho * max(rho/C, 1)``.
    """
    rho, nb = coeffs.rho, abs(coeffs.b)
    c = c_theta0(coeffs, theta0)
    if not c > 0.0:
        return None
    if nb < min(rho, c):
        return 1
    if nb > rho * max(rho / c, 1.0):
        return 2
    return None


def stable_window_muscle2(coeffs: SegmentCoeffs, theta0: float) -> Optional[AngleInterval]:
    """Convexity window of a muscle-2 segment, or ``None`` when neither case
    condition holds and nothing can be concluded."""
    if coeffs.muscle_index != 2:
        raise ValueError(f"expected a muscle-2 segment, got {coeffs.index}")
    case = muscle2_case(coeffs, theta0)
    if case is None:
        return None
    return AngleInterval(-theta0, 2.0 * (math.pi - _gamma(coeffs) - coeffs.alpha))


def segment_windows(model: MuscleModel, theta0: float) -> Dict[Tuple[int, int], Optional[AngleInterval]]:
    out: Dict[Tuple[int, int], Optional[AngleInterval]] = {}
    for ij in SEGMENTS:
        if ij[0] == 1:
            out[ij] = stable_window_muscle1(model[ij], theta0)
        else:
            out[ij] = stable_window_muscle2(model[ij], theta0)
    return out


def certified_interval(model: MuscleModel, theta0: float) -> Optional[AngleInterval]:
    """Certified target angles, or ``None`` if some muscle-2 window is undecided."""
    result = tension_window(model, theta0)
    for window in segment_windows(model, theta0).values():
        if window is None:
            return None
        result = result.intersect(window)
    return result


class Verdict(str, Enum):
    CERTIFIED = "certified"
    NOT_CERTIFIED = "not-certified"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class AssumptionResult:
    name: str
    passed: bool
    margin: float
    detail: str = ""


@dataclass
class StabilityReport:
    theta_d: float
    theta0_used: float
    theta0_bound: float
    assumption_results: List[AssumptionResult]
    c_theta0: Dict[Tuple[int, int], float]
    tension_window: AngleInterval
    windows: Dict[Tuple[int, int], Optional[AngleInterval]]
    certified: Optional[AngleInterval]
    verdict: Verdict
    reasons: List[str] = field(default_factory=list)
    numeric_Pdd: float = float("nan")
    tensions: Tuple[float, float] = (float("nan"), float("nan"))
    set_rule: str = SET_RULE

    @property
    def assumptions_pass(self) -> bool:
        return all(a.passed for a in self.assumption_results)

    def render(self) -> str:
        lines = [
            f"verdict: {self.verdict.value}",
            f"theta_d: {self.theta_d:.17g} rad",
            f"theta0: {self.theta0_used:.17g} rad (admissible below {self.theta0_bound:.17g})",
            "assumptions:",
        ]
        for a in self.assumption_results:
            mark = "pass" if a.passed else "FAIL"
            lines.append(f"  [{mark}] {a.name}: margin {a.margin:.6g} {a.detail}".rstrip())
        lines.append(f"tensions v(theta_d): ({self.tensions[0]:.10g}, {self.tensions[1]:.10g}) N")
        lines.append(f"tension window: {self.tension_window}")
        for ij, w in self.windows.items():
            label = "unknown (neither convexity case applies)" if w is None else str(w)
            extra = f"  C_theta0={self.c_theta0[ij]:.10g} m" if ij in self.c_theta0 else ""
            lines.append(f"convexity window {ij}: {label}{extra}")
        lines.append(f"certified: {'unknown' if self.certified is None else self.certified}")
        lines.append(f"d2P/dtheta2 at theta_d: {self.numeric_Pdd:.10g} J/rad^2")
        lines.append(f"rule: {self.set_rule}")
        for r in self.reasons:
            lines.append(f"reason: {r}")
        return "\n".join(lines)


def _assumptions(model: MuscleModel, theta0: float, bound: float) -> List[AssumptionResult]:
    results = []
    for ij in SEGMENTS:
        c = model[ij]
        margin = min(-c.b, c.c)
        results.append(AssumptionResult(f"sign b<0, c>0 {ij}", margin > 0.0, margin))
    for ij in SEGMENTS:
        c = model[ij]
        margin = abs(c.rho - abs(c.b))
        results.append(AssumptionResult(f"rho != |b| {ij}", margin > 0.0, margin))
    for ij in SEGMENTS:
        c = model[ij]
        margin = c.a if ij[0] == 1 else -c.a
        results.append(
            AssumptionResult(f"{'a>0' if ij[0] == 1 else 'a<0'} {ij}", margin > 0.0, margin)
        )
    margin = min(theta0, bound - theta0)
    results.append(
        AssumptionResult(
            "0 < theta0 < bound", margin > 0.0, margin, f"(theta0={theta0:.6g}, bound={bound:.6g})"
        )
    )
    return results


def analytic_Pdd(model: MuscleModel, theta_d: float, k: float) -> float:
    """``k * (q1''(theta_d) q2'(theta_d) - q2''(theta_d) q1'(theta_d))``."""
    dq1, dq2 = muscle_jacobian(model, theta_d)
    ddq1, ddq2 = muscle_hessian(model, theta_d)
    return float(k * (ddq1 * dq2 - ddq2 * dq1))


def check_equilibrium(
    model: MuscleModel, dyn: DynParams, theta0: Optional[float] = None
) -> StabilityReport:
    """Full certification report for ``dyn.theta_d``.

    ``theta0`` defaults to half its admissible bound. A pinned ``theta0``
    outside ``(0, bound)`` is reported as a failed assumption, not raised.
    """
    bound = theta0_upper_bound(model)
    theta0 = default_theta0(model) if theta0 is None else float(theta0)
    assumptions = _assumptions(model, theta0, bound)
    tw = tension_window(model, theta0)
    windows = segment_windows(model, theta0)
    cert = certified_interval(model, theta0)
    v = internal_force(model, dyn.theta_d, dyn.k)
    theta_d = dyn.theta_d

    reasons = []
    for a in assumptions:
        if not a.passed:
            reasons.append(f"assumption failed: {a.name}")
    if theta_d not in tw:
        reasons.append(f"theta_d outside tension window {tw}")
    for ij, w in windows.items():
        if w is None:
            reasons.append(f"segment {ij}: no convexity conclusion (case gap)")
        elif theta_d not in w:
            reasons.append(f"theta_d outside convexity window of segment {ij} {w}")

    if any(not a.passed for a in assumptions):
        verdict = Verdict.NOT_CERTIFIED
    elif cert is None:
        # a decided window may already exclude theta_d
        decided_out = theta_d not in tw or any(w is not None and theta_d not in w for w in windows.values())
        verdict = Verdict.NOT_CERTIFIED if decided_out else Verdict.UNKNOWN
    elif theta_d in cert:
        verdict = Verdict.CERTIFIED
    else:
        verdict = Verdict.NOT_CERTIFIED

    return StabilityReport(
        theta_d=theta_d,
        theta0_used=theta0,
        theta0_bound=bound,
        assumption_results=assumptions,
        c_theta0={ij: c_theta0(model[ij], theta0) for ij in SEGMENTS if ij[0] == 2},
        tension_window=tw,
        windows=windows,
        certified=cert,
        verdict=verdict,
        reasons=reasons,
        numeric_Pdd=analytic_Pdd(model, theta_d, dyn.k),
        tensions=(v.v1, v.v2),
    )
