"""Independent numerical oracles.

Nothing here calls an analytic derivative to produce the reference value it
is compared against: derivatives come from finite differences of plain
function values, minima from grid scans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .dynamics import DynParams, internal_force, potential
from .errors import SoundnessFailure
from .geometry import MuscleModel, segment_length_d2
from .stability import AngleInterval, analytic_Pdd, segment_windows, tension_window


@dataclass(frozen=True)
class OracleConfig:
    """Finite-difference steps and grid resolution.

    ``h`` is used for first derivatives; second derivatives divide by
    ``h**2`` and need the larger ``h2`` to keep rounding error down.
    """

    h: float = 1e-6
    h2: float = 1e-3
    grid_n: int = 4096
    fd_rtol1: float = 1e-6
    fd_rtol2: float = 1e-5

    def __post_init__(self):
        if not (self.h > 0 and self.h2 > 0):
            raise ValueError("finite-difference steps must be > 0")
        if self.grid_n < 16:
            raise ValueError(f"grid_n must be >= 16, got {self.grid_n}")
        if min(self.fd_rtol1, self.fd_rtol2) < 1e-12:
            raise ValueError("tolerances below 1e-12 are not meaningful in double precision")


def fd_derivative(fn: Callable[[float], float], theta: float, h: Optional[float] = None, order: int = 1) -> float:
    """Five-point central difference of ``fn`` at ``theta`` (fourth-order accurate).

    ``fn`` is evaluated on ``[theta - 2h, theta + 2h]``. When ``h`` is omitted
    the :class:`OracleConfig` default for the order is used.
    """
    if order == 1:
        h = OracleConfig.h if h is None else h
        return (-fn(theta + 2 * h) + 8 * fn(theta + h) - 8 * fn(theta - h) + fn(theta - 2 * h)) / (12 * h)
    if order == 2:
        h = OracleConfig.h2 if h is None else h
        return (
            -fn(theta + 2 * h) + 16 * fn(theta + h) - 30 * fn(theta)
            + 16 * fn(theta - h) - fn(theta - 2 * h)
        ) / (12 * h * h)
    raise ValueError(f"order must be 1 or 2, got {order}")


def relative_error(approx: float, exact: float, floor: float = 0.0) -> float:
    """``|approx - exact| / max(|exact|, floor)``; ``floor`` guards zero crossings."""
    return abs(approx - exact) / max(abs(exact), floor, np.finfo(float).tiny)


def interior_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """``n`` uniform points strictly inside ``(lo, hi)``, one cell from each end."""
    return np.linspace(lo, hi, n + 2)[1:-1]


@dataclass
class PotentialScan:
    grid: np.ndarray
    values: np.ndarray
    argmin: float
    min: float
    cell: float
    target: float
    strict_local_min: bool
    convex_at_target: bool

    @property
    def argmin_near_target(self) -> bool:
        return abs(self.argmin - self.target) <= self.cell * (1 + 1e-9)


def scan_function(fn: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, target: float, grid_n: int = 4096) -> PotentialScan:
    """Grid scan of a scalar landscape with a strict-minimum probe at ``target``."""
    if grid_n < 16:
        raise ValueError(f"grid_n must be >= 16, got {grid_n}")
    grid = interior_grid(lo, hi, grid_n)
    values = np.asarray(fn(grid), dtype=float)
    cell = (hi - lo) / (grid_n + 1)
    i = int(np.argmin(values))
    left, mid, right = (float(v) for v in fn(np.array([target - cell, target, target + cell])))
    return PotentialScan(
        grid=grid,
        values=values,
        argmin=float(grid[i]),
        min=float(values[i]),
        cell=cell,
        target=target,
        strict_local_min=left > mid and right > mid,
        convex_at_target=left - 2 * mid + right > 0,
    )


def scan_potential(model: MuscleModel, dyn: DynParams, grid_n: int = 4096) -> PotentialScan:
    v_d = internal_force(model, dyn.theta_d, dyn.k)
    return scan_function(
        lambda th: potential(model, th, dyn.theta_d, v_d),
        dyn.theta_min, dyn.theta_max, dyn.theta_d, grid_n,
    )


@dataclass
class SegmentWindowCheck:
    segment: Tuple[int, int]
    window: Optional[AngleInterval]
    samples: int
    violations: int
    min_f2: float
    # approximate roots of f'' on the whole domain; window ends should show up here
    sign_changes: List[float] = field(default_factory=list)
    # probe samples outside the window closure with f'' <= 0, and their total
    outside_nonconvex: int = 0
    outside_samples: int = 0


def _sign_changes(theta: np.ndarray, values: np.ndarray) -> List[float]:
    s = np.sign(values)
    idx = np.nonzero(s[1:] * s[:-1] < 0)[0]
    return [float(0.5 * (theta[i] + theta[i + 1])) for i in idx]


def cross_validate_windows(
    model: MuscleModel, theta0: float, grid_n: int = 4096, raise_on_violation: bool = True
) -> Dict[Tuple[int, int], SegmentWindowCheck]:
    """Sample every claimed convexity window densely and check ``f'' > 0``.

    Also probes the whole domain ``(-theta0, pi)`` and records where ``f''``
    changes sign and how much of the outside is non-convex; that part is
    informational only.

    Raises
    ------
    SoundnessFailure
        If any in-window sample has ``f'' <= 0`` (and ``raise_on_violation``).
    """
    domain = AngleInterval(-theta0, math.pi)
    out = {}
    for ij, window in segment_windows(model, theta0).items():
        coeffs = model[ij]
        probe = interior_grid(domain.lo, domain.hi, grid_n)
        probe_f2 = segment_length_d2(coeffs, probe)
        if window is None or window.empty:
            outside = np.ones(probe.shape, dtype=bool)
            check = SegmentWindowCheck(ij, window, 0, 0, float("nan"))
        else:
            inside = interior_grid(window.lo, window.hi, grid_n)
            f2 = segment_length_d2(coeffs, inside)
            bad = int(np.count_nonzero(~(f2 > 0.0)))
            check = SegmentWindowCheck(ij, window, len(inside), bad, float(f2.min()))
            outside = (probe <= window.lo) | (probe >= window.hi)
        check.sign_changes = _sign_changes(probe, probe_f2)
        check.outside_samples = int(np.count_nonzero(outside))
        check.outside_nonconvex = int(np.count_nonzero(outside & ~(probe_f2 > 0.0)))
        out[ij] = check
    if raise_on_violation:
        bad = {ij: c for ij, c in out.items() if c.violations}
        if bad:
            detail = ", ".join(f"{ij}: {c.violations} samples (min f''={c.min_f2:.3g})" for ij, c in bad.items())
            raise SoundnessFailure(f"convexity window claims violated: {detail}")
    return out


def energy_increase(energy: np.ndarray, penalty_active: np.ndarray) -> float:
    """Largest one-step energy increase between consecutive penalty-free samples."""
    if len(energy) < 2:
        return 0.0
    free = ~(penalty_active[1:] | penalty_active[:-1])
    if not free.any():
        return 0.0
    return float(np.max(np.diff(energy)[free]))


@dataclass
class VerificationSummary:
    windows: Dict[Tuple[int, int], SegmentWindowCheck]
    scan: PotentialScan
    Pdd_analytic: float
    Pdd_fd: float
    Pdd_rel_err: float
    tension_window: AngleInterval

    @property
    def ok(self) -> bool:
        return self.Pdd_rel_err < OracleConfig.fd_rtol2

    def render(self) -> str:
        lines = ["verification:"]
        for ij, c in self.windows.items():
            w = "unknown" if c.window is None else str(c.window)
            changes = ", ".join(f"{x:.6g}" for x in c.sign_changes) or "none"
            lines.append(
                f"  window {ij} {w}: {c.samples} samples, {c.violations} violations;"
                f" outside {c.outside_nonconvex}/{c.outside_samples} non-convex;"
                f" f'' sign changes at: {changes}"
            )
        lines.append(
            f"  potential scan: argmin {self.scan.argmin:.10g} (target {self.scan.target:.10g},"
            f" cell {self.scan.cell:.3g}); strict local min at target: {self.scan.strict_local_min}"
        )
        lines.append(
            f"  d2P/dtheta2: analytic {self.Pdd_analytic:.10g}, finite difference"
            f" {self.Pdd_fd:.10g}, rel. err {self.Pdd_rel_err:.3g}"
        )
        return "\n".join(lines)


def verify_scenario(
    model: MuscleModel, dyn: DynParams, theta0: float, config: OracleConfig = OracleConfig()
) -> VerificationSummary:
    windows = cross_validate_windows(model, theta0, config.grid_n)
    scan = scan_potential(model, dyn, config.grid_n)
    v_d = internal_force(model, dyn.theta_d, dyn.k)
    fd = fd_derivative(lambda th: potential(model, th, dyn.theta_d, v_d), dyn.theta_d, config.h2, order=2)
    exact = analytic_Pdd(model, dyn.theta_d, dyn.k)
    return VerificationSummary(
        windows=windows,
        scan=scan,
        Pdd_analytic=exact,
        Pdd_fd=float(fd),
        Pdd_rel_err=relative_error(float(fd), exact),
        tension_window=tension_window(model, theta0),
    )
