"""Command-line entry point: ``muscu check|simulate|potential|sweep``.

Exit codes: 0 certified / success, 1 not certified, 2 unknown, 3 invalid
configuration, 4 internal verification failure, 5 integration diverged.

Every CSV starts with a ``# config: {...}`` line holding the canonical
scenario document; feeding it back reproduces the run exactly. Read such
files with e.g. ``pandas.read_csv(path, comment="#")``.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from .config import ScenarioConfig, load_config
from .dynamics import State, internal_force, potential
from .errors import ConfigurationError, IntegrationDiverged, SoundnessFailure
from .integrate import Trajectory, simulate
from .stability import StabilityReport, Verdict, check_equilibrium
from .verify import verify_scenario

EXIT_CERTIFIED = 0
EXIT_NOT_CERTIFIED = 1
EXIT_UNKNOWN = 2
EXIT_INVALID = 3
EXIT_VERIFY_FAILED = 4
EXIT_DIVERGED = 5

VERDICT_EXIT = {
    Verdict.CERTIFIED: EXIT_CERTIFIED,
    Verdict.NOT_CERTIFIED: EXIT_NOT_CERTIFIED,
    Verdict.UNKNOWN: EXIT_UNKNOWN,
}


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(stream: TextIO, config: ScenarioConfig, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    stream.write(f"# config: {config.echo()}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])


@contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def run_check(config: ScenarioConfig) -> StabilityReport:
    model = config.model()
    return check_equilibrium(model, config.dyn(model), config.theta0)


def trajectory_rows(traj: Trajectory, stride: int = 1):
    idx = np.arange(0, len(traj), stride)
    if len(traj) and idx[-1] != len(traj) - 1:
        idx = np.append(idx, len(traj) - 1)
    for i in idx:
        yield traj.t[i], traj.theta[i], traj.omega[i], traj.energy[i], bool(traj.penalty_active[i])


def run_simulation(config: ScenarioConfig) -> Trajectory:
    if config.simulation is None:
        raise ConfigurationError("simulation", "missing; required by the simulate command")
    model = config.model()
    sim = config.simulation
    return simulate(
        State(sim.theta_init, sim.omega_init), model, config.dyn(model),
        dt=sim.dt, t_final=sim.t_final, metadata={"config": config.echo()},
    )


def potential_rows(config: ScenarioConfig, n: int) -> List[Tuple[float, float]]:
    if n < 2:
        raise ConfigurationError("--grid", f"needs at least 2 samples, got {n}")
    model = config.model()
    dyn = config.dyn(model)
    theta = np.linspace(dyn.theta_min, dyn.theta_max, n)
    values = potential(model, theta, dyn.theta_d, internal_force(model, dyn.theta_d, dyn.k))
    return list(zip(theta.tolist(), values.tolist()))


@dataclass(frozen=True)
class SweepSpec:
    name: str
    lo: float
    hi: float
    n: int

    @classmethod
    def parse(cls, name: str, text: str) -> "SweepSpec":
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigurationError("--range", f"expected LO:HI:N, got {text!r}")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigurationError("--range", f"expected LO:HI:N, got {text!r}") from None
        if n < 0:
            raise ConfigurationError("--range", "N must be >= 0")
        return cls(name, lo, hi, n)

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)


@dataclass(frozen=True)
class SweepRow:
    values: Tuple[float, ...]
    verdict: str
    certified_lo: Optional[float]
    certified_hi: Optional[float]
    detail: str = ""


def _sweep_one(base: ScenarioConfig, names: Sequence[str], values: Tuple[float, ...]) -> SweepRow:
    try:
        config = base
        for name, value in zip(names, values):
            config = config.with_override(name, value)
        report = run_check(config)
    except ConfigurationError as exc:
        return SweepRow(values, "invalid", None, None, str(exc))
    cert = report.certified
    lo, hi = (None, None) if cert is None else (cert.lo, cert.hi)
    return SweepRow(values, report.verdict.value, lo, hi, "; ".join(report.reasons))


def sweep_threads() -> int:
    cap = os.environ.get("MUSCU_THREADS")
    if cap:
        try:
            return max(1, int(cap))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def run_sweep(config: ScenarioConfig, specs: Sequence[SweepSpec]) -> List[SweepRow]:
    """Certify one scenario per swept value; rows come back in input order.

    Several specs are swept jointly (zipped), which is how paired parameters
    such as ``d1``/``d2`` move together. A gain given as measured tensions is
    solved once on the base scenario and then held fixed, since the verdict
    does not depend on the size of ``k``.
    """
    if not specs:
        raise ConfigurationError("--param", "at least one --param/--range pair is required")
    lengths = {s.n for s in specs}
    if len(lengths) != 1:
        raise ConfigurationError("--range", "jointly swept parameters need the same N")
    if config.k is None:
        config = config.with_fixed_gain(config.resolve_k())
    names = [s.name for s in specs]
    grid = list(zip(*(s.values().tolist() for s in specs)))
    if not grid:
        return []
    with ThreadPoolExecutor(max_workers=sweep_threads()) as pool:
        return list(pool.map(lambda vals: _sweep_one(config, names, vals), grid))


def sweep_header(specs: Sequence[SweepSpec]) -> List[str]:
    return ["value"] + [s.name for s in specs[1:]] + ["verdict", "certified_lo", "certified_hi", "detail"]


def sweep_csv_rows(rows: Iterable[SweepRow]):
    for r in rows:
        yield list(r.values) + [
            r.verdict,
            "" if r.certified_lo is None else r.certified_lo,
            "" if r.certified_hi is None else r.certified_hi,
            r.detail,
        ]


def cmd_check(args) -> int:
    config = load_config(args.config)
    model = config.model()
    dyn = config.dyn(model)
    report = check_equilibrium(model, dyn, config.theta0)
    print(f"# config: {config.echo()}")
    print(report.render())
    code = VERDICT_EXIT[report.verdict]
    if args.verify:
        try:
            summary = verify_scenario(model, dyn, report.theta0_used)
        except SoundnessFailure as exc:
            print(f"verification FAILED: {exc}")
            return EXIT_VERIFY_FAILED
        print(summary.render())
        if not summary.ok:
            print("verification FAILED: d2P/dtheta2 disagrees with its finite-difference oracle")
            return EXIT_VERIFY_FAILED
    return code


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    header = ("t", "theta", "omega", "energy", "penalty_active")
    try:
        traj = run_simulation(config)
        code = 0
    except IntegrationDiverged as exc:
        traj = exc.trajectory
        code = EXIT_DIVERGED
        print(f"error: {exc}", file=sys.stderr)
    with _output(args.out) as out:
        write_csv(out, config, header, trajectory_rows(traj, args.stride))
    if len(traj):
        err = abs(traj.theta[-1] - config.theta_d)
        print(
            f"final |theta - theta_d| = {err:.6g} rad at t = {traj.t[-1]:.6g} s;"
            f" penalty active: {'yes' if traj.penalty_active.any() else 'no'}",
            file=sys.stderr,
        )
    return code


def cmd_potential(args) -> int:
    config = load_config(args.config)
    rows = potential_rows(config, args.grid)
    with _output(args.out) as out:
        write_csv(out, config, ("theta", "P"), rows)
    return 0


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    if len(args.param) != len(args.range):
        raise ConfigurationError("--param", "each --param needs a matching --range")
    specs = [SweepSpec.parse(p, r) for p, r in zip(args.param, args.range)]
    rows = run_sweep(config, specs)
    with _output(args.out) as out:
        write_csv(out, config, sweep_header(specs), sweep_csv_rows(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="muscu", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="scenario JSON file or bundled scenario name")
        p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("check", help="certify the target angle")
    common(p)
    p.add_argument("--verify", action="store_true", help="also run the numerical cross-checks")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="integrate the penalised dynamics, write a trajectory CSV")
    common(p)
    p.add_argument("--stride", type=int, default=1, help="write every N-th sample (last one always)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("potential", help="write the potential landscape as CSV")
    common(p)
    p.add_argument("--grid", type=int, default=1001, help="number of samples over [theta_min, theta_max]")
    p.set_defaults(func=cmd_potential)

    p = sub.add_parser("sweep", help="certify over a range of one (or several zipped) parameters")
    common(p)
    p.add_argument("--param", action="append", default=[], help="geometry (mm) or dynamics scalar; repeatable")
    p.add_argument("--range", action="append", default=[], metavar="LO:HI:N", help="one per --param")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "stride", 1) < 1:
        print("error: --stride must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
