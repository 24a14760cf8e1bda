"""Scenario documents: JSON in, validated model and dynamics out.

A scenario looks like::

    {
      "schema_version": 1,
      "name": "fig4_stable",
      "geometry": {"unit": "mm", "L0": 70, "L1": 15, "b1": 10, ...},
      "dynamics": {"I": 4.2e-3, "mu": 0.1, "k": 500,
                   "theta_d": "pi/12 rad", "epsilon": 1e-3,
                   "theta_min": "-pi/180 rad", "theta_max": "41pi/180 rad"},
      "simulation": {"theta_init": "pi/18 rad", "omega_init": 0,
                     "dt": 1e-4, "t_final": 10},
      "stability": {"theta0": null}
    }

Angles always carry a unit, ``rad`` or ``deg``. Radian values may be written
as rational multiples of pi (``"-5pi/18 rad"``) so that published values
are not rounded in decimal. Instead of ``k`` the dynamics block may give
measured ``tensions`` ``[v1, v2]`` in newtons; ``k`` is then solved from
``v1`` and ``v2`` is checked against the model to ``tension_rtol``
(default 2%).
"""

from __future__ import annotations

import copy
import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from .dynamics import DynParams, gain_from_tensions
from .errors import ConfigurationError
from .geometry import MuscleModel, SystemParams

SCHEMA_VERSION = 1
GEOMETRY_FIELDS = ("L0", "L1", "b1", "b2", "d1", "d2", "ell1", "ell2", "r1", "r2", "s1", "s2")
BUNDLED = ("example1_stable", "fig4_stable", "fig5_unstable", "table1_stable", "table1_unstable")

# dynamics scalars a sweep may override, with the unit written back into the document
DYNAMICS_SCALARS = {"I": None, "mu": None, "k": None, "epsilon": None,
                    "theta_d": "rad", "theta_min": "rad", "theta_max": "rad"}

_PI_EXPR = re.compile(
    r"^(?P<sign>[+-]?)\s*(?P<num>\d+(?:\.\d*)?)?\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?$"
)
_ANGLE = re.compile(r"^\s*(?P<expr>.+?)\s*(?P<unit>rad|deg)\s*$")


def parse_angle(value: Any, field: str) -> float:
    """Parse a unit-tagged angle such as ``"pi/12 rad"`` or ``"15 deg"`` to radians."""
    if not isinstance(value, str):
        raise ConfigurationError(field, f"angle must be a unit-tagged string like 'pi/12 rad', got {value!r}")
    m = _ANGLE.match(value)
    if not m:
        raise ConfigurationError(field, f"angle {value!r} lacks a 'rad' or 'deg' unit tag")
    expr, unit = m.group("expr").strip(), m.group("unit")
    pi_match = _PI_EXPR.match(expr)
    if pi_match:
        if unit != "rad":
            raise ConfigurationError(field, f"multiples of pi must be tagged 'rad', got {value!r}")
        coeff = Fraction(pi_match.group("num") or "1")
        if pi_match.group("den"):
            den = Fraction(pi_match.group("den"))
            if den == 0:
                raise ConfigurationError(field, f"zero denominator in {value!r}")
            coeff /= den
        if pi_match.group("sign") == "-":
            coeff = -coeff
        if coeff.denominator == 1:
            return coeff.numerator * math.pi
        return coeff.numerator * math.pi / coeff.denominator
    try:
        number = float(expr)
    except ValueError:
        raise ConfigurationError(field, f"cannot parse angle {value!r}") from None
    if not math.isfinite(number):
        raise ConfigurationError(field, f"angle must be finite, got {value!r}")
    return math.radians(number) if unit == "deg" else number


def _number(block: Dict[str, Any], key: str, path: str, default: Any = ...) -> Optional[float]:
    if key not in block:
        if default is ...:
            raise ConfigurationError(f"{path}.{key}", "missing")
        return default
    value = block[key]
    if value is None and default is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{path}.{key}", f"must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigurationError(f"{path}.{key}", f"must be finite, got {value!r}")
    return value


def _block(doc: Dict[str, Any], key: str, allowed: Tuple[str, ...], required: bool = True) -> Optional[Dict[str, Any]]:
    if key not in doc or doc[key] is None:
        if required:
            raise ConfigurationError(key, "missing")
        return None
    block = doc[key]
    if not isinstance(block, dict):
        raise ConfigurationError(key, "must be an object")
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ConfigurationError(f"{key}.{unknown[0]}", "unknown field")
    return block


@dataclass(frozen=True)
class SimulationSpec:
    theta_init: float
    omega_init: float
    dt: float
    t_final: float


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    params: SystemParams
    I: float
    mu: float
    k: Optional[float]
    tensions: Optional[Tuple[float, float]]
    tension_rtol: float
    theta_d: float
    theta_min: float
    theta_max: float
    epsilon: Optional[float]
    simulation: Optional[SimulationSpec]
    theta0: Optional[float]
    raw: Dict[str, Any]

    def model(self) -> MuscleModel:
        return MuscleModel.from_params(self.params)

    def resolve_k(self, model: Optional[MuscleModel] = None) -> float:
        if self.k is not None:
            return self.k
        model = model or self.model()
        return gain_from_tensions(model, self.theta_d, *self.tensions, rtol=self.tension_rtol)

    def dyn(self, model: Optional[MuscleModel] = None) -> DynParams:
        return DynParams(
            I=self.I, mu=self.mu, k=self.resolve_k(model), theta_d=self.theta_d,
            theta_min=self.theta_min, theta_max=self.theta_max, epsilon=self.epsilon,
        )

    def echo(self) -> str:
        """Canonical JSON of the source document; parsing it reproduces this config."""
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))

    def with_override(self, name: str, value: float) -> "ScenarioConfig":
        """Copy with one geometry (mm) or dynamics scalar replaced."""
        doc = copy.deepcopy(self.raw)
        if name in GEOMETRY_FIELDS:
            doc["geometry"][name] = float(value)
        elif name in DYNAMICS_SCALARS:
            unit = DYNAMICS_SCALARS[name]
            doc["dynamics"][name] = f"{float(value)!r} {unit}" if unit else float(value)
            if name == "k":
                doc["dynamics"].pop("tensions", None)
                doc["dynamics"].pop("tension_rtol", None)
        elif name == "theta0":
            doc.setdefault("stability", {})["theta0"] = f"{float(value)!r} rad"
        else:
            raise ConfigurationError(name, "not a sweepable geometry or dynamics scalar")
        return parse_config(doc)

    def with_fixed_gain(self, k: float) -> "ScenarioConfig":
        return self.with_override("k", k)


def parse_config(doc: Dict[str, Any]) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigurationError("config", "top level must be a JSON object")
    unknown = sorted(set(doc) - {"schema_version", "name", "comment", "geometry", "dynamics", "simulation", "stability"})
    if unknown:
        raise ConfigurationError(unknown[0], "unknown top-level field")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigurationError("schema_version", f"expected {SCHEMA_VERSION}, got {doc.get('schema_version')!r}")

    geo = _block(doc, "geometry", ("unit",) + GEOMETRY_FIELDS)
    if geo.get("unit") != "mm":
        raise ConfigurationError("geometry.unit", f"must be 'mm', got {geo.get('unit')!r}")
    params = SystemParams.from_mm(**{f: _number(geo, f, "geometry") for f in GEOMETRY_FIELDS})

    dyn = _block(doc, "dynamics", ("I", "mu", "k", "tensions", "tension_rtol", "theta_d",
                                   "epsilon", "theta_min", "theta_max"))
    has_k = dyn.get("k") is not None
    has_t = dyn.get("tensions") is not None
    if has_k == has_t:
        raise ConfigurationError("dynamics.k", "give exactly one of 'k' or 'tensions'")
    tensions = None
    if has_t:
        t = dyn["tensions"]
        if (not isinstance(t, list) or len(t) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in t)):
            raise ConfigurationError("dynamics.tensions", f"must be [v1, v2] in newtons, got {t!r}")
        tensions = (float(t[0]), float(t[1]))
        if not (tensions[0] > 0 and tensions[1] > 0):
            raise ConfigurationError("dynamics.tensions", "tensions must be positive")

    sim = _block(doc, "simulation", ("theta_init", "omega_init", "dt", "t_final"), required=False)
    simulation = None
    if sim is not None:
        if "theta_init" not in sim:
            raise ConfigurationError("simulation.theta_init", "missing")
        simulation = SimulationSpec(
            theta_init=parse_angle(sim["theta_init"], "simulation.theta_init"),
            omega_init=_number(sim, "omega_init", "simulation", 0.0),
            dt=_number(sim, "dt", "simulation", 1e-4),
            t_final=_number(sim, "t_final", "simulation"),
        )
        if not simulation.dt > 0:
            raise ConfigurationError("simulation.dt", "must be > 0")
        if simulation.t_final < 0:
            raise ConfigurationError("simulation.t_final", "must be >= 0")

    stab = _block(doc, "stability", ("theta0",), required=False) or {}
    theta0 = None if stab.get("theta0") is None else parse_angle(stab["theta0"], "stability.theta0")

    for key in ("theta_d", "theta_min", "theta_max"):
        if key not in dyn:
            raise ConfigurationError(f"dynamics.{key}", "missing")
    config = ScenarioConfig(
        name=str(doc.get("name", "")),
        params=params,
        I=_number(dyn, "I", "dynamics"),
        mu=_number(dyn, "mu", "dynamics"),
        k=_number(dyn, "k", "dynamics") if has_k else None,
        tensions=tensions,
        tension_rtol=_number(dyn, "tension_rtol", "dynamics", 0.02),
        theta_d=parse_angle(dyn["theta_d"], "dynamics.theta_d"),
        theta_min=parse_angle(dyn["theta_min"], "dynamics.theta_min"),
        theta_max=parse_angle(dyn["theta_max"], "dynamics.theta_max"),
        epsilon=_number(dyn, "epsilon", "dynamics", None),
        simulation=simulation,
        theta0=theta0,
        raw=copy.deepcopy(doc),
    )
    # DynParams checks (I, mu > 0, ordering of angles) without needing k yet
    DynParams(I=config.I, mu=config.mu, k=config.k or 1.0, theta_d=config.theta_d,
              theta_min=config.theta_min, theta_max=config.theta_max, epsilon=config.epsilon)
    return config


def bundled_path(name: str):
    return resources.files("muscu").joinpath("examples").joinpath(f"{name}.json")


def load_config(ref: Union[str, Path]) -> ScenarioConfig:
    """Load a scenario from a file path, or by bundled name (``"fig4_stable"``)."""
    path = Path(ref)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
    else:
        stem = path.name[:-5] if path.name.endswith(".json") else path.name
        if stem not in BUNDLED:
            raise ConfigurationError("config", f"no such file or bundled scenario: {ref}")
        text = bundled_path(stem).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError("config", f"invalid JSON: {exc}") from None
    return parse_config(doc)
