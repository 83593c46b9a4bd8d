"""
Scenario files: YAML -> validated Scenario, and back.

Sections: particle, initial, field, integrator, output. Unknown keys are
rejected and every violation is reported together. See docs/scenario.md
for the grammar.
"""

import argparse
import logging
import math
import sys
from dataclasses import asdict, dataclass, fields, replace
from dataclasses import field as dc_field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

_root = Path(__file__).resolve().parent.parent.parent
if str(_root) not in sys.path:
    sys.path.insert(0, str(_root))

from utils.dynamics import G_FACTOR_PRESETS, ParticleParams, ParticleState
from utils.errors import ConfigError
from utils.fields import FIELD_MODELS, FieldModel, field_model
from utils.integrator import FORMULATIONS, METHODS, UNIFORM_ONLY, StepConfig, initial_state

logger = logging.getLogger(__name__)

TIME_UNITS = ("proper-time", "cyclotron-period")
OUTPUT_FORMATS = ("csv", "csv+svg")

Vector = tuple[float, float, float]

# keys each field model accepts besides "type"
FIELD_KEYS = {
    "uniform": ("E", "B"),
    "magnetic-quadrupole": ("gradient", "B0"),
    "linear-e-gradient": ("k", "nonphysical"),
}


@dataclass(frozen=True)
class ParticleSection:
    m0: float = 1.0
    e: float = 1.0
    g: float = 2.0
    hbar: float = 1e-3
    c: float = 1.0
    s: float = 0.5
    preset: str | None = None


@dataclass(frozen=True)
class InitialSection:
    position: Vector = (0.0, 0.0, 0.0)
    beta: Vector = (0.0, 0.0, 0.0)
    zeta: Vector = (0.0, 0.0, 1.0)


@dataclass(frozen=True)
class FieldSection:
    type: str = "uniform"
    E: Vector = (0.0, 0.0, 0.0)
    B: Vector = (0.0, 0.0, 0.0)
    gradient: float = 1.0
    B0: float = 0.0
    k: float = 1.0
    nonphysical: bool = False


@dataclass(frozen=True)
class IntegratorSection:
    formulation: str = "frenkel-corben"
    method: str = "rk4-fixed"
    step: float = 2 * math.pi / 4096
    tolerance: float = 1e-10
    duration: float = 0.0
    stride: int = 1
    projection: bool = True
    fixed_point_iterations: int = 1
    time_unit: str = "proper-time"


@dataclass(frozen=True)
class OutputSection:
    path: str = "run"
    format: str = "csv"


@dataclass(frozen=True)
class Scenario:
    particle: ParticleSection = dc_field(default_factory=ParticleSection)
    initial: InitialSection = dc_field(default_factory=InitialSection)
    field: FieldSection = dc_field(default_factory=FieldSection)
    integrator: IntegratorSection = dc_field(default_factory=IntegratorSection)
    output: OutputSection = dc_field(default_factory=OutputSection)

    @property
    def name(self) -> str:
        return Path(self.output.path).name

    def params(self) -> ParticleParams:
        p = self.particle
        return ParticleParams(m0=p.m0, e=p.e, g=p.g, hbar=p.hbar, c=p.c, s=p.s)

    def field_model(self) -> FieldModel:
        f = self.field
        return field_model(f.type, **{key: getattr(f, key) for key in FIELD_KEYS[f.type] if key != "nonphysical"})

    def time_scale(self) -> float:
        """Proper-time length of one unit of integrator.step and integrator.duration."""
        if self.integrator.time_unit == "proper-time":
            return 1.0
        p = self.particle
        return 2 * math.pi * p.m0 * p.c / (abs(p.e) * self.field_model().magnetic_strength())

    def step_config(self) -> StepConfig:
        i = self.integrator
        scale = self.time_scale()
        return StepConfig(
            method=i.method,
            step=i.step * scale,
            tolerance=i.tolerance,
            projection=i.projection,
            duration=i.duration * scale,
            stride=i.stride,
            fixed_point_iterations=i.fixed_point_iterations,
        )

    def initial_state(self, formulation: str | None = None) -> ParticleState:
        formulation = formulation or self.integrator.formulation
        return initial_state(
            self.params(),
            self.initial.position,
            self.initial.beta,
            self.initial.zeta,
            formulation=formulation,
            model=self.field_model(),
        )

    def with_formulation(self, formulation: str) -> "Scenario":
        return _validated(replace(self, integrator=replace(self.integrator, formulation=formulation)))


SECTIONS = {
    "particle": ParticleSection,
    "initial": InitialSection,
    "field": FieldSection,
    "integrator": IntegratorSection,
    "output": OutputSection,
}


def _number(value: Any) -> float | None:
    """A YAML scalar as a float. Exponent forms without a dot ('1e-3') load as strings."""
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return None
    return None


def _coerce(path: str, value: Any, default: Any, violations: list) -> Any:
    """Convert a YAML value to the type of the section default."""
    if isinstance(default, bool):
        if not isinstance(value, bool):
            violations.append((path, f"expected true/false, got {value!r}"))
            return default
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            violations.append((path, f"expected an integer, got {value!r}"))
            return default
        return value
    if isinstance(default, float):
        number = _number(value)
        if number is None:
            violations.append((path, f"expected a number, got {value!r}"))
            return default
        return number
    if isinstance(default, tuple):
        numbers = [_number(x) for x in value] if isinstance(value, (list, tuple)) else []
        if len(numbers) != 3 or any(x is None for x in numbers):
            violations.append((path, f"expected a list of 3 numbers, got {value!r}"))
            return default
        return tuple(numbers)
    if not isinstance(value, str):
        violations.append((path, f"expected a string, got {value!r}"))
        return default
    return value


def _parse_section(name: str, raw: Any, violations: list):
    cls = SECTIONS[name]
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        violations.append((name, "expected a mapping"))
        return cls()
    defaults = {f.name: getattr(cls(), f.name) for f in fields(cls)}
    allowed = set(defaults)
    if name == "field":
        tag = raw.get("type", "uniform")
        allowed = {"type", *(FIELD_KEYS.get(tag, ()) if isinstance(tag, str) else ())}
    values = {}
    for key, value in raw.items():
        path = f"{name}.{key}"
        if key not in allowed:
            violations.append((path, f'key "{key}" is not allowed'))
            continue
        if key == "preset":
            values[key] = _coerce(path, value, "", violations) if value is not None else None
            continue
        values[key] = _coerce(path, value, defaults[key], violations)
    return cls(**values)


def _norm(v: Vector) -> float:
    return float(np.linalg.norm(v))


def _check(scenario: Scenario) -> list[tuple[str, str]]:
    violations = []
    p, i, f, integ, out = scenario.particle, scenario.initial, scenario.field, scenario.integrator, scenario.output
    if not p.m0 > 0:
        violations.append(("particle.m0", f"must be > 0, got {p.m0}"))
    if not p.c > 0:
        violations.append(("particle.c", f"must be > 0, got {p.c}"))
    if not p.hbar >= 0:
        violations.append(("particle.hbar", f"must be >= 0, got {p.hbar}"))
    if p.e == 0:
        violations.append(("particle.e", "charge must be non-zero"))
    if p.preset is not None and p.preset not in G_FACTOR_PRESETS:
        violations.append(("particle.preset", f'unknown preset "{p.preset}", expected one of {sorted(G_FACTOR_PRESETS)}'))
    if not _norm(i.beta) < 1:
        violations.append(("initial.beta", f"|beta| must be < 1, got {_norm(i.beta):.6g}"))
    if not 0 < _norm(i.zeta) <= 1:
        violations.append(("initial.zeta", f"|zeta| must lie in (0, 1], got {_norm(i.zeta):.6g}"))
    if f.type not in FIELD_MODELS:
        violations.append(("field.type", f'unknown field model "{f.type}", expected one of {sorted(FIELD_MODELS)}'))
    elif FIELD_MODELS[f.type].nonphysical and not f.nonphysical:
        violations.append(("field.nonphysical", f'"{f.type}" violates source-free Maxwell and must set nonphysical: true'))
    if integ.formulation not in FORMULATIONS:
        violations.append(("integrator.formulation", f'unknown formulation "{integ.formulation}", expected one of {list(FORMULATIONS)}'))
    elif f.type in FIELD_MODELS and integ.formulation in UNIFORM_ONLY and FIELD_MODELS[f.type].has_gradient:
        violations.append(("integrator.formulation", f'"{integ.formulation}" holds for uniform fields only, field is "{f.type}"'))
    if integ.formulation == "shirokov-momentum" and p.hbar == 0:
        violations.append(("particle.hbar", "shirokov-momentum needs hbar > 0"))
    if integ.method not in METHODS:
        violations.append(("integrator.method", f'unknown method "{integ.method}", expected one of {list(METHODS)}'))
    if not (math.isfinite(integ.step) and integ.step != 0):
        violations.append(("integrator.step", f"must be finite and non-zero, got {integ.step}"))
    if not integ.tolerance > 0:
        violations.append(("integrator.tolerance", f"must be > 0, got {integ.tolerance}"))
    if not integ.duration >= 0:
        violations.append(("integrator.duration", f"must be >= 0, got {integ.duration}"))
    if integ.stride < 1:
        violations.append(("integrator.stride", f"must be >= 1, got {integ.stride}"))
    if integ.fixed_point_iterations < 1:
        violations.append(("integrator.fixed_point_iterations", f"must be >= 1, got {integ.fixed_point_iterations}"))
    if integ.time_unit not in TIME_UNITS:
        violations.append(("integrator.time_unit", f'unknown time unit "{integ.time_unit}", expected one of {list(TIME_UNITS)}'))
    elif integ.time_unit == "cyclotron-period" and f.type in FIELD_MODELS and scenario.field_model().magnetic_strength() == 0:
        violations.append(("integrator.time_unit", "cyclotron-period needs a non-zero uniform magnetic field"))
    if out.format not in OUTPUT_FORMATS:
        violations.append(("output.format", f'unknown format "{out.format}", expected one of {list(OUTPUT_FORMATS)}'))
    if not out.path:
        violations.append(("output.path", "must not be empty"))
    return violations


def _validated(scenario: Scenario) -> Scenario:
    violations = _check(scenario)
    if violations:
        raise ConfigError(violations)
    return scenario


def scenario_from_dict(raw: Any) -> Scenario:
    if not isinstance(raw, dict):
        raise ConfigError([("", "scenario must be a mapping of sections")])
    violations = []
    for key in raw:
        if key not in SECTIONS:
            violations.append((str(key), f'section "{key}" is not allowed'))
    sections = {name: _parse_section(name, raw.get(name), violations) for name in SECTIONS}
    particle = sections["particle"]
    if particle.preset in G_FACTOR_PRESETS:
        if "g" in (raw.get("particle") or {}):
            violations.append(("particle.g", "g and preset are mutually exclusive"))
        sections["particle"] = replace(particle, g=G_FACTOR_PRESETS[particle.preset])
    scenario = Scenario(**sections)
    violations += [v for v in _check(scenario) if v not in violations]
    if violations:
        raise ConfigError(violations)
    return scenario


def parse_scenario(text: str) -> Scenario:
    """
    Parse and validate a scenario document.

    Raises:
        ConfigError: listing every violation with its dotted field path.
    """
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([("", f"not valid YAML: {exc}")]) from exc
    return scenario_from_dict(raw if raw is not None else {})


def scenario_to_dict(scenario: Scenario) -> dict:
    data = asdict(scenario)
    for name in ("initial", "field"):
        data[name] = {k: list(v) if isinstance(v, tuple) else v for k, v in data[name].items()}
    data["field"] = {k: v for k, v in data["field"].items() if k == "type" or k in FIELD_KEYS.get(scenario.field.type, ())}
    if scenario.particle.preset is None:
        del data["particle"]["preset"]
    else:
        del data["particle"]["g"]
    return data


def serialize_scenario(scenario: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(scenario), sort_keys=False)


def load_scenario(path: Path) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Scenario file not found: {path}")
    return parse_scenario(path.read_text(encoding="utf-8"))


def set_parameter(scenario: Scenario, dotted: str, value: Any) -> Scenario:
    """Copy of scenario with one dotted key (e.g. particle.g) replaced, revalidated."""
    section, _, key = dotted.partition(".")
    data = scenario_to_dict(scenario)
    if section not in data or not key:
        raise ConfigError([(dotted, "sweep parameter must name section.key")])
    data[section][key] = value
    return scenario_from_dict(data)


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description="Validate a scenario file")
    parser.add_argument("--scenario", type=Path, required=True)
    args = parser.parse_args(argv)
    scenario = load_scenario(args.scenario)
    logger.info("Scenario OK: %s (%s, %s field)", args.scenario, scenario.integrator.formulation, scenario.field.type)


if __name__ == "__main__":
    main()
