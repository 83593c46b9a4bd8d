import math
from pathlib import Path

import pytest

from pipelines.scenario.job import (
    Scenario,
    load_scenario,
    parse_scenario,
    scenario_from_dict,
    serialize_scenario,
    set_parameter,
)
from utils.dynamics import G_FACTOR_PRESETS
from utils.errors import ConfigError
from utils.fields import MagneticQuadrupole, UniformField

SHIPPED = ["anomalous-precession", "cyclotron", "free-particle", "quadrupole-stern-gerlach", "thomas-pure-e"]

MINIMAL = """
field:
  type: uniform
  B: [0, 0, 1]
"""


def violation_paths(excinfo) -> list[str]:
    return [path for path, _ in excinfo.value.violations]


def test_minimal_scenario_gets_defaults():
    scenario = parse_scenario(MINIMAL)
    assert scenario.particle.m0 == 1.0
    assert scenario.particle.g == 2.0
    assert scenario.initial.zeta == (0.0, 0.0, 1.0)
    assert scenario.integrator.formulation == "frenkel-corben"
    assert scenario.integrator.method == "rk4-fixed"
    assert scenario.integrator.projection is True
    assert scenario.output.format == "csv"
    assert scenario.field_model() == UniformField(E=(0.0, 0.0, 0.0), B=(0.0, 0.0, 1.0))


def test_empty_document_is_the_default_scenario():
    assert parse_scenario("") == Scenario()


def test_superluminal_beta_is_rejected():
    with pytest.raises(ConfigError) as excinfo:
        parse_scenario(MINIMAL + "initial:\n  beta: [1.2, 0, 0]\n")
    assert violation_paths(excinfo) == ["initial.beta"]


def test_zeta_must_be_a_unit_or_shorter_vector():
    with pytest.raises(ConfigError) as excinfo:
        parse_scenario(MINIMAL + "initial:\n  zeta: [0, 0, 0]\n")
    assert violation_paths(excinfo) == ["initial.zeta"]


def test_gradient_field_with_uniform_only_formulation():
    text = "field:\n  type: magnetic-quadrupole\n  gradient: 1.0\nintegrator:\n  formulation: bmt-zeta\n"
    with pytest.raises(ConfigError) as excinfo:
        parse_scenario(text)
    assert violation_paths(excinfo) == ["integrator.formulation"]


def test_unknown_keys_and_sections_are_rejected():
    with pytest.raises(ConfigError) as excinfo:
        parse_scenario(MINIMAL + "particle:\n  mass: 2.0\nplot:\n  dpi: 300\n")
    assert set(violation_paths(excinfo)) == {"particle.mass", "plot"}


def test_field_keys_depend_on_the_model():
    with pytest.raises(ConfigError) as excinfo:
        parse_scenario("field:\n  type: uniform\n  gradient: 2.0\n")
    assert violation_paths(excinfo) == ["field.gradient"]


def test_all_violations_are_reported_together():
    text = """
particle:
  m0: -1.0
initial:
  beta: [0.9, 0.9, 0]
integrator:
  method: euler
  stride: 0
output:
  format: png
"""
    with pytest.raises(ConfigError) as excinfo:
        parse_scenario(text)
    assert set(violation_paths(excinfo)) == {
        "particle.m0",
        "initial.beta",
        "integrator.method",
        "integrator.stride",
        "output.format",
    }


def test_type_errors_name_the_field():
    with pytest.raises(ConfigError) as excinfo:
        parse_scenario("integrator:\n  projection: 1\n  stride: 2.5\ninitial:\n  beta: [0.1, 0.2]\n")
    assert set(violation_paths(excinfo)) == {"integrator.projection", "integrator.stride", "initial.beta"}


def test_non_string_field_type():
    with pytest.raises(ConfigError) as excinfo:
        parse_scenario("field:\n  type: 3\n")
    assert "field.type" in violation_paths(excinfo)


def test_invalid_yaml():
    with pytest.raises(ConfigError, match="not valid YAML"):
        parse_scenario("particle: [1, 2\n")
    with pytest.raises(ConfigError):
        parse_scenario("- just\n- a list\n")


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_scenarios_round_trip(scenario_file, name):
    scenario = load_scenario(scenario_file(name))
    assert parse_scenario(serialize_scenario(scenario)) == scenario
    assert scenario.name == name


def test_preset_fills_the_g_factor():
    scenario = parse_scenario("particle:\n  preset: muon\n  hbar: 0\n" + MINIMAL)
    assert scenario.particle.g == G_FACTOR_PRESETS["muon"]
    assert parse_scenario(serialize_scenario(scenario)) == scenario
    with pytest.raises(ConfigError) as excinfo:
        parse_scenario("particle:\n  preset: muon\n  g: 2.1\n")
    assert violation_paths(excinfo) == ["particle.g"]
    with pytest.raises(ConfigError) as excinfo:
        parse_scenario("particle:\n  preset: proton\n")
    assert violation_paths(excinfo) == ["particle.preset"]


def test_nonphysical_model_must_be_flagged():
    with pytest.raises(ConfigError) as excinfo:
        parse_scenario("field:\n  type: linear-e-gradient\n  k: 0.5\n")
    assert violation_paths(excinfo) == ["field.nonphysical"]
    scenario = parse_scenario("field:\n  type: linear-e-gradient\n  k: 0.5\n  nonphysical: true\n")
    assert scenario.field_model().nonphysical


def test_shirokov_needs_hbar():
    with pytest.raises(ConfigError) as excinfo:
        parse_scenario("particle:\n  hbar: 0\nintegrator:\n  formulation: shirokov-momentum\n")
    assert violation_paths(excinfo) == ["particle.hbar"]


def test_cyclotron_period_time_unit(scenario_file):
    scenario = load_scenario(scenario_file("anomalous-precession"))
    assert scenario.time_scale() == pytest.approx(2 * math.pi)
    config = scenario.step_config()
    assert config.step == pytest.approx(2 * math.pi / 4096, rel=1e-15)
    assert config.duration == pytest.approx(20 * math.pi, rel=1e-15)
    assert config.n_steps == 40960
    with pytest.raises(ConfigError) as excinfo:
        parse_scenario("integrator:\n  time_unit: cyclotron-period\n")
    assert violation_paths(excinfo) == ["integrator.time_unit"]


def test_field_model_from_quadrupole_scenario(scenario_file):
    scenario = load_scenario(scenario_file("quadrupole-stern-gerlach"))
    assert scenario.field_model() == MagneticQuadrupole(gradient=1.0, B0=0.0)
    assert scenario.time_scale() == 1.0


def test_set_parameter(scenario_file):
    scenario = load_scenario(scenario_file("cyclotron"))
    changed = set_parameter(scenario, "particle.g", 2.5)
    assert changed.particle.g == 2.5
    assert changed.integrator == scenario.integrator
    assert set_parameter(scenario, "integrator.duration", 3).integrator.duration == 3.0
    with pytest.raises(ConfigError):
        set_parameter(scenario, "g", 2.5)
    with pytest.raises(ConfigError) as excinfo:
        set_parameter(scenario, "initial.beta", [1.5, 0.0, 0.0])
    assert violation_paths(excinfo) == ["initial.beta"]


def test_with_formulation_revalidates(scenario_file):
    scenario = load_scenario(scenario_file("quadrupole-stern-gerlach"))
    assert scenario.with_formulation("shirokov-momentum").integrator.formulation == "shirokov-momentum"
    with pytest.raises(ConfigError):
        scenario.with_formulation("effective-field")


def test_scenario_from_dict_rejects_non_mappings():
    with pytest.raises(ConfigError):
        scenario_from_dict(["particle"])
    with pytest.raises(ConfigError) as excinfo:
        scenario_from_dict({"particle": [1, 2]})
    assert violation_paths(excinfo) == ["particle"]


def test_missing_scenario_file(tmp_path: Path):
    with pytest.raises(FileNotFoundError):
        load_scenario(tmp_path / "nope.yaml")


def test_exponent_numbers_without_a_dot():
    scenario = parse_scenario("particle:\n  hbar: 1e-3\ninitial:\n  beta: [5e-1, 0, 0]\n")
    assert scenario.particle.hbar == 1e-3
    assert scenario.initial.beta == (0.5, 0.0, 0.0)
    with pytest.raises(ConfigError) as excinfo:
        parse_scenario("particle:\n  hbar: small\n")
    assert violation_paths(excinfo) == ["particle.hbar"]
