"""
Tests de la lectura y validación de configuraciones
"""

import json

import pytest

from kirchhoff_lab.config import ExperimentConfig, GridSpec, load_config
from kirchhoff_lab.errors import ConfigError
from kirchhoff_lab.functionals import PurePower

from tests.conftest import write_config

BASE = {
    "domain": {"kind": "ball", "N": 3, "R": 1.0, "p": 2.0},
    "term": {"variant": "pure_power", "r": 4.0},
    "nonlinearity": {"model": {"q": 2.0, "varpi": 3.0, "lam": 1.0}},
    "grid": {"cells": 120, "grading": 1.0},
    "params": {"tol": 1e-8, "newton_tol": 1e-10, "count": 3},
    "seed": 7,
}


def test_grid_spec_validation():
    assert GridSpec().to_dict() == {"cells": 400, "grading": 1.5}
    with pytest.raises(ConfigError, match="grading"):
        GridSpec(100, 0.5)
    with pytest.raises(ConfigError, match="cells"):
        GridSpec(2)
    with pytest.raises(ConfigError, match="grid.spacing"):
        GridSpec.from_dict({"spacing": 1})


def test_from_dict_builds_all_parts():
    config = ExperimentConfig.from_dict(BASE)
    assert config.domain.N == 3
    assert isinstance(config.term, PurePower)
    assert config.term.r == pytest.approx(4.0)
    assert config.nonlinearity.q == pytest.approx(2.0)
    assert config.grid.cells == 120
    assert config.seed == 7
    assert config.param("count") == 3
    assert config.param("missing", "x") == "x"


def test_tolerances_are_collected_sorted():
    config = ExperimentConfig.from_dict(BASE)
    assert config.tolerances() == {"newton_tol": 1e-10, "tol": 1e-8}


def test_interval_defaults_to_dimension_one():
    config = ExperimentConfig.from_dict({"domain": {"kind": "interval", "R": 3.0, "p": 2.0}})
    assert config.domain.N == 1
    assert config.term is None
    with pytest.raises(ConfigError, match="term"):
        config.require_term("solve")
    with pytest.raises(ConfigError, match="nonlinearity"):
        config.require_nonlinearity("solve")


@pytest.mark.parametrize(
    "patch, match",
    [
        ({"extra": 1}, "extra"),
        ({"domain": {"kind": "ball", "R": 1.0, "p": 2.0}}, "domain.N"),
        ({"domain": {"kind": "ball", "N": 3, "p": 2.0}}, "domain.R"),
        ({"domain": {"kind": "torus", "N": 3, "R": 1.0, "p": 2.0}}, "domain.kind"),
        ({"term": {"variant": "cubic"}}, "term.variant"),
        ({"term": {"variant": "pure_power"}}, "term.r"),
        ({"nonlinearity": {}}, "nonlinearity"),
        ({"params": {"tol": -1.0}}, "params.tol"),
        ({"params": {"rtol": "small"}}, "params.rtol"),
        ({"params": [1, 2]}, "params"),
        ({"seed": -1}, "seed"),
        ({"seed": True}, "seed"),
    ],
)
def test_from_dict_rejects_invalid_fields(patch, match):
    data = {**BASE, **patch}
    with pytest.raises(ConfigError, match=match):
        ExperimentConfig.from_dict(data)


def test_domain_is_required():
    data = {k: v for k, v in BASE.items() if k != "domain"}
    with pytest.raises(ConfigError, match="domain"):
        ExperimentConfig.from_dict(data)


def test_with_seed_overrides():
    config = ExperimentConfig.from_dict(BASE)
    assert config.with_seed(None) is config
    assert config.with_seed(11).seed == 11
    assert config.with_seed(11).grid == config.grid


def test_to_dict_reloads_to_same_config():
    config = ExperimentConfig.from_dict(BASE)
    again = ExperimentConfig.from_dict(json.loads(json.dumps(config.to_dict())))
    assert again.to_dict() == config.to_dict()


def test_load_config(tmp_path):
    path = write_config(tmp_path / "run.json", BASE)
    assert load_config(path).seed == 7


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="no se pudo leer"):
        load_config(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{\"domain\": ", encoding="utf-8")
    with pytest.raises(ConfigError, match="JSON inválido"):
        load_config(broken)
    listing = tmp_path / "list.json"
    listing.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError, match="objeto JSON"):
        load_config(listing)
