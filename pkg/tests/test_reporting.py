"""
Tests de los artefactos de salida
"""

import json
import math

import numpy as np
import pandas as pd
import pytest

from kirchhoff_lab.errors import ConfigError
from kirchhoff_lab.reporting import RunWriter, jsonable, loglog_svg, profile_rows
from tests.conftest import sine_profile


def test_jsonable_handles_numpy_and_non_finite():
    data = {"a": np.float64(1.5), "b": np.int32(3), "c": (1, 2), "d": np.array([0.5, math.inf])}
    data.update({"e": math.nan, "f": -math.inf, "g": np.bool_(True), "h": None})
    out = jsonable(data)
    assert out == {
        "a": 1.5, "b": 3, "c": [1, 2], "d": [0.5, "inf"],
        "e": "nan", "f": "-inf", "g": True, "h": None,
    }
    json.dumps(out, allow_nan=False)


def test_frame_adds_provenance(tmp_path):
    writer = RunWriter(tmp_path)
    df = writer.frame([{"x": 1.0}, {"x": 2.0, "provenance": "fitted"}])
    assert list(df["provenance"]) == ["computed", "fitted"]
    assert list(writer.frame([]).columns) == ["provenance"]
    with pytest.raises(ConfigError, match="provenance"):
        writer.frame([{"x": 1.0, "provenance": "guessed"}])
    with pytest.raises(ConfigError, match="provenance"):
        writer.frame([{"x": 1.0}], provenance="guessed")


def test_csv_table(tmp_path):
    writer = RunWriter(tmp_path)
    path = writer.table("trace", [{"eps": 0.1, "J": -1.0}], provenance="closed-form")
    df = pd.read_csv(path)
    assert list(df.columns) == ["eps", "J", "provenance"]
    assert df["provenance"].iloc[0] == "closed-form"
    assert writer.artifacts == ["trace.csv"]


def test_json_table_is_strict_json(tmp_path):
    writer = RunWriter(tmp_path, fmt="json")
    path = writer.table("rows", [{"value": math.inf}, {"value": 1.0}])
    records = json.loads(path.read_text(encoding="utf-8"))
    assert records[0] == {"value": "inf", "provenance": "computed"}
    assert records[1]["value"] == 1.0


def test_unknown_format(tmp_path):
    with pytest.raises(ConfigError, match="format"):
        RunWriter(tmp_path, fmt="xlsx")


def test_profile_rows_and_export(tmp_path):
    _, u = sine_profile(1, cells=20)
    rows = profile_rows(u)
    assert len(rows) == u.grid.nodes.size
    assert rows[0]["rho"] == 0.0
    writer = RunWriter(tmp_path)
    assert writer.profile("phi1", u).name == "profile_phi1.csv"


def test_manifest_is_sorted_and_lists_artifacts(tmp_path):
    writer = RunWriter(tmp_path, plot=True)
    writer.table("b_table", [{"x": 1.0, "y": 2.0}, {"x": 10.0, "y": 20.0}])
    writer.table("a_table", [{"x": 1.0}])
    writer.plot("b_plot", "x", ["y", "missing"], table="b_table")
    writer.record(slope=np.float64(1.0))
    path = writer.manifest("norms", {"seed": 0}, 0, {"tol": 1e-8}, {"ok": True})
    payload = json.loads(path.read_text(encoding="utf-8"))
    assert payload["artifacts"] == ["a_table.csv", "b_plot.svg", "b_table.csv"]
    assert payload["fitted"] == {"slope": 1.0}
    assert payload["package"]["kirchhoff_lab"]
    assert set(payload["libraries"]) == {"numpy", "scipy", "pandas", "matplotlib", "click", "rich"}
    text = path.read_text(encoding="utf-8")
    assert text == json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def test_plot_disabled_returns_none(tmp_path):
    writer = RunWriter(tmp_path)
    writer.table("t", [{"x": 1.0, "y": 1.0}])
    assert writer.plot("t", "x", ["y"]) is None
    assert not (tmp_path / "t.svg").exists()


def test_loglog_svg():
    xs = np.array([1.0, 10.0, 100.0, -1.0])
    svg = loglog_svg({"a<b": (xs, xs**2)}, "eps", "t & u")
    assert "<svg" in svg
    assert "a&lt;b" in svg and "t &amp; u" in svg
    assert svg == loglog_svg({"a<b": (xs, xs**2)}, "eps", "t & u")
    empty = loglog_svg({"z": (np.zeros(3), np.ones(3))}, "x", "vacío")
    assert "sin datos positivos" in empty
