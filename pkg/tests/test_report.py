import csv
import json
import math

import numpy as np
import pytest

from funcmart.report import dumps, emit_plot_data, fmt_float, write_json, write_matrix_csv


@pytest.mark.parametrize("v", [0.1, 1 / 3, np.pi * 1e-300, -2.5e17, 5e-324])
def test_floats_round_trip(v):
    assert float(fmt_float(v)) == v
    assert json.loads(dumps([v]))[0] == v


def test_dumps_keeps_key_order_and_types():
    obj = {"b": 1, "a": [1.5, True, None], "c": {"x": np.float64(2.0), "y": np.int64(3)}, "d": np.array([1.0])}
    text = dumps(obj)
    assert list(json.loads(text)) == ["b", "a", "c", "d"]
    assert json.loads(text)["c"] == {"x": 2.0, "y": 3}
    assert text.endswith("\n")


def test_non_finite_become_strings():
    assert json.loads(dumps([math.inf, -math.inf, math.nan])) == ["inf", "-inf", "nan"]


def test_unknown_type_rejected():
    with pytest.raises(TypeError):
        dumps({"x": object()})


def test_write_matrix_csv(tmp_path):
    path = write_matrix_csv(tmp_path / "m.csv", (0.5, 1.0), np.array([[0.1, 0.2], [1 / 3, -1.0]]))
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["path_index", "0.5", "1"]
    assert rows[2][0] == "1" and float(rows[2][1]) == 1 / 3


def test_write_json_creates_dirs(tmp_path):
    p = write_json(tmp_path / "a" / "b.json", {"x": 1})
    assert json.loads(p.read_text()) == {"x": 1}


def test_emit_plot_data(tmp_path):
    report = {
        "verdict": {
            "candidate": "linear:c=1.0",
            "transform": "FofW",
            "pairs": [{"s": 0.5, "t": 1.0, "instrument": i, "mean": 0.0, "sd": 1.0, "z": 0.1, "p": 0.9}
                      for i in ("const1", "linear")],
        },
        "nested": [{"curve": "time_invariance[x]", "x": list(range(41)), "value": [0.5] * 41}],
    }
    written = emit_plot_data(report, tmp_path)
    rows = list(csv.reader((tmp_path / "zscores.csv").open()))
    assert rows[0] == ["candidate", "transform", "s", "t", "instrument", "mean", "z", "p"]
    assert len(rows) == 3
    curve = list(csv.reader((tmp_path / "curve_time_invariance_x.csv").open()))
    assert curve[0] == ["x", "value"] and len(curve) == 42
    assert len(written) == 2


def test_emit_plot_data_empty_report(tmp_path):
    emit_plot_data({}, tmp_path)
    assert (tmp_path / "zscores.csv").read_text() == "candidate,transform,s,t,instrument,mean,z,p\n"
