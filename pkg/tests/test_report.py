"""Report serialization: CSV round trips, stable hashing, file layout."""

import json

import numpy as np
import pytest

from normstab.report import RunReport, Series, config_sha256, report_hash, write_report


def test_series_csv_round_trips_floats_exactly():
    values = [0.1, 1e-17, -3.5, 2.0 / 3.0, 1.2345678901234567e300]
    s = Series(columns=["t", "v"], data=[[float(i), v] for i, v in enumerate(values)])
    text = s.to_csv()
    lines = text.strip().splitlines()
    assert lines[0] == "t,v"
    parsed = [float(line.split(",")[1]) for line in lines[1:]]
    assert parsed == values  # repr round trip is exact for binary64


def _tiny_report(extra=0.0):
    return RunReport(
        command="classify",
        outputs={"verdict": "NormallyStable", "score": 1.25 + extra},
        series={"eig": Series(columns=["re", "im"], data=[[0.0, 0.0], [1.0, 0.0]])},
        tolerances={"gap": 1e-6},
        config_sha256=config_sha256('{"kind": {"builtin": "Ex1"}}'),
        seed=0,
    )


def test_report_hash_ignores_volatile_provenance():
    doc_a = _tiny_report().as_dict(inline_series=True)
    doc_b = _tiny_report().as_dict(inline_series=True)
    doc_b["provenance"]["timestamp"] = "2001-01-01T00:00:00"
    doc_b["provenance"]["duration_s"] = 99.0
    assert report_hash(doc_a) == report_hash(doc_b)
    doc_c = _tiny_report(extra=1.0).as_dict(inline_series=True)
    assert report_hash(doc_a) != report_hash(doc_c)


def test_as_dict_serializes_numpy_and_nonfinite():
    rep = _tiny_report()
    rep.outputs["arr"] = np.arange(3)
    rep.outputs["val"] = np.float64(0.5)
    rep.outputs["bad"] = float("nan")
    doc = rep.as_dict(inline_series=True)
    text = json.dumps(doc)  # must not raise and must not emit bare NaN
    assert "NaN" not in text
    reloaded = json.loads(text)
    assert reloaded["outputs"]["arr"] == [0, 1, 2]
    assert reloaded["outputs"]["val"] == 0.5
    assert isinstance(reloaded["outputs"]["bad"], str)


def test_write_report_layout(tmp_path):
    paths = write_report(_tiny_report(), tmp_path)
    names = sorted(p.name for p in paths)
    assert "report.json" in names and "eig.csv" in names
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["series"]["eig"]["file"] == "eig.csv"
    assert doc["series"]["eig"]["rows"] == 2
    assert doc["provenance"]["config_sha256"] == _tiny_report().config_sha256
    csv_text = (tmp_path / "eig.csv").read_text()
    assert csv_text.splitlines()[0] == "re,im"


def test_config_sha256_deterministic():
    assert config_sha256("abc") == config_sha256("abc")
    assert config_sha256("abc") != config_sha256("abd")
    assert len(config_sha256("abc")) == 64
