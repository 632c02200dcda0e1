import csv
import io
import json

import pytest
from hypothesis import given, settings, strategies as st

from cqec import experiments as ex
from cqec.exceptions import ConfigError


@pytest.fixture(autouse=True)
def _serial(monkeypatch):
    monkeypatch.setenv(ex.WORKERS_ENV, "1")


def _run(name, **grid):
    return ex.run(ex.ExperimentConfig(name, seed=7, grid=grid))


def test_threshold_rows():
    res = _run("threshold", n=4)
    assert len(res.rows) == 5
    assert res.rows[0]["eps"] == 0.0 and res.rows[1]["eps"] == 1e-10
    assert all(0.0 <= r["f_after"] <= 1.0 + 1e-12 for r in res.rows)


def test_noise_sweep_row_count():
    res = _run("noise-sweep", points=3)
    kinds = [r["noise"] for r in res.rows]
    assert kinds.count("dephasing") == 3 and kinds.count("depolarizing") == 3
    assert all(0.0 <= r["f_before"] <= 1.0 + 1e-12 for r in res.rows)


def test_dd_sweep_values():
    rows = {r["config"]: r for r in _run("dd-sweep").rows}
    assert rows["No DD"]["p_eff_formula"] == pytest.approx(0.9617, abs=5e-4)
    assert rows["CPMG-8"]["gamma_eff"] == pytest.approx(0.2222, abs=1e-4)
    assert rows["CPMG-8"]["F_cat_from_reference"] == pytest.approx(0.963, abs=1e-3)


def test_qec_compare_columns():
    rows = {r["p"]: r for r in _run("qec-compare").rows}
    assert all(rows[0.0][k] == pytest.approx(1.0, abs=1e-12)
               for k in ("none", "steane", "surface3", "surface5", "cqec"))
    assert rows[0.01]["none"] == pytest.approx(0.9906, abs=1e-4)
    assert rows[0.3]["steane"] == pytest.approx(0.885, abs=1e-3)


def test_durability_summary():
    res = _run("durability", cycles=4)
    assert len(res.rows) == 4
    assert res.summary["max_catalyst_deviation"] < 1e-2


def test_config_validation():
    with pytest.raises(ConfigError):
        ex.ExperimentConfig("nope", seed=0)
    with pytest.raises(ConfigError):
        ex.ExperimentConfig("threshold", seed=-1)
    with pytest.raises(ConfigError):
        ex.ExperimentConfig("threshold", seed=0, grid={"bogus": 1})
    with pytest.raises(ConfigError):
        ex.ExperimentConfig("threshold", seed=0, ansatz_depth=5)


def test_config_round_trip():
    cfg = ex.ExperimentConfig("threshold", seed=3, grid={"n": 5})
    assert ex.ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_verify_detects_tampering(tmp_path):
    json_path, csv_path = ex.write_result(_run("threshold", n=2), tmp_path / "r.v1")
    assert json_path.name == "r.v1.json" and csv_path.name == "r.v1.csv"
    assert ex.verify_file(json_path)
    data = json.loads(json_path.read_text())
    data["rows"][0]["f_after"] = 0.5
    json_path.write_text(json.dumps(data))
    assert not ex.verify_file(json_path)


def test_wall_time_excluded_from_digest():
    cfg = ex.ExperimentConfig("scaling", seed=1)
    a = ex.run(cfg, record_time=True)
    b = ex.run(cfg)
    assert a.digest() == b.digest()
    assert b.to_dict()["provenance"]["wall_time"] is None


def test_csv_columns_and_precision():
    text = ex.to_csv([{"a": 1 / 3, "b": None}, {"a": 2.0, "c": True}])
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["a", "b", "c"]
    assert rows[1] == ["0.33333333333333331", "", ""]
    assert rows[2] == ["2", "", "true"]


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_dumps_round_trips_floats(x):
    assert json.loads(ex.dumps({"x": x}))["x"] == x


@settings(max_examples=50)
@given(st.integers(0, 2**64 - 1), st.integers(0, 1000))
def test_row_seed_is_pure(seed, index):
    assert ex.row_seed(seed, index) == ex.row_seed(seed, index)
    assert 0 <= ex.row_seed(seed, index) < 2**64
