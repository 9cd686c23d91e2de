import json
import math

import numpy as np
import pytest

from almostdom.cli import SCHEMA_VERSION, main


def write(path, values, header=None):
    lines = ([header] if header else []) + [repr(float(v)) for v in values]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def pair(tmp_path):
    return write(tmp_path / "x.csv", [0, 2], header="x"), write(tmp_path / "y.csv", [1, 1])


def test_index(capsys, tmp_path, pair):
    code, out, _ = run(capsys, "index", *pair)
    doc = json.loads(out)
    assert code == 0
    assert doc["schema_version"] == SCHEMA_VERSION
    assert doc["command"] == "index"
    assert doc["results"]["epsilon"] == 0.5
    assert doc["inputs"]["X"]["size"] == 2
    x, y = write(tmp_path / "a.csv", [1, 3]), write(tmp_path / "b.csv", [2, 4])
    assert json.loads(run(capsys, "index", x, y)[1])["results"]["epsilon"] == 0.0


def test_identical_files(capsys, pair):
    code, _, err = run(capsys, "index", pair[0], pair[0])
    assert code == 2
    assert "index undefined" in err


def test_bad_rows_name_the_line(capsys, tmp_path, pair):
    bad = tmp_path / "bad.csv"
    bad.write_text("value\n1.0\n\n2.5\nabc\n")
    code, _, err = run(capsys, "index", str(bad), pair[1])
    assert code == 2 and "line 5" in err
    bad.write_text("1.0\ninf\n")
    code, _, err = run(capsys, "index", str(bad), pair[1])
    assert code == 2 and "line 2" in err
    bad.write_text("header\n\n")
    code, _, err = run(capsys, "index", str(bad), pair[1])
    assert code == 2 and "empty" in err
    code, _, err = run(capsys, "index", str(tmp_path / "missing.csv"), pair[1])
    assert code == 2 and "cannot read" in err


def test_usage_errors(capsys, pair):
    assert run(capsys)[0] == 2
    assert run(capsys, "test", *pair, "--alpha", "1.5")[0] == 2
    assert run(capsys, "trim", *pair)[0] == 2
    assert run(capsys, "trim", *pair, "--pi", "0.2", "--solve")[0] == 2
    assert run(capsys, "trim", *pair, "--pi", "1.0")[0] == 2
    assert run(capsys, "--version")[0] == 0


def test_trim(capsys, pair):
    doc = json.loads(run(capsys, "trim", *pair, "--pi", "0.25")[1])
    assert doc["results"]["distance"] == pytest.approx(math.sqrt(1 / 6), abs=1e-12)
    assert doc["results"]["lower"]["breaks"][-1] == 1.0
    doc = json.loads(run(capsys, "trim", *pair, "--solve")[1])
    assert doc["results"]["finite"]
    assert abs(doc["results"]["pi"] - 0.5) <= 1e-6


def test_trim_without_finite_level(capsys, tmp_path):
    x, y = write(tmp_path / "x.csv", [2]), write(tmp_path / "y.csv", [1])
    doc = json.loads(run(capsys, "trim", x, y, "--solve")[1])
    assert not doc["results"]["finite"]
    assert doc["warnings"]


def test_test_is_seeded_and_round_trips(capsys, tmp_path):
    rng = np.random.default_rng(1)
    x = write(tmp_path / "x.csv", rng.normal(size=300))
    y = write(tmp_path / "y.csv", rng.normal(0.455, 1.5, size=300))
    args = ("test", x, y, "--bootstrap-B", "100", "--seed", "7")
    code, first, _ = run(capsys, *args)
    assert code == 0
    assert first == run(capsys, *args)[1]
    res = json.loads(first)["results"]
    assert res["method"] == "bootstrap"
    assert res["reject"] == (res["p_value"] < res["alpha"])


def test_seed_from_environment(capsys, tmp_path, monkeypatch):
    rng = np.random.default_rng(2)
    x = write(tmp_path / "x.csv", rng.normal(size=100))
    y = write(tmp_path / "y.csv", rng.normal(0.3, 1.2, size=100))
    explicit = run(capsys, "test", x, y, "--bootstrap-B", "50", "--seed", "11")[1]
    monkeypatch.setenv("ALMOSTDOM_SEED", "11")
    assert run(capsys, "test", x, y, "--bootstrap-B", "50")[1] == explicit
    monkeypatch.setenv("ALMOSTDOM_SEED", "eleven")
    assert run(capsys, "test", x, y)[0] == 2


def test_separated_samples_reject(capsys, tmp_path):
    rng = np.random.default_rng(3)
    x = write(tmp_path / "x.csv", rng.normal(0, 1, 2000))
    y = write(tmp_path / "y.csv", rng.normal(3, 1, 2000))
    res = json.loads(run(capsys, "test", x, y, "--epsilon0", "0.05")[1])["results"]
    assert res["reject"]
    assert res["upper_bound"] < 0.01


def test_plug_in_warns(capsys, tmp_path):
    rng = np.random.default_rng(4)
    x = write(tmp_path / "x.csv", rng.normal(size=50))
    y = write(tmp_path / "y.csv", rng.normal(1, 1, size=50))
    doc = json.loads(run(capsys, "test", x, y, "--method", "plug-in")[1])
    assert any("scale" in w for w in doc["warnings"])


def test_contour(capsys, tmp_path):
    out = tmp_path / "grid.csv"
    code, text, _ = run(capsys, "contour", "--output", str(out), "--method", "closed-form")
    assert code == 0
    assert json.loads(text)["results"]["rows"] == 2500
    assert len(out.read_text().splitlines()) == 2501
    assert run(capsys, "contour", "-o", str(out), "--sigma-range", "0", "1")[0] == 2


def _study_file(tmp_path, **extra):
    body = {"n": 100, "m": 100, "replications": 20, "variance_method": "delta",
            "G_mu": 0.697, "G_sigma": 1.5, "master_seed": 5, **extra}
    cfg = tmp_path / "study.cfg"
    cfg.write_text("".join(f"{k} = {v}\n" for k, v in body.items()))
    return str(cfg)


def test_simulate_is_reproducible(capsys, tmp_path):
    cfg = _study_file(tmp_path)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "simulate", cfg, "-o", str(a))[0] == 0
    assert run(capsys, "simulate", cfg, "-o", str(b), "--workers", "2")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    code, text, _ = run(capsys, "coverage", cfg, "-o", str(a))
    assert code == 0 and json.loads(text)["results"]["reports"][0]["kind"] == "coverage"


def test_simulate_bad_config(capsys, tmp_path):
    cfg = _study_file(tmp_path, replications=0)
    assert run(capsys, "simulate", cfg, "-o", str(tmp_path / "o.csv"))[0] == 2
    assert run(capsys, "simulate", str(tmp_path / "none.cfg"), "-o", str(tmp_path / "o.csv"))[0] == 2


@pytest.mark.slow
def test_simulate_table_cell(capsys, tmp_path):
    cfg = _study_file(tmp_path, n=1000, m=1000, replications=500, master_seed=12345)
    out = tmp_path / "cell.csv"
    text = run(capsys, "simulate", cfg, "-o", str(out))[1]
    rate = json.loads(text)["results"]["reports"][0]["rate"]
    assert abs(rate - 0.929) <= 0.05
