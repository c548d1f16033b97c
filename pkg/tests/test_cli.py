import json

import numpy as np
import pytest

from nuhyp.cli import main
from nuhyp.cocycle import orbit_to_json
from nuhyp.config import DEFAULTS, load_config
from nuhyp.errors import ParameterError
from nuhyp.experiments import dumps, result_to_dict, run_experiment
from nuhyp.systems import CatMap, cat_orbit
from nuhyp.wstar import EmpiricalMeasure, measure_to_csv, measure_to_json


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_pliss_file(tmp_path, capsys):
    f = tmp_path / "a.csv"
    f.write_text("2\n-1\n2\n")
    code, out, _ = run(capsys, "pliss", f, "--c1", "0.5")
    assert code == 0 and json.loads(out)["pliss_times"] == [1, 3]


def test_pliss_periodic_constant(tmp_path, capsys):
    f = tmp_path / "c.csv"
    f.write_text("# one period\n0.7, 0.7\n0.7\n")
    code, out, _ = run(capsys, "pliss", f, "--c1", "0.5", "--periodic")
    assert json.loads(out)["ultimate_times"] == [1, 2, 3]


def test_pliss_verify_random(tmp_path, capsys):
    rng = np.random.default_rng(12345)
    f = tmp_path / "r.csv"
    f.write_text("\n".join(str(v) for v in rng.uniform(-1, 1, 300)))
    code, out, _ = run(capsys, "pliss", f, "--c1", "0.1", "--c2", "0.5", "--A", "1", "--verify")
    rep = json.loads(out)
    assert code == 0 and rep["oracle"] == "match" and rep["theta"] == pytest.approx(4 / 9)


def test_pliss_exact_mode(tmp_path, capsys):
    f = tmp_path / "q.csv"
    f.write_text("1/3\n-1/6\n1/2\n")
    code, out, _ = run(capsys, "pliss", f, "--c1", "1/6", "--exact", "--verify")
    rep = json.loads(out)
    assert rep["c1"] == "1/6" and rep["oracle"] == "match"


def test_pliss_parse_error_names_line(tmp_path, capsys):
    f = tmp_path / "bad.csv"
    f.write_text("1\n2\nabc\n")
    code, _, err = run(capsys, "pliss", f, "--c1", "0")
    assert code == 2 and "bad.csv:3" in err


def test_exponents_periodic(tmp_path, capsys):
    rec = cat_orbit(CatMap(), (0.5, 0))
    f = tmp_path / "orbit.json"
    f.write_text(orbit_to_json(rec.segment))
    code, out, _ = run(capsys, "exponents", f)
    rep = json.loads(out)
    assert code == 0 and rep["period"] == 3 and rep["domination_N"] == 1
    assert rep["exponents"] == pytest.approx([-0.9624236501192069, 0.9624236501192069], abs=1e-14)


def test_measure_dist(tmp_path, capsys):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.json"
    a.write_text(measure_to_csv(EmpiricalMeasure.dirac([0.1, 0.2], "torus")))
    b.write_text(measure_to_json(EmpiricalMeasure.dirac([0.1, 0.2], "torus")))
    code, out, _ = run(capsys, "measure-dist", a, b, "--K", "10")
    rep = json.loads(out)
    assert code == 0 and rep["distance"] == 0 and rep["K"] == 10 and rep["tail_bound"] == 2.0**-9


def test_classes(tmp_path, capsys):
    empty = tmp_path / "none.json"
    empty.write_text("[]")
    code, out, _ = run(capsys, "classes", "--saddles", empty)
    assert json.loads(out)["classes"] == []
    cat = tmp_path / "cat.json"
    cat.write_text(json.dumps([{"point": [0, 0]}, {"point": [0.5, 0], "period": 3}]))
    code, out, _ = run(capsys, "classes", "--saddles", cat, "--budget", "4")
    assert json.loads(out)["classes"] == [[0, 1]]
    blow = tmp_path / "blow.json"
    blow.write_text('["p1", "p2"]')
    code, out, _ = run(capsys, "classes", "--system", "blowup", "--saddles", blow, "--budget", "50")
    rep = json.loads(out)
    assert rep["classes"] == [[0], [1]]
    assert rep["evidence"][0]["reason"] == "not found within budget"


def test_classes_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "classes", "--saddles", tmp_path / "nope.json")
    assert code == 2 and "nope.json" in err


def test_experiment_catmap_writes_and_exits_zero(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[catmap]\nq_max = 8\nclasses_q_max = 2\n")
    code, out, _ = run(capsys, "experiment", "catmap", "--config", cfg, "--output", tmp_path / "out")
    assert code == 0 and "PASS catmap.exponents" in out
    summary = json.loads((tmp_path / "out" / "catmap_summary.json").read_text())
    assert summary["checks"]
    head = (tmp_path / "out" / "catmap_exponents.csv").read_text().splitlines()
    assert head[0].startswith("# ") and any("[1/step]" in line for line in head)


def test_experiment_failing_check_exits_one(tmp_path, capsys):
    code, out, _ = run(capsys, "experiment", "catmap", "--set", "catmap.q_max=3", "--set", "catmap.classes_q_max=2",
                       "--set", "catmap.exponent_tol=-1.0", "--output", tmp_path)
    assert code == 1 and "FAIL catmap.exponents" in out


def test_experiment_bad_config(tmp_path, capsys):
    code, _, err = run(capsys, "experiment", "catmap", "--set", "pliss.c2=0.1", "--output", tmp_path)
    assert code == 2 and "c2" in err


def test_config_overrides():
    cfg = load_config(overrides=["figure8.eps=[0.1, 0.01]", "seed=7", "measure.family=cylinder"])
    assert cfg["figure8"]["eps"] == [0.1, 0.01] and cfg["seed"] == 7 and cfg["measure"]["family"] == "cylinder"
    assert DEFAULTS["seed"] == 12345
    with pytest.raises(ParameterError):
        load_config(overrides=["nonsense"])


def test_experiment_output_is_deterministic():
    cfg = load_config(overrides=["catmap.q_max=6", "catmap.classes_q_max=2"])
    a = dumps(result_to_dict(run_experiment("catmap", cfg), cfg))
    b = dumps(result_to_dict(run_experiment("catmap", cfg, workers=2), cfg))
    assert a == b


def test_dumps_floats():
    assert dumps({"x": 0.1, "y": [1, np.float64(2.5)], "z": None}) == \
        '{\n  "x": 0.10000000000000001,\n  "y": [\n    1,\n    2.5\n  ],\n  "z": null\n}'
