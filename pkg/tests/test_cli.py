import json
import subprocess
import sys

import pytest

from smartrule.cli import main, read_table, write_table
from smartrule.errorfn import majority_error
from smartrule.harness import nn_counterexample_search
from smartrule.schedule import exact_schedule, vc_sample_size


def run(args, tmp_path, name="out.csv"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    return code, out.read_text()


def write_json(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def rows_of(text):
    return read_table(text)[2]


# -- errfn ------------------------------------------------------------------------

def test_errfn_n3(tmp_path):
    code, text = run(["errfn", "--n", "3", "--grid", "1001"], tmp_path)
    assert code == 0
    header, columns, rows = read_table(text)
    assert columns == ["n", "p", "L", "envelope", "bayes"] and len(rows) == 1001
    by_p = {float(r["p"]): r for r in rows}
    assert float(by_p[0.5]["L"]) == 0.5
    assert float(by_p[0.1]["L"]) == pytest.approx(0.1224, abs=1e-15)
    assert float(by_p[0.1]["envelope"]) > float(by_p[0.1]["L"])
    assert float(by_p[0.1]["bayes"]) == 0.1
    assert "version" in header


def test_errfn_n1_envelope_is_L(tmp_path):
    _, text = run(["errfn", "--n", "1", "--grid", "101"], tmp_path)
    for r in rows_of(text):
        assert r["envelope"] == r["L"]


def test_errfn_several_n(tmp_path):
    _, text = run(["errfn", "--n", "1,3", "--n", "5", "--grid", "11"], tmp_path)
    rows = rows_of(text)
    assert [int(r["n"]) for r in rows[::11]] == [1, 3, 5]
    assert float(rows[-2]["L"]) == majority_error(0.9, 5)


def test_errfn_rejects_even_n(tmp_path):
    with pytest.raises(SystemExit, match="odd"):
        main(["errfn", "--n", "4"])


# -- schedule ----------------------------------------------------------------------

def test_schedule_k1(tmp_path):
    cfg = write_json(tmp_path, "s.json", {"mode": "practical", "K": 1})
    _, text = run(["schedule", "--config", cfg], tmp_path)
    (row,) = rows_of(text)
    assert (row["k"], row["a"], row["b"], row["n_end"]) == ("1", "0", "1", "1")


def test_schedule_practical(tmp_path):
    cfg = write_json(tmp_path, "s.json", {"schedule": {"mode": "practical", "K": 8, "A": 4, "B": 9, "r": 2}})
    _, text = run(["schedule", "--config", cfg], tmp_path)
    header, columns, rows = read_table(text)
    assert columns == ["k", "eps", "delta", "N", "a", "b", "n_start", "n_end", "status"]
    assert len(rows) == 8 and all(r["status"] == "practical" for r in rows)
    assert "notice" in header
    for prev, cur in zip(rows, rows[1:]):
        assert int(cur["n_start"]) == int(prev["n_end"]) + 1
        assert int(cur["n_end"]) - int(cur["n_start"]) + 1 == int(cur["a"]) + int(cur["b"]) + 1


def test_schedule_exact_k2(tmp_path):
    cfg = write_json(tmp_path, "s.json", {"mode": "exact", "K": 2})
    _, text = run(["schedule", "--config", cfg], tmp_path)
    rows = rows_of(text)
    assert [r["status"] for r in rows] == ["audited", "audited"]
    N2, a2 = int(rows[1]["N"]), int(rows[1]["a"])
    assert a2 == vc_sample_size(2, N2, float(rows[1]["delta"]))
    assert int(rows[1]["b"]) == exact_schedule(2).b[1]


def test_schedule_exact_cap_is_row_failure(tmp_path):
    cfg = write_json(tmp_path, "s.json", {"mode": "exact", "K": 3, "cap": 101})
    code, text = run(["schedule", "--config", cfg], tmp_path)
    assert code == 0
    rows = rows_of(text)
    assert rows[-1]["k"] == "3" and rows[-1]["status"].startswith("failed")
    assert [r["status"] for r in rows[:2]] == ["audited", "audited"]


# -- simulate -----------------------------------------------------------------------

def test_simulate_constant_flat(tmp_path):
    cfg = write_json(tmp_path, "r.json", {
        "problem": {"components": [{"type": "arc", "start": 0, "end": 0, "mass": 1, "eta": 0.3}]},
        "rule": "constant", "rule_params": {"label": 0}, "ns": [1, 10, 100], "trials": 5})
    code, text = run(["simulate", "--config", cfg, "--seed", "1"], tmp_path)
    assert code == 0
    rows = rows_of(text)
    assert [float(r["mean_risk"]) for r in rows] == [0.3, 0.3, 0.3]
    log = json.loads((tmp_path / "out.json").read_text())
    assert log["monotonicity"]["passed"] and log["header"]["seed"] == 1


def test_simulate_smart_zero_noise(tmp_path):
    cfg = write_json(tmp_path, "r.json", {
        "problem": {"components": [{"type": "arc", "start": 0.2, "end": 0.7, "mass": 1, "eta": 0.0}]},
        "rule": "smart", "schedule": {"mode": "practical", "growth": "polynomial", "K": 4, "N": 1},
        "trials": 10, "seed": 3})
    code, text = run(["simulate", "--config", cfg], tmp_path)
    assert code == 0
    header, _, rows = read_table(text)
    assert len(rows) == 4 and all(float(r["mean_risk"]) == 0.0 for r in rows)
    assert header["mode"] == "practical" and "notice" in header


def test_simulate_nn1_witness(tmp_path):
    witness = nn_counterexample_search(seed=7)
    cfg = write_json(tmp_path, "r.json", {"problem": witness["problem"], "rule": "nn1", "ns": [1, 2]})
    code, text = run(["simulate", "--config", cfg, "--seed", "5", "--trials", "40000"], tmp_path)
    assert code == 0
    one, two = rows_of(text)
    assert float(one["mean_risk"]) < float(two["mean_risk"])
    assert float(one["mean_risk"]) == pytest.approx(witness["EL1"], abs=4 * float(one["stderr"]))
    assert float(two["mean_risk"]) == pytest.approx(witness["EL2"], abs=4 * float(two["stderr"]))


def test_simulate_is_deterministic(tmp_path):
    cfg = write_json(tmp_path, "r.json", {
        "problem": {"components": [{"type": "arc", "start": 0, "end": 0.5, "mass": 0.5, "eta": 0.1},
                                   {"type": "arc", "start": 0.5, "end": 0, "mass": 0.5, "eta": 0.9}]},
        "rule": "smart", "schedule": {"growth": "polynomial", "K": 4, "N": 1}, "trials": 20})
    _, a = run(["simulate", "--config", cfg, "--seed", "9"], tmp_path, "a.csv")
    _, b = run(["simulate", "--config", cfg, "--seed", "9"], tmp_path, "b.csv")
    assert a == b
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


@pytest.mark.parametrize("cfg, pointer", [
    ({"rule": "constant", "ns": [1], "seed": 1}, "/problem"),
    ({"problem": {"components": [{"type": "atom", "location": 0.1, "mass": 1}]}, "rule": "constant", "ns": [1], "seed": 1},
     "/problem/components/0"),
    ({"problem": {"components": [{"type": "atom", "location": 0.1, "mass": 1, "eta": 0}]}, "rule": "knn", "seed": 1}, "/rule"),
    ({"problem": {"components": [{"type": "atom", "location": 0.1, "mass": 1, "eta": 0}]},
      "schedule": {"K": "eight"}, "seed": 1}, "/schedule/K"),
    ({"problem": {"components": [{"type": "atom", "location": 0.1, "mass": 1, "eta": 0}]}, "rule": "nn1",
      "ns": [3, 2], "seed": 1}, "/ns"),
    ({"problem": {"components": [{"type": "atom", "location": 0.1, "mass": 1, "eta": 0}]}, "rule": "nn1", "ns": [1]},
     "/seed"),
])
def test_simulate_config_errors(tmp_path, capsys, cfg, pointer):
    path = write_json(tmp_path, "bad.json", cfg)
    assert main(["simulate", "--config", path]) == 2
    assert f"{pointer}:" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "nope.json"), "--seed", "1"]) == 2
    assert "does not exist" in capsys.readouterr().err


def test_negative_seed(capsys):
    assert main(["verify", "--suite", "identity", "--seed", "-1"]) == 2


# -- verify ---------------------------------------------------------------------------

def test_verify_identity(tmp_path):
    code, text = run(["verify", "--suite", "identity", "--seed", "1"], tmp_path, "r.json")
    rep = json.loads(text)
    assert code == 0 and rep["passed"] and rep["results"]["identity"]["max_deviation"] <= 1e-12


def test_verify_key_small_N_fails(tmp_path):
    cfg = write_json(tmp_path, "k.json", {"n": 3, "t": 0.25, "N": 3})
    code, text = run(["verify", "--suite", "key", "--seed", "1", "--config", cfg], tmp_path, "r.json")
    rep = json.loads(text)["results"]["key"]
    assert code == 1 and not rep["passed"] and 0 < rep["worst_p"] < 0.5


def test_verify_unknown_suite(capsys):
    assert main(["verify", "--suite", "bogus", "--seed", "1"]) == 2
    assert "unknown suite" in capsys.readouterr().err


def test_verify_all_byte_identical(tmp_path):
    code_a, a = run(["verify", "--suite", "all", "--seed", "7"], tmp_path, "a.json")
    code_b, b = run(["verify", "--suite", "all", "--seed", "7"], tmp_path, "b.json")
    assert code_a == code_b == 0 and a == b
    assert set(json.loads(a)["results"]) == {"identity", "key", "key_piece", "coverage", "counterexample"}


# -- tables ------------------------------------------------------------------------------

def test_csv_round_trip(tmp_path):
    _, text = run(["errfn", "--n", "3,7", "--grid", "257"], tmp_path)
    header, columns, rows = read_table(text)
    assert write_table(header, columns, rows) == text
    assert "\r" not in text


def test_write_table_formats():
    text = write_table({"seed": 3}, ["a", "b", "c"], [{"a": 0.1, "b": True, "c": None}])
    assert text == "# seed: 3\na,b,c\n0.1,true,\n"


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "smartrule.cli", "errfn", "--n", "1", "--grid", "3"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[-1] == "1,1.0,0.0,0.0,0.0"
