import json
import subprocess
import sys

import pytest

from helpers import FIXTURES

from chaincore.cli import main

EX2 = str(FIXTURES / "example2.json")
EX4 = str(FIXTURES / "example4.json")
EX5 = str(FIXTURES / "example5.json")
ASYM = str(FIXTURES / "example2_asymmetric.json")


@pytest.fixture
def run(tmp_path, capsys):
    cache = str(tmp_path / "cache")

    def _run(*argv):
        code = main([*argv, "--cache-dir", cache])
        out, err = capsys.readouterr()
        return code, out, err

    return _run


def test_value_table(run):
    code, out, _ = run("value", EX2)
    assert code == 0
    doc = json.loads(out)
    assert len(doc["values"]) == 12
    assert doc["values"][-1]["value"] == pytest.approx(340 / 3)


def test_value_single_coalition(run):
    code, out, _ = run("value", EX2, "--coalition", "R=2;S=1,2")
    assert code == 0
    (row,) = json.loads(out)["values"]
    assert row["R"] == [2] and row["S"] == [1, 2] and row["value"] == pytest.approx(54)


def test_value_empty_supplier_side(run):
    code, out, _ = run("value", EX2, "--coalition", "R=1;S=")
    assert code == 0 and json.loads(out)["values"][0]["value"] == pytest.approx(40 / 3)


@pytest.mark.parametrize("spec", ["R=3;S=1", "Q=1", "R=;S=1"])
def test_bad_coalition(run, spec):
    code, _, err = run("value", EX2, "--coalition", spec)
    assert code == 1 and "error" in err


def test_missing_file(run):
    code, out, err = run("value", "missing.json")
    assert code == 1 and out == "" and "missing.json" in err


def test_invalid_situation(run, tmp_path):
    data = json.loads((FIXTURES / "example2.json").read_text())
    data["retailers"][1]["price"]["knots"] = [[0, 8], [10, 9], [40, 0]]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, _, err = run("value", str(bad))
    assert code == 1 and "retailer 2" in err


def test_guard_exit_code(run):
    code, _, err = run("value", EX2, "--max-dims", "3")
    assert code == 3 and "size guard" in err


def test_allocate_sc(run):
    code, out, _ = run("allocate", EX2, "sc", "--axioms")
    assert code == 0
    doc = json.loads(out)
    alloc = doc["allocations"]["sc"]
    assert alloc["vector"] == pytest.approx([80 / 3, 140 / 3, 20, 20])
    assert alloc["beta"] == pytest.approx(20)
    assert doc["core"]["sc"]["member"] is True
    assert all(r["passed"] for r in doc["axioms"]["sc"].values())


def test_allocate_sc_star(run):
    code, out, _ = run("allocate", EX4, "sc-star")
    assert code == 0
    doc = json.loads(out)
    assert doc["allocations"]["sc-star"]["vector"] == pytest.approx([275, 1625, 1004 + 6 / 11, 0], abs=1e-2)
    assert doc["optimal_suppliers"] == [1]


def test_allocate_sc_star_bounded(run):
    code, _, err = run("allocate", EX2, "sc-star")
    assert code == 4 and "unbounded" in err


def test_core_check_rule(run):
    code, out, _ = run("core-check", EX2, "sc")
    assert code == 0 and json.loads(out)["core"]["sc"]["member"]


def test_core_check_external(run):
    code, out, err = run("core-check", EX2, str(FIXTURES / "outside_core.json"))
    assert code == 2
    assert "R={2} S=∅ short by 33 1/3" in err
    doc = json.loads(out)
    assert {"R": [2], "S": [], "deficit": pytest.approx(100 / 3)} in doc["core"]["external"]["violations"]


def test_core_check_payoff_length(run, tmp_path):
    f = tmp_path / "p.json"
    f.write_text("[1, 2, 3]")
    code, _, err = run("core-check", EX2, str(f))
    assert code == 1 and "expected n + m = 4" in err


def test_supplier_max(run):
    code, out, _ = run("core-check", EX5, "sc-star", "--supplier-max", "1")
    assert code == 0
    assert json.loads(out)["supplier_max"]["1"] == pytest.approx(0, abs=1e-6)


def test_report_formats(run, tmp_path):
    for fmt in ("json", "csv", "markdown"):
        out = tmp_path / f"r.{fmt}"
        code, stdout, _ = run("report", ASYM, "--format", fmt, "-o", str(out))
        assert code == 0 and stdout == ""
        assert out.stat().st_size > 0
    assert "## Allocation: sc" in (tmp_path / "r.markdown").read_text()


def test_unwritable_output(run, tmp_path):
    code, _, err = run("value", EX2, "-o", str(tmp_path / "no" / "such" / "dir" / "r.json"))
    assert code == 1 and "cannot write" in err


def test_cache_hit_matches_cold(run, tmp_path, capsys):
    _, cold, _ = run("report", EX2)
    _, warm, _ = run("report", EX2)
    assert cold == warm
    code = main(["report", EX2, "--no-cache"])
    nocache, _ = capsys.readouterr()
    assert code == 0 and nocache == cold
    assert list((tmp_path / "cache").glob("*.json"))


def test_resolution_flag_changes_fingerprint(run):
    _, a, _ = run("value", EX5)
    _, b, _ = run("value", EX5, "--resolution", "17", "--rounds", "6")
    da, db = json.loads(a), json.loads(b)
    assert da["fingerprint"] != db["fingerprint"]
    assert db["solver"]["initial_resolution"] == 17 and db["solver"]["rounds"] == 6


def test_module_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "chaincore", "value", EX5, "--no-cache", "--format", "csv"],
        capture_output=True, text=True, check=False,
    )
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "R,S,value,orders"
