import csv
import dataclasses
import io
import json

import pytest

import nfsieve.lattice_count as lc
from nfsieve.cli import main
from nfsieve.field_data import DATA_DIR


def _csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_census_example(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["census", "fields/q_i.field", "--x", "1000", "--out", "report.csv"]) == 0
    rows = _csv((tmp_path / "report.csv").read_text())
    assert {"exact", "main", "log10_bound"} <= set(rows[0])
    assert rows[0]["exact"] == "787"


def test_count_domain_example(capsys):
    assert main(["count-domain", "fields/q_sqrt2.field", "--a", "1", "--f", "3", "--t", "5"]) == 0
    rows = _csv(capsys.readouterr().out)
    assert len(rows) == 1 and rows[0]["pass"] == "True" and rows[0]["exact_lo"] == "6"


def test_missing_file_and_usage(capsys):
    assert main(["census", "no_such.field", "--x", "10"]) == 2
    assert main(["census", "q_i"]) == 2
    assert main(["count-domain", "q_sqrt2", "--t", "3", "--eta", "+"]) == 2
    assert main(["census", "q_i", "--x", "10", "--limit", "5"]) == 2
    assert main([]) == 2


def test_invalid_data_exit_code(tmp_path):
    d = json.loads((DATA_DIR / "fields" / "q_sqrt2.field").read_text())
    d["regulator"] = "0.7"
    p = tmp_path / "bad.field"
    p.write_text(json.dumps(d))
    assert main(["validate-field", str(p)]) == 3


def test_certificate_failure_exit_code(monkeypatch, capsys):
    real = lc.theorem3_certificate

    def failing(*a, **k):
        return dataclasses.replace(real(*a, **k), passed=False)

    monkeypatch.setattr(lc, "theorem3_certificate", failing)
    assert main(["count-domain", "q_i", "--t", "4", "6"]) == 1
    err = _csv(capsys.readouterr().err)
    assert len(err) == 2 and all(r["pass"] == "False" for r in err)


@pytest.mark.parametrize("argv", [
    ["ray-class", "q_sqrt2", "--f", "3"],
    ["sieve", "q_i", "--x", "300", "--z", "8", "16"],
    ["bt-bound", "zeta5_over_sqrt5", "--x", "1000", "1e130"],
    ["bt-bound", "zeta5_frob2", "--x", "500"],
    ["reduce-units", "cubic_x3m2"],
    ["validate-field", "q_zeta5"],
])
def test_subcommands_pass_and_are_deterministic(argv, capsys):
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    assert capsys.readouterr().out == first
    assert first.count("\n") >= 2


def test_verify_all_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["verify-all", "--seed", "3", "--out", str(a)]) == 0
    assert main(["verify-all", "--seed", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = _csv(a.read_text())
    assert {r["stage"] for r in rows} >= {"validate-field", "census", "count-domain", "ray-class", "pi_C", "chain"}
