import json

import pytest

from qcvselect import crossval
from qcvselect.cli import main

SMALL = ["select", "--dataset", "cancer", "--folds", "3", "--seeds-per-fold", "2",
         "--hidden-min", "1", "--hidden-max", "3", "--control-qubits", "20", "--max-iter", "5"]


def run(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def test_pqm_verify_example(capsys):
    code, out, _ = run(["pqm", "verify", "--patterns", "00,11", "--input", "00", "--control-qubits", "2"], capsys)
    assert code == 0
    assert "analytic distribution: 0.5 0 0.5" in out
    dev = float(out.strip().splitlines()[-1].split("=")[1])
    assert dev < 1e-9


def test_pqm_analytic_self_probe(capsys):
    code, out, _ = run(["pqm", "analytic", "--patterns", "0110", "--input", "0110", "--control-qubits", "5"], capsys)
    assert code == 0 and "analytic E(X)=0\n" in out


def test_pqm_patterns_file(tmp_path, capsys):
    f = tmp_path / "p.txt"
    f.write_text("101\n011\n\n")
    code, out, _ = run(["pqm", "circuit", "--patterns-file", str(f), "--input", "111"], capsys)
    assert code == 0 and out.startswith("circuit distribution:")


@pytest.mark.parametrize("argv", [
    ["pqm", "analytic", "--patterns", "0a1", "--input", "001"],
    ["pqm", "analytic", "--patterns", "01", "--input", "2"],
    ["pqm", "analytic", "--patterns", "01,10", "--input", "011"],
    ["pqm", "analytic", "--input", "01"],
    ["pqm", "circuit", "--patterns", "01,01", "--input", "01"],
    ["select", "--dataset", "cancer", "--mode", "vote"],
    ["select", "--dataset", "cancer", "--hidden-min", "5", "--hidden-max", "2"],
    ["nonsense"],
])
def test_usage_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2 and err


def test_circuit_capacity_exit_1(capsys):
    code, _, err = run(["pqm", "circuit", "--patterns", "0" * 12, "--input", "0" * 12], capsys)
    assert code == 1 and "qubits" in err


def test_missing_dataset_exit_1(tmp_path, capsys):
    code, _, err = run(["select", "--dataset", str(tmp_path / "none.dt"), "--out", str(tmp_path)], capsys)
    assert code == 1 and "not found" in err


def test_single_class_dataset_exit_1(tmp_path, capsys):
    f = tmp_path / "one.csv"
    f.write_text("a,label\n" + "".join(f"{i},x\n" for i in range(6)) + "9,y\n")
    code, _, err = run(["select", "--dataset", str(f), "--format", "csv", "--folds", "2",
                        "--seeds-per-fold", "1", "--hidden-max", "1", "--out", str(tmp_path / "o")], capsys)
    assert code == 1 and "fold" in err


def test_superposition_runs(capsys, tmp_path):
    code, out, _ = run(["superposition", "--weights", "2", "--control-qubits", "10", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert "branches=8" in out
    assert float(out.strip().splitlines()[-1].split("=")[1]) <= 1e-12
    vectors, codes = crossval.read_vectors(tmp_path / "branches.csv")
    assert len(vectors) == 8 and codes[:2] == ["00", "01"]
    assert (tmp_path / "manifest.json").exists()


def test_superposition_default_xor(capsys):
    code, out, _ = run(["superposition"], capsys)
    assert code == 0 and "branches=32" in out


def test_superposition_cap_exit_1(capsys):
    code, _, err = run(["superposition", "--bits", "8", "--weights", "4"], capsys)
    assert code == 1 and "8589934592" in err


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("sel")
    assert main(SMALL + ["--out", str(out), "--save-vectors"]) == 0
    return out


def test_select_outputs(small_run):
    rows = (small_run / "results.csv").read_text().splitlines()
    assert len(rows) == 4
    assert len((small_run / "scatter.csv").read_text().splitlines()) == 4
    assert len((small_run / "distributions.csv").read_text().splitlines()) == 1 + 3 * 21
    man = json.loads((small_run / "manifest.json").read_text())
    assert man["command"] == "select" and man["master_seed"] == 0
    assert man["config"]["kappa"] == 3 and len(man["dataset_sha256"]) == 64
    assert sorted(p.name for p in (small_run / "vectors").iterdir()) == [
        "hidden_01.csv", "hidden_02.csv", "hidden_03.csv"]


def test_select_byte_identical_across_jobs(small_run, tmp_path):
    assert main(SMALL + ["--out", str(tmp_path), "--jobs", "3"]) == 0
    for name in ("results.csv", "table.csv", "scatter.csv", "distributions.csv", "results.json", "manifest.json"):
        assert (tmp_path / name).read_bytes() == (small_run / name).read_bytes(), name


def test_report_reemission(small_run, tmp_path, capsys):
    code, out, _ = run(["report", "--from", str(small_run / "results.json"), "--out", str(tmp_path)], capsys)
    assert code == 0 and out.startswith("selected hidden_neurons=")
    for name in ("results.csv", "table.csv", "scatter.csv", "distributions.csv"):
        assert (tmp_path / name).read_bytes() == (small_run / name).read_bytes(), name


def test_report_missing_exit_1(tmp_path, capsys):
    code, _, _ = run(["report", "--from", str(tmp_path / "x.json"), "--out", str(tmp_path)], capsys)
    assert code == 1


def test_report_version_mismatch_exit_1(small_run, tmp_path, capsys):
    doc = json.loads((small_run / "results.json").read_text())
    doc["manifest"]["version"] = "0.0.0-other"
    bad = tmp_path / "r.json"
    bad.write_text(json.dumps(doc))
    code, _, err = run(["report", "--from", str(bad), "--out", str(tmp_path / "o")], capsys)
    assert code == 1 and "version" in err


def test_score_from_vectors(small_run, capsys):
    code, out, _ = run(["score", "--vectors", str(small_run / "vectors" / "hidden_02.csv"),
                        "--control-qubits", "20"], capsys)
    assert code == 0
    expected = json.loads((small_run / "results.json").read_text())["results"][1]["expected_ones"]
    line = [ln for ln in out.splitlines() if ln.startswith("E(X)=")][0]
    assert float(line.split("=")[1]) == pytest.approx(expected, rel=1e-9)


def test_sample_mode_reports_draw(tmp_path):
    argv = SMALL + ["--out", str(tmp_path), "--mode", "sample", "--measurements", "2"]
    assert main(argv) == 0
    rows = (tmp_path / "results.csv").read_text().splitlines()[1:]
    assert all(r.split(",")[3].isdigit() for r in rows)
