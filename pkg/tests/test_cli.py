import csv
import io
import json
import subprocess
import sys

import pytest

from precession.cli import OUTPUT_DIR_ENV, SWEEP_COLUMNS, main


def run_json(capsys, *argv):
    assert main(list(argv)) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema_version"] == 1
    return doc["result"]


def read_csv(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_score_spin_both(capsys):
    res = run_json(capsys, "score", "spin", "--K", "3", "--d", "4", "--method", "both")
    assert res["numeric"]["score"] == pytest.approx(0.75)
    assert res["closed_form"]["score"] == pytest.approx(0.75)
    assert res["agreement"]["agree"]


def test_score_even_k(capsys):
    assert run_json(capsys, "score", "spin", "--K", "4", "--d", "9")["numeric"]["score"] == 0.5


def test_score_ho(capsys):
    res = run_json(capsys, "score", "ho", "--K", "3", "--nmax", "600")["numeric"]
    assert 0.70 < res["score"] < 0.71
    assert res["converged"] in (True, False) and res["convergence_overlap"] > 0.9
    assert res["basis"] == "fock"


def test_closed_form_out_of_range_exit_code(capsys):
    assert main(["score", "spin", "--K", "3", "--d", "40", "--method", "closed-form"]) == 2
    assert "--method numeric" in capsys.readouterr().err


def test_strict_non_convergence_exit_code(capsys):
    argv = ["score", "ho", "--K", "3", "--nmax", "30", "--overlap", "1.0", "--strict"]
    assert main(argv) == 3


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["score", "spin", "--K", "3"])
    assert exc.value.code == 2
    assert main(["classical", "--K", "3", "--density", "blob:1", "--seed", "1"]) == 2
    assert main(["sweep", "--K", "3", "--d", "x:y"]) == 2


@pytest.mark.parametrize("K,rng,expected", [
    (3, "4:40", [4] + list(range(6, 41))),
    (7, "8:40", [8, 10, 12] + list(range(14, 41))),
])
def test_sweep_violation_pattern(capsys, K, rng, expected):
    assert main(["sweep", "--K", str(K), "--d", rng]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == f"# K={K}"
    rows = read_csv(out)
    assert list(rows[0].keys()) == list(SWEEP_COLUMNS)
    assert [int(r["d"]) for r in rows] == list(range(int(rng.split(":")[0]), 41))
    assert [int(r["d"]) for r in rows if float(r["gap"]) > 0] == expected


def test_empty_sweep(capsys):
    assert main(["sweep", "--K", "3", "--d", "10:9"]) == 0
    assert read_csv(capsys.readouterr().out) == []


def test_bounds(capsys):
    res = run_json(capsys, "bounds", "--K", "3")
    assert round(res["classical"], 4) == 0.6667
    assert round(res["lower"], 4) == 0.7087
    assert round(res["upper"], 4) == 0.8226


def test_classical(capsys):
    res = run_json(capsys, "classical", "--K", "3", "--density", "sector:+0",
                   "--samples", "1000000", "--seed", "1")
    assert abs(res["estimate"] - 2 / 3) <= 3 * res["standard_error"]
    assert res["seed"] == 1


def test_simulate(capsys):
    res = run_json(capsys, "simulate", "--K", "3", "--d", "4", "--state", "optimal",
                   "--rounds", "1000000", "--seed", "7")
    assert abs(res["estimate"] - 0.75) <= 3 * res["standard_error"]
    assert res["gap_in_standard_errors"] > 5
    res = run_json(capsys, "simulate", "--K", "3", "--basis", "fock", "--nmax", "60",
                   "--rounds", "20000", "--seed", "2")
    assert res["exact"] > 2 / 3


def test_entanglement(capsys):
    res = run_json(capsys, "entanglement", "--K", "3", "--j1", "1/2", "--j2", "1")
    assert res["schmidt_rank"] == 2
    res = run_json(capsys, "entanglement", "--K", "3", "--ghz")
    assert res["score"] == pytest.approx(0.75) and res["ghz_overlap"] == pytest.approx(1.0)


def test_wigner_csv(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    argv = ["wigner", "--K", "3", "--nmax", "60", "--extent", "4", "--resolution", "11",
            "--output", "w.csv"]
    assert main(argv) == 0
    text = (tmp_path / "w.csv").read_text()
    header = [l for l in text.splitlines() if l.startswith("#")]
    assert header[:4] == ["# K=3", "# n_max=60", "# extent=4", "# resolution=11"]
    rows = read_csv(text)
    assert len(rows) == 121 and min(float(r["W"]) for r in rows) < 0.4


def test_byte_identical_outputs(tmp_path):
    for name in ("a.json", "b.json"):
        assert main(["classical", "--K", "5", "--density", "gaussian:1", "--samples", "50000",
                     "--seed", "3", "--output", str(tmp_path / name)]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    for name in ("a.csv", "b.csv"):
        assert main(["sweep", "--K", "5", "--d", "1:30", "--output", str(tmp_path / name)]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "precession", "bounds", "--K", "7"],
                         capture_output=True, text=True, check=True).stdout
    assert round(json.loads(out)["result"]["lower"], 4) == 0.6089
