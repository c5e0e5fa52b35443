import json
import subprocess
import sys

import numpy as np
import pytest

from brownreg import write_matrix
from brownreg.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_sample_spectrum(tmp_path, capsys):
    code, out, _ = run(capsys, "sample-spectrum", "--n", "20", "--t", "0.01", "--model", "nilpotent_shift",
                       "--trials", "2", "--out", str(tmp_path))
    assert code == 0
    assert json.loads(out)["trials"] == 2
    lines = (tmp_path / "spectrum.csv").read_text().splitlines()
    assert lines[0] == "trial,index,re,im" and len(lines) == 41


def test_singular_values_kind(tmp_path, capsys):
    code, _, _ = run(capsys, "sample-spectrum", "--n", "5", "--kind", "singular_values", "--out", str(tmp_path))
    assert code == 0
    ims = [float(r.split(",")[3]) for r in (tmp_path / "spectrum.csv").read_text().splitlines()[1:]]
    assert ims == [0.0] * 5


def test_fk_det_json(capsys):
    code, out, _ = run(capsys, "fk-det", "--n", "10", "--trials", "5", "--seed", "3")
    assert code == 0
    assert set(json.loads(out)) == {"n", "trials", "mean", "stderr", "seed"}


def test_fk_det_matrix(tmp_path, capsys):
    write_matrix(tmp_path / "a.txt", np.diag([1, 4]))
    code, out, _ = run(capsys, "fk-det", "--matrix", str(tmp_path / "a.txt"))
    assert code == 0 and json.loads(out)["fk_det"] == pytest.approx(2)


def test_field_and_density(tmp_path, capsys):
    assert run(capsys, "field", "--n", "10", "--nodes", "11", "--out", str(tmp_path))[0] == 0
    assert (tmp_path / "field.csv").read_text().startswith("re,im,L,clamped\n")
    code, out, _ = run(capsys, "density", "--n", "10", "--nodes", "31", "--half-width", "1.6",
                       "--out", str(tmp_path))
    assert code == 0 and (tmp_path / "density.csv").read_text().startswith("re,im,density\n")
    assert json.loads(out)["mass_in_grid"] == pytest.approx(1, abs=0.1)


def test_sv_flow(tmp_path, capsys):
    code, out, _ = run(capsys, "sv-flow", "--initial", "2,1", "--t", "0.05", "--out", str(tmp_path))
    assert code == 0 and len(json.loads(out)["final"]) == 2
    assert (tmp_path / "trajectory.csv").read_text().startswith("time,lambda_1,lambda_2\n")


def test_compare_flow(tmp_path, capsys):
    code, out, _ = run(capsys, "compare-flow", "--s1", "1,0.5", "--s2", "2,1", "--t", "0.1",
                       "--out", str(tmp_path))
    assert code == 0 and json.loads(out)["preserved"] is True
    verdict = json.loads((tmp_path / "verdict.json").read_text())
    assert set(verdict) == {"preserved", "steps", "min_gap"}
    assert (tmp_path / "trajectory_1.csv").exists() and (tmp_path / "trajectory_2.csv").exists()


def test_run_with_config_and_overrides(tmp_path, capsys):
    conf = tmp_path / "exp.conf"
    conf.write_text("ensemble.model = nilpotent_shift\nn_list = 10, 20\nschedule.kind = fixed\n"
                    "schedule.t = 0.01\ntarget.model = haar_unitary\ntrials = 1\n")
    code, _, _ = run(capsys, "run", "--config", str(conf), "--trials", "2", "--seed", "7",
                     "--out", str(tmp_path / "r"))
    assert code == 0
    doc = json.loads((tmp_path / "r" / "report.json").read_text())
    assert doc["config"]["trials"] == 2 and doc["config"]["root_seed"] == 7
    assert len(doc["cells"]) == 4


def test_sweep(tmp_path, capsys):
    code, out, _ = run(capsys, "sweep-t", "--n", "20", "--t-list", "1e-3,1e-1", "--trials", "2",
                       "--out", str(tmp_path))
    assert code == 0 and len(json.loads(out)["rows"]) == 2
    assert (tmp_path / "sweep.csv").exists()


@pytest.mark.parametrize("argv", [
    ["run"],
    ["sample-spectrum", "--n", "0"],
    ["sweep-t", "--t-list", "0.1,0.01"],
    ["sv-flow", "--initial", "a,b"],
    ["fk-det", "--seed", "-1"],
    ["nonsense"],
])
def test_config_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as info:
        code = main(argv)
        raise SystemExit(code)
    assert info.value.code == 2


def test_bad_config_file_exit_2(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("ensemble.model = ginibre\nnonsense = 1\n")
    code, _, err = run(capsys, "run", "--config", str(conf))
    assert code == 2 and "bad.conf:2" in err


def test_numeric_failure_exit_3(capsys):
    code, _, err = run(capsys, "sv-flow", "--initial", "2,-1", "--t", "0.1")
    assert code == 3 and "numeric failure" in err


def test_io_errors_exit_4(tmp_path, capsys):
    assert run(capsys, "run", "--config", str(tmp_path / "missing.conf"))[0] == 4
    p = tmp_path / "m.txt"
    p.write_text("2\n1 0 0 0\n0 0 1 x\n")
    code, _, err = run(capsys, "fk-det", "--matrix", str(p))
    assert code == 4 and "m.txt:3:4" in err


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "brownreg.cli", "fk-det", "--n", "3", "--trials", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["n"] == 3
