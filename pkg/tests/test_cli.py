import json
import os
import subprocess
import sys

import pytest

from voalab.cli import run
from voalab.models import load_voa

DATA = os.path.join(os.path.dirname(__file__), "data")


def data(name):
    return os.path.join(DATA, name)


def cli(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_build_emits_a_loadable_model(capsys, tmp_path):
    code, out, _ = cli(capsys, "build", "--model", "ising", "--cutoff", "3")
    assert code == 0
    assert load_voa(out).cutoff == 3
    target = tmp_path / "m.json"
    assert cli(capsys, "build", "--model", "heisenberg", "--cutoff", "2", "--output", str(target))[0] == 0
    assert json.loads(target.read_text())["cutoff"] == "2"


def test_check_passes_and_reads_files(capsys):
    code, out, _ = cli(capsys, "check", "--model", "heisenberg", "--cutoff", "3", "--budget", "3")
    assert code == 0 and out.splitlines()[-1].startswith("PASS")
    code, out, _ = cli(capsys, "check", "--input", data("ising4.json"), "--budget", "3", "--samples", "20")
    assert code == 0


def test_corrupted_model_file_fails_with_descriptors(capsys):
    code, out, _ = cli(capsys, "check", "--input", data("ising4_broken.json"), "--budget", "4", "--samples", "20",
                       "--format", "json")
    assert code == 1
    doc = json.loads(out)
    failing = [e["instance"] for e in doc["instances"] if not e["residual_zero"]]
    assert failing
    code, out, _ = cli(capsys, "check", "--input", data("ising4_broken.json"), "--budget", "4", "--samples", "20",
                       "--replay", failing[0])
    assert code == 1 and failing[0] in out


def test_replay_of_passing_instance(capsys):
    args = ["check", "--model", "heisenberg", "--cutoff", "2", "--budget", "2"]
    code, out, _ = cli(capsys, *args, "--format", "json")
    first = json.loads(out)["instances"][0]["instance"]
    code, out, _ = cli(capsys, *args, "--replay", first)
    assert code == 0 and first in out


@pytest.mark.parametrize("argv", [
    ["check", "--model", "nope"],
    ["check"],
    ["check", "--model", "heisenberg", "--cutoff", "-1"],
    ["check", "--model", "heisenberg", "--cutoff", "2", "--replay", "no-such-instance"],
    ["check", "--input", "/nonexistent/file.json"],
    ["diagram", "--input", data("diagram_bad_shape.json")],
    ["diagram"],
    ["algebra"],
    ["intertwiner", "--input", data("ut2_algebra.json")],
    ["c2dim", "--model", "ising", "--module", "F(1)"],
])
def test_usage_and_input_errors_exit_2(capsys, argv):
    assert cli(capsys, *argv)[0] == 2


def test_c2dim(capsys):
    code, out, _ = cli(capsys, "c2dim", "--model", "minimal:2,5", "--cutoffs", "6,7,8", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["meta"]["dims"] == {"6": 2, "7": 2, "8": 2} and doc["meta"]["stabilized"]


def test_zhu(capsys):
    code, out, _ = cli(capsys, "zhu", "--model", "ising", "--modules", "h=0,h=1/16,h=1/2", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["meta"]["dimension"] == 3 and doc["meta"]["radical_dimension"] == 0


@pytest.mark.parametrize("example", ["jordan", "fock", "vertex"])
def test_intertwiner(capsys, example):
    code, out, _ = cli(capsys, "intertwiner", "--example", example, "--samples", "40")
    assert code == 0 and "round-trip=1" in out and "0 failing" in out


def test_ext(capsys):
    code, out, _ = cli(capsys, "ext", "--instance", "toy", "--samples", "60")
    assert code == 0
    assert "order 1 (bound N+1 = 1)" in out


@pytest.mark.parametrize("builtin,radical,projectives", [
    ("x2", 1, [2]), ("x3", 2, [3]), ("qxq", 0, [1, 1]), ("ut2", 1, [1, 2]), ("m2", 0, [2, 2])])
def test_algebra_builtins(capsys, builtin, radical, projectives):
    code, out, _ = cli(capsys, "algebra", "--builtin", builtin, "--format", "json")
    meta = json.loads(out)["meta"]
    assert code == 0 and meta["radical_dimension"] == radical and meta["projective_dimensions"] == projectives


def test_algebra_from_file(capsys):
    assert cli(capsys, "algebra", "--input", data("ut2_algebra.json"))[0] == 0


def test_diagrams(capsys):
    assert cli(capsys, "diagram", "--input", data("diagram_good.json"))[0] == 0
    code, out, _ = cli(capsys, "diagram", "--input", data("diagram_broken.json"))
    assert code == 1 and "im-not-in-ker" in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "voalab", "algebra", "--builtin", "x2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.strip().endswith("0 skipped")
