import math
import subprocess
import sys

import numpy as np
import pytest

from defzeros import __version__
from defzeros.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_version():
    out = subprocess.run([sys.executable, "-m", "defzeros.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert __version__ in out.stdout


def test_goe_det(capsys):
    code, out, _ = run(capsys, "goe-det", "--m", "1", "--trials", "2000", "--seed", "7")
    assert code == 0
    lines = dict(line.split(" ", 1) for line in out.strip().splitlines())
    assert float(lines["analytic"]) == pytest.approx(2 / math.sqrt(math.pi))
    assert abs(float(lines["mean"]) - float(lines["analytic"])) < 5 * float(lines["std_error"])


def test_expect_kac_rice(capsys):
    code, out, _ = run(capsys, "expect", "kac-rice", "--n", "2", "--d", "9", "--volume", repr(math.pi))
    assert code == 0
    assert out.splitlines()[0] == "value 3.0"


def test_expect_misc(capsys):
    assert run(capsys, "expect", "bezout", "--deg-gamma", "2", "--d", "7")[1].startswith("value 14")
    code, out, _ = run(capsys, "expect", "tail", "--t", "1", "--d", "4", "--n", "2", "--c-gamma", "1")
    assert out.splitlines() == ["value 0.5", "order upper bound"]
    code, out, _ = run(capsys, "expect", "ig", "--n", "2", "--k", "1", "--d", "4",
                       "--volume", repr(math.pi), "--ensemble", "bound")
    assert float(out.split()[1]) == pytest.approx(4.0)


def test_expect_requires_volume(capsys):
    with pytest.raises(SystemExit):
        main(["expect", "kac-rice", "--n", "2", "--d", "4"])


def test_domain_error_exit_code(capsys):
    code, _, err = run(capsys, "expect", "kac-rice", "--n", "4", "--d", "4", "--volume", "1")
    assert code == 2 and err.startswith("error:")


def test_pathology_build_and_verify(capsys, tmp_path):
    out_dir = tmp_path / "art"
    code, out, _ = run(capsys, "pathology", "build", "--targets", "3,5", "--stages", "4",
                       "--out", str(out_dir))
    assert code == 0
    assert "stage 4: degree 23, unverifiable by construction" in out
    for name in ("stages.txt", "curve.txt", "certificate.csv", "P_2.poly", "P_4.poly"):
        assert (out_dir / name).exists()
    code, out, _ = run(capsys, "pathology", "verify", str(out_dir))
    assert code == 0 and "mismatch" not in out
    # a corrupted polynomial file is reported
    text = (out_dir / "P_2.poly").read_text().splitlines()
    fields = text[1].split()
    fields[-1] = repr(float(fields[-1]) + 1.0)
    text[1] = " ".join(fields)
    (out_dir / "P_2.poly").write_text("\n".join(text) + "\n")
    code, out, _ = run(capsys, "pathology", "verify", str(out_dir))
    assert code == 1 and "mismatch: P_2.poly" in out


def test_pathology_bad_targets(capsys, tmp_path):
    code, _, err = run(capsys, "pathology", "build", "--targets", "0,4", "--stages", "4",
                       "--out", str(tmp_path))
    assert code == 2 and "error" in err


def test_experiment_run(capsys, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("kind=curve_zero_count\nn=2\nd=16\ntrials=50\nseed=2\n"
                   "gamma.family=circle\ngamma.radius=1\n")
    code, out, _ = run(capsys, "experiment", "run", str(cfg))
    assert code == 0 and out.startswith("mean ")
    assert (tmp_path / "trials.csv").exists() and (tmp_path / "summary.csv").exists()


def test_experiment_resolution_failure(capsys, tmp_path):
    t = np.linspace(0.0, 1.0, 50, endpoint=False)
    pts = np.column_stack([t, 0.5 * np.cos(2 * np.pi * t),
                           np.sin(2 * np.pi * t) + 0.3 * np.sin(4 * np.pi * t)])
    np.savetxt(tmp_path / "s.csv", pts, delimiter=",")
    cfg = tmp_path / "c.cfg"
    cfg.write_text("kind=curve_zero_count\nn=2\nd=60\ntrials=20\nseed=1\n"
                   "gamma.family=sampled\ngamma.file=s.csv\nresolution=0.01\n")
    code, _, err = run(capsys, "experiment", "run", str(cfg))
    assert code == 3 and "resolution" in err
