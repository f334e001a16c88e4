import json
import subprocess
import sys

import numpy as np
import pytest

from sparse_rmt.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, bundled_specs, main, resolve_spec
from sparse_rmt.ensemble import Deformation, basis_vector
from sparse_rmt.formats import read_matrix, read_spectrum, write_deformation, write_matrix


@pytest.fixture
def matrix_file(tmp_path):
    path = tmp_path / "X.txt"
    assert main(["gen", "--n", "40", "--k", "8", "--law", "real_gaussian", "--seed", "3", "--out", str(path)]) == 0
    return path


class TestGen:
    def test_dense_rademacher(self, tmp_path):
        out = tmp_path / "g.txt"
        assert main(["gen", "--n", "4", "--k", "4", "--law", "rademacher", "--seed", "1", "--out", str(out)]) == 0
        m = read_matrix(out)
        assert m.shape == (4, 4) and np.count_nonzero(m) == 16

    def test_deterministic(self, tmp_path):
        args = ["gen", "--n", "5", "--k", "2", "--law", "complex_gaussian", "--seed", "9", "--out"]
        main(args + [str(tmp_path / "a")])
        main(args + [str(tmp_path / "b")])
        assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()

    def test_stdout(self, capsys):
        assert main(["gen", "--n", "2", "--k", "1", "--law", "uniform"]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "2 2"

    def test_k_above_n(self, capsys):
        assert main(["gen", "--n", "4", "--k", "10", "--law", "rademacher"]) == EXIT_USAGE
        assert "error" in capsys.readouterr().err

    def test_bad_law(self):
        assert main(["gen", "--n", "4", "--k", "2", "--law", "cauchy"]) == EXIT_USAGE


def test_eig_and_svd(matrix_file, tmp_path, capsys):
    assert main(["eig", "--matrix", str(matrix_file), "--out", str(tmp_path / "s.txt")]) == EXIT_OK
    vals = read_spectrum(tmp_path / "s.txt")
    x = read_matrix(matrix_file)
    assert np.isclose(vals.sum(), np.trace(x))
    assert main(["svd", "--matrix", str(matrix_file), "--xi", "2", "--out", str(tmp_path / "sv.txt")]) == EXIT_OK
    sv = np.loadtxt(tmp_path / "sv.txt")
    assert np.allclose(sv, np.linalg.svd(x - 2 * np.eye(40), compute_uv=False))


def test_outliers(tmp_path, capsys):
    x = np.diag(np.full(5, 0.1))
    write_matrix(tmp_path / "X.txt", x)
    write_deformation(tmp_path / "d.json", Deformation.rank_one(basis_vector(5, 0, 2.0), basis_vector(5, 0)))
    out = tmp_path / "r.json"
    code = main(["outliers", "--matrix", str(tmp_path / "X.txt"), "--defm", str(tmp_path / "d.json"),
                 "--eps", "0.25", "--overlap", "--out", str(out)])
    assert code == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["count_match"] and np.isclose(doc["hausdorff"], 0.1)
    assert np.isclose(doc["overlap"]["overlap_sq"], 1.0)


def test_outliers_size_mismatch(tmp_path, matrix_file):
    write_deformation(tmp_path / "d.json", Deformation.rank_one(basis_vector(5, 0, 2.0), basis_vector(5, 0)))
    assert main(["outliers", "--matrix", str(matrix_file), "--defm", str(tmp_path / "d.json")]) == EXIT_USAGE


def test_charpoly_matches_lu(matrix_file, tmp_path):
    out = tmp_path / "c.txt"
    assert main(["charpoly", "--matrix", str(matrix_file), "--order", "5", "--out", str(out)]) == EXIT_OK
    data = np.loadtxt(out)
    coeffs = data[:, 0] + 1j * data[:, 1]
    assert len(coeffs) == 6
    x = read_matrix(matrix_file)
    n = x.shape[0]
    w = np.exp(2j * np.pi * np.arange(n + 1) / (n + 1))
    lu = np.fft.fft([np.linalg.det(np.eye(n) - wk * x) for wk in w]) / (n + 1)
    assert np.allclose(coeffs, lu[:6], atol=1e-9)


def test_stieltjes(tmp_path, capsys):
    curve, support = tmp_path / "c.csv", tmp_path / "s.json"
    code = main(["stieltjes", "--xi2", "2", "--eta", "1e-3", "--curve", str(curve), "--support", str(support)])
    assert code == EXIT_OK
    printed = capsys.readouterr().out
    value = float(printed.split("im_m_over_eta=")[1].split()[0])
    assert abs(value - 1.0) <= 1e-2
    assert curve.read_text().startswith("eta,h,im_m_over_eta")
    assert json.loads(support.read_text())["c"] > 0.1


def test_stieltjes_domain():
    assert main(["stieltjes", "--xi2", "0.5"]) == EXIT_USAGE


class TestExperiment:
    def test_list(self, capsys):
        assert main(["list"]) == EXIT_OK
        names = capsys.readouterr().out.split()
        assert names == bundled_specs()
        assert {"overlap_alpha2", "stieltjes_curve", "spectral_radius"} <= set(names)

    def test_bundled_specs_load(self):
        for name in bundled_specs():
            resolve_spec(name).build_deformation()

    def test_overlap_spec_echoes_prediction(self, tmp_path):
        out = tmp_path / "ov"
        code = main(["experiment", "--spec", "overlap_alpha2", "--trials", "2", "--out", str(out)])
        assert code in (EXIT_OK, EXIT_FAIL)
        report = json.loads((out / "report.json").read_text())
        assert report["statistics"]["predicted"] == 0.75

    def test_stieltjes_curve_spec(self, tmp_path):
        out = tmp_path / "sc"
        assert main(["experiment", "--spec", "stieltjes_curve", "--out", str(out)]) == EXIT_OK
        rows = [r.split(",") for r in (out / "curve.csv").read_text().splitlines()[1:]]
        assert abs(float(rows[-1][2]) - 1.0) <= 1e-2

    def test_workers_do_not_change_records(self, tmp_path):
        args = ["experiment", "--spec", "spectral_radius", "--trials", "8", "--out"]
        main(args + [str(tmp_path / "a"), "--workers", "1"])
        main(args + [str(tmp_path / "b"), "--workers", "8"])
        assert (tmp_path / "a" / "records.jsonl").read_bytes() == (tmp_path / "b" / "records.jsonl").read_bytes()

    def test_unknown_spec(self):
        assert main(["experiment", "--spec", "no_such_spec"]) == EXIT_USAGE


def test_help_documents_formats():
    out = subprocess.run([sys.executable, "-m", "sparse_rmt.cli", "gen", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "'re im'" in out.stdout
    top = subprocess.run([sys.executable, "-m", "sparse_rmt.cli", "--help"], capture_output=True, text=True)
    assert "Exit codes" in top.stdout


def test_console_script():
    out = subprocess.run(["sparse-rmt", "list"], capture_output=True, text=True)
    assert out.returncode == 0 and "lambda_max" in out.stdout
