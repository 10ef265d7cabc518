import csv
import json

import numpy as np
import pytest
from conftest import REFERENCE_SIGMA

from mobiuseig.cli import main, parse_complex
from mobiuseig.pencil import write_l_diag
from mobiuseig.report import SpectrumReport
from mobiuseig.sparse_core import SparseMatrix, write_matrix_market
from mobiuseig.synth import read_spectrum, write_case


@pytest.fixture
def diag_files(tmp_path):
    write_matrix_market(SparseMatrix.from_dense(np.diag([2.0, 1.0])), tmp_path / "J.mtx")
    write_l_diag(np.array([1.0, 0.0]), tmp_path / "L.txt")
    return tmp_path / "J.mtx", tmp_path / "L.txt"


@pytest.fixture(scope="module")
def planted_files(tmp_path_factory, planted_case):
    d = tmp_path_factory.mktemp("planted")
    write_case(*planted_case, d / "p_")
    return d / "p_J.mtx", d / "p_L.txt", d / "p_spectrum.json"


@pytest.fixture(scope="module")
def planted_report(planted_files):
    J, L, _ = planted_files
    out = J.parent
    rc = main(["solve", "--matrix", str(J), "--ldiag", str(L), "--sigma", str(REFERENCE_SIGMA), "--p", "40",
               "--out-json", str(out / "r.json"), "--out-csv", str(out / "r.csv")])
    assert rc == 0
    return out / "r.json", out / "r.csv"


@pytest.mark.parametrize(
    "text, value",
    [("0.1814+4.8323i", 0.1814 + 4.8323j), ("4i", 4j), ("-i", -1j), ("2-i", 2 - 1j), ("3", 3), ("1e-3-2.5j", 1e-3 - 2.5j)],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_parse_complex_rejects_garbage():
    with pytest.raises(Exception):
        parse_complex("two")


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestSolve:
    def test_diag_single_row(self, diag_files, tmp_path):
        J, L = diag_files
        rc = main(["solve", "--matrix", str(J), "--ldiag", str(L), "--sigma", "1", "--r", "1", "--s", "1",
                   "--shifts", "0.25+0.25i", "--out-json", str(tmp_path / "r.json"), "--out-csv", str(tmp_path / "r.csv")])
        assert rc == 0
        rows = read_csv(tmp_path / "r.csv")
        assert len(rows) == 1
        assert float(rows[0]["converged_value_re"]) == pytest.approx(2, abs=1e-12)
        assert float(rows[0]["converged_value_im"]) == pytest.approx(0, abs=1e-12)
        assert list(rows[0]) == ["converged_value_re", "converged_value_im", "iter", "lu", "residual_order", "status"]

    def test_planted_rows(self, planted_report):
        rows = read_csv(planted_report[1])
        vals = [complex(float(r["converged_value_re"]), float(r["converged_value_im"])) for r in rows]
        for target in (0.1814 + 4.8323j, 0.1814 - 4.8323j):
            assert min(abs(v - target) for v in vals) <= 1e-6 * (1 + abs(target))

    def test_csv_rows_match_json_records(self, planted_report):
        report = SpectrumReport.read_json(planted_report[0])
        assert len(read_csv(planted_report[1])) == len(report.records)

    def test_json_round_trip_is_lossless(self, planted_report):
        text = planted_report[0].read_text()
        report = SpectrumReport.from_json(text)
        assert report.to_json() == text
        assert report.sigma == REFERENCE_SIGMA and report.algorithm == "one"

    def test_missing_l_file(self, diag_files, tmp_path, capsys):
        J, _ = diag_files
        missing = tmp_path / "nowhere" / "L.txt"
        rc = main(["solve", "--matrix", str(J), "--ldiag", str(missing), "--sigma", "1"])
        assert rc == 2
        assert str(missing) in capsys.readouterr().err

    def test_malformed_matrix(self, tmp_path, capsys):
        (tmp_path / "J.mtx").write_text("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 x\n")
        (tmp_path / "L.txt").write_text("1 1\n")
        rc = main(["solve", "--matrix", str(tmp_path / "J.mtx"), "--ldiag", str(tmp_path / "L.txt"), "--sigma", "1"])
        assert rc == 2
        assert "line 3" in capsys.readouterr().err

    def test_sigma_required(self, diag_files):
        J, L = diag_files
        assert main(["solve", "--matrix", str(J), "--ldiag", str(L)]) == 2

    def test_bad_sigma(self, diag_files, tmp_path):
        J, L = diag_files
        rc = main(["solve", "--matrix", str(J), "--ldiag", str(L), "--sigma", "-1", "--r", "1",
                   "--out-json", str(tmp_path / "r.json"), "--out-csv", str(tmp_path / "r.csv")])
        assert rc == 2

    def test_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["solve", "--algorithm", "three"])
        assert exc.value.code == 2

    def test_no_convergence_exit_code(self, planted_files, tmp_path):
        J, L, _ = planted_files
        rc = main(["solve", "--matrix", str(J), "--ldiag", str(L), "--sigma", "4.8334", "--s", "1",
                   "--max-iter", "1",
                   "--out-json", str(tmp_path / "r.json"), "--out-csv", str(tmp_path / "r.csv")])
        assert rc == 3
        assert read_csv(tmp_path / "r.csv")[0]["status"] == "stagnated"

    def test_subspace(self, planted_files, tmp_path):
        J, L, spec = planted_files
        rc = main(["solve", "--matrix", str(J), "--ldiag", str(L), "--algorithm", "subspace", "--shift-a", "4i",
                   "--out-json", str(tmp_path / "s.json"), "--out-csv", str(tmp_path / "s.csv")])
        assert rc == 0
        report = SpectrumReport.read_json(tmp_path / "s.json")
        assert report.shift_a == 4j and report.sigma is None
        truth = read_spectrum(spec)
        target = truth[np.argmin(np.abs(truth - 4j))]
        assert any(abs(r.lam - target) <= 1e-6 * (1 + abs(target)) for r in report.converged)

    def test_algorithm_two(self, planted_files, tmp_path):
        J, L, _ = planted_files
        rc = main(["solve", "--matrix", str(J), "--ldiag", str(L), "--algorithm", "two", "--sigma", "4.8334",
                   "--p", "40", "--out-json", str(tmp_path / "t.json"), "--out-csv", str(tmp_path / "t.csv")])
        assert rc == 0
        report = SpectrumReport.read_json(tmp_path / "t.json")
        assert any(r.xi is not None for r in report.records)


class TestGenerate:
    def test_minimal(self, tmp_path):
        prefix = str(tmp_path / "g_")
        assert main(["generate", "--states", "1", "--algebraic", "1", "--plant", "2", "--out-prefix", prefix]) == 0
        lines = (tmp_path / "g_J.mtx").read_text().splitlines()
        assert lines[1].split()[:2] == ["2", "2"]
        assert read_spectrum(tmp_path / "g_spectrum.json").tolist() == [2]
        assert len((tmp_path / "g_L.txt").read_text().split()) == 2

    def test_same_seed_same_files(self, tmp_path):
        for tag in ("a", "b"):
            main(["generate", "--states", "10", "--algebraic", "5", "--seed", "4", "--out-prefix", str(tmp_path / tag)])
        for suffix in ("J.mtx", "L.txt", "spectrum.json"):
            assert (tmp_path / f"a{suffix}").read_bytes() == (tmp_path / f"b{suffix}").read_bytes()

    def test_conjugate_completion(self, tmp_path):
        main(["generate", "--states", "6", "--algebraic", "3", "--plant", "0.1814+4.8323i",
              "--out-prefix", str(tmp_path / "c_")])
        data = json.loads((tmp_path / "c_spectrum.json").read_text())
        assert [0.1814, 4.8323] in data and [0.1814, -4.8323] in data

    def test_infeasible_density(self, tmp_path):
        assert main(["generate", "--density", "0.001", "--out-prefix", str(tmp_path / "x_")]) == 2


class TestCheck:
    def test_all_pass(self, planted_files, planted_report, capsys):
        J, L, spec = planted_files
        rc = main(["check", "--matrix", str(J), "--ldiag", str(L), "--report", str(planted_report[0]),
                   "--spectrum", str(spec)])
        out = capsys.readouterr().out
        assert rc == 0
        assert "FAIL" not in out and out.count("PASS") >= 4

    def test_perturbed_value_fails(self, planted_files, planted_report, tmp_path, capsys):
        J, L, spec = planted_files
        data = json.loads(planted_report[0].read_text())
        data["records"][0]["lam"][0] += 1e-2
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(data))
        rc = main(["check", "--matrix", str(J), "--ldiag", str(L), "--report", str(bad)])
        lines = capsys.readouterr().out.splitlines()
        assert rc == 1
        assert lines[0].startswith("FAIL record 0")
        assert all(line.startswith("PASS") for line in lines[1:-1])

    def test_without_spectrum(self, planted_files, planted_report, capsys):
        J, L, _ = planted_files
        rc = main(["check", "--matrix", str(J), "--ldiag", str(L), "--report", str(planted_report[0])])
        out = capsys.readouterr().out
        assert rc == 0 and "dist_to_true" not in out

    def test_missing_report(self, planted_files, tmp_path, capsys):
        J, L, _ = planted_files
        rc = main(["check", "--matrix", str(J), "--ldiag", str(L), "--report", str(tmp_path / "none.json")])
        assert rc == 2 and "none.json" in capsys.readouterr().err
