import json

import numpy as np
import pytest

from gapmeasures.cli import main
from gapmeasures.fileio import read_batch, read_matrix, write_matrix
from gapmeasures.spectral import DensityOperator, maximally_mixed


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def files(tmp_path):
    rho = tmp_path / "rho.json"
    assert run("density", "--preset", "thermal-qho", "--dim", 4, "--beta", 1, "--out", rho, "--quiet") == 0
    sigma = tmp_path / "sigma.json"
    assert run("density", "--preset", "maximally-mixed", "--dim", 4, "--out", sigma, "--quiet") == 0
    return tmp_path, rho, sigma


class TestDensity:
    def test_maximally_mixed(self, tmp_path):
        out = tmp_path / "m.json"
        assert run("density", "--preset", "maximally-mixed", "--dim", 4, "--out", out, "--quiet") == 0
        assert np.array_equal(read_matrix(out), np.eye(4) / 4)

    def test_thermal_from_hamiltonian(self, tmp_path):
        h = tmp_path / "h.json"
        write_matrix(h, np.diag([0.0, np.log(2)]))
        out = tmp_path / "rho.json"
        assert run("density", "--hamiltonian", h, "--beta", 1, "--out", out, "--quiet") == 0
        p = DensityOperator.from_matrix(read_matrix(out)).eigenvalues
        np.testing.assert_allclose(p, [2 / 3, 1 / 3], rtol=1e-14)

    def test_round_trip_bytes(self, files):
        tmp, rho, _ = files
        again = tmp / "again.json"
        assert run("density", "--rho", rho, "--out", again, "--quiet") == 0
        assert again.read_bytes() == rho.read_bytes()

    def test_pure_preset(self, tmp_path):
        out = tmp_path / "p.json"
        assert run("density", "--preset", "pure", "--dim", 3, "--out", out, "--quiet") == 0
        assert read_matrix(out)[0, 0] == 1.0

    def test_stdout(self, capsys):
        assert run("density", "--preset", "maximally-mixed", "--dim", 2, "--quiet") == 0
        assert json.loads(capsys.readouterr().out)["dim"] == 2

    @pytest.mark.parametrize("argv", [
        ("density",),
        ("density", "--preset", "pure"),
        ("density", "--preset", "thermal-qho", "--dim", 3),
    ])
    def test_usage_errors(self, argv):
        assert run(*argv, "--quiet") == 2

    def test_bad_dim_is_usage(self):
        with pytest.raises(SystemExit) as exc:
            run("density", "--preset", "pure", "--dim", 0)
        assert exc.value.code == 2

    def test_numeric_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        write_matrix(bad, np.diag([1.5, -0.5]))
        assert run("density", "--rho", bad, "--quiet") == 3

    def test_missing_file(self, tmp_path):
        assert run("density", "--rho", tmp_path / "nope.json", "--quiet") == 2


class TestSample:
    def test_rerun_identical(self, files):
        tmp, rho, _ = files
        a, b = tmp / "a.csv", tmp / "b.csv"
        for out in (a, b):
            assert run("sample", "--rho", rho, "--n", 10, "--seed", 5, "--out", out, "--quiet") == 0
        assert a.read_bytes() == b.read_bytes()
        assert read_batch(a).measure == "GAP"

    def test_g_on_pure_state(self, tmp_path):
        rho = tmp_path / "pure.json"
        run("density", "--preset", "pure", "--dim", 3, "--out", rho, "--quiet")
        out = tmp_path / "g.csv"
        assert run("sample", "--rho", rho, "--measure", "G", "--n", 50, "--out", out, "--quiet") == 0
        v = read_batch(out).vectors
        assert np.max(np.abs(v[:, 1:])) < 1e-12

    def test_weighted_header(self, files):
        tmp, rho, _ = files
        out = tmp / "w.csv"
        assert run("sample", "--rho", rho, "--measure", "GAP-reweight", "--n", 5, "--out", out, "--quiet") == 0
        header = json.loads(out.read_text().splitlines()[0])
        assert header["measure"] == "GA-weighted"
        assert read_batch(out).weights.shape == (5,)

    def test_bad_measure(self, files):
        with pytest.raises(SystemExit):
            run("sample", "--rho", files[1], "--measure", "nope")


class TestEstimate:
    def test_basis_batch(self, tmp_path):
        batch = tmp_path / "basis.csv"
        rows = "\n".join(",".join("1,0" if j == i else "0,0" for j in range(3)) for i in range(3))
        batch.write_text('{"dim": 3, "n": 3, "measure": "GAP", "seed": null}\n' + rows + "\n")
        ref = tmp_path / "mm.json"
        write_matrix(ref, maximally_mixed(3).matrix)
        out = tmp_path / "r.json"
        assert run("estimate", batch, "--ref", ref, "--out", out, "--quiet") == 0
        assert json.loads(out.read_text())["trace_distance"] == 0.0

    def test_gap_batch(self, files):
        tmp, rho, _ = files
        batch, out = tmp / "b.csv", tmp / "r.json"
        run("sample", "--rho", rho, "--n", 200_000, "--out", batch, "--quiet")
        assert run("estimate", batch, "--ref", rho, "--out", out, "--quiet") == 0
        report = json.loads(out.read_text())
        assert report["trace_distance"] < 0.02
        again = tmp / "r2.json"
        run("estimate", batch, "--ref", rho, "--out", again, "--quiet")
        assert again.read_bytes() == out.read_bytes()

    def test_g_batch(self, files):
        tmp, rho, _ = files
        batch, out = tmp / "g.csv", tmp / "r.json"
        run("sample", "--rho", rho, "--measure", "G", "--n", 100_000, "--out", batch, "--quiet")
        assert run("estimate", batch, "--out", out, "--quiet") == 0
        report = json.loads(out.read_text())
        assert report["cov_hat"] is not None
        assert report["mean_norm"] < 5 * report["se_scale"]

    def test_dim_mismatch(self, files, tmp_path):
        tmp, rho, _ = files
        batch = tmp / "b.csv"
        run("sample", "--rho", rho, "--n", 3, "--out", batch, "--quiet")
        small = tmp / "small.json"
        write_matrix(small, np.eye(2) / 2)
        assert run("estimate", batch, "--ref", small, "--quiet") == 2

    def test_malformed_batch(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("garbage\n")
        assert run("estimate", bad, "--quiet") == 2


class TestCharfn:
    def test_within_bound_and_deterministic(self, files):
        tmp, rho, _ = files
        a, b = tmp / "a.json", tmp / "b.json"
        for out in (a, b):
            assert run("charfn", "--rho", rho, "--n", 100_000, "--out", out, "--quiet") == 0
        assert a.read_bytes() == b.read_bytes()
        report = json.loads(a.read_text())
        assert len(report["points"]) == 20
        assert report["max_error"] < report["threshold"]


class TestContinuity:
    def test_json_and_csv(self, files):
        tmp, rho, sigma = files
        out, csv = tmp / "c.json", tmp / "c.csv"
        args = ("continuity", "--rho", rho, "--sigma", sigma, "--n", 2000, "--quiet")
        assert run(*args, "--out", out) == 0
        assert run(*args, "--csv", "--out", csv) == 0
        report = json.loads(out.read_text())
        full = report["full_trace_distance"]
        for rec in report["records"]:
            assert abs(rec["trace_distance"] - full / rec["n"]) < 1e-10
        assert csv.read_text().startswith("n,trace_distance")
        again = tmp / "c2.json"
        run(*args, "--out", again)
        assert again.read_bytes() == out.read_bytes()

    def test_dim_mismatch(self, files, tmp_path):
        tmp, rho, _ = files
        small = tmp / "small.json"
        write_matrix(small, np.eye(2) / 2)
        assert run("continuity", "--rho", rho, "--sigma", small, "--quiet") == 2

    def test_same_state(self, files):
        _, rho, _ = files
        assert run("continuity", "--rho", rho, "--sigma", rho, "--quiet") == 2


class TestVerify:
    def test_counterexample_suite(self, tmp_path):
        out = tmp_path / "v.json"
        assert run("verify", "--suite", "counterexample", "--out", out, "--quiet") == 0
        report = json.loads(out.read_text())
        assert report["passed"] is True
        crit = report["criteria"][0]
        assert crit["number"] == 7

    def test_only_selected(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            assert run("verify", "--only", "1,5,7", "--out", out, "--quiet") == 0
        assert a.read_bytes() == b.read_bytes()
        assert [c["number"] for c in json.loads(a.read_text())["criteria"]] == [1, 5, 7]

    def test_bad_criterion(self):
        assert run("verify", "--only", "11", "--quiet") == 2

    def test_prints_lines(self, capsys):
        assert run("verify", "--only", "6,7") == 0
        out = capsys.readouterr().out
        assert out.count("[PASS]") == 2

    def test_help_states_defaults(self, capsys):
        with pytest.raises(SystemExit):
            run("--help")
        text = capsys.readouterr().out
        assert "seed 42" in text and "cutoff" in text
