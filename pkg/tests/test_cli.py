"""Tests for the command-line experiment runner."""

import json
import math

import numpy as np
import pytest

import qchangepoint.cli as cli
from qchangepoint.exceptions import SpectralFailureError
from qchangepoint.online import basic_local_closed_form

SWEEP_GOLDEN = (
    "n,c2,lower_bound,srm,fixed_point_opt,upper_bound,asymptotic,"
    "basic_local,greedy_estimate,greedy_stderr\n"
    "2,0.36,0.9,0.9,0.9,0.9,0.795042557927,,,\n"
)

SPECTRUM_GOLDEN = (
    "table,l,theta_l,lambda_l,k,sqrtg_kk,gamma,deviation_numeric,deviation_asymptotic\n"
    "eigen,1,0.722734247813,1.5,,,,,\n"
    "eigen,2,1.82347658194,0.5,,,,,\n"
    "diag,,,,1,0.965925826289,0.929402881076,0.0365229452133,0.0332451900335\n"
    "diag,,,,2,0.965925826289,0.929402881076,0.0365229452133,0.00293848741431\n"
)

MONTECARLO_GOLDEN = (
    "strategy,n,c2,trials,estimate,std_error,base_seed\n"
    "basic,5,0.5,1000,0.607,0.0154450963092,3\n"
)


class TestGoldenOutputs:
    def test_sweep_golden_file(self, tmp_path):
        out = tmp_path / "sweep.csv"
        assert cli.main(["sweep", "--n", "2", "--c2", "0.36", "--out", str(out)]) == 0
        assert out.read_bytes().decode("utf-8") == SWEEP_GOLDEN

    def test_spectrum_golden_file(self, tmp_path):
        out = tmp_path / "spectrum.csv"
        assert cli.main(["spectrum", "--n", "2", "--c2", "0.25", "--out", str(out)]) == 0
        assert out.read_bytes().decode("utf-8") == SPECTRUM_GOLDEN

    def test_montecarlo_golden_file(self, tmp_path):
        out = tmp_path / "mc.csv"
        argv = ["montecarlo", "--strategy", "basic", "--n", "5", "--c2", "0.5",
                "--trials", "1000", "--seed", "3", "--out", str(out)]
        assert cli.main(argv) == 0
        assert out.read_bytes().decode("utf-8") == MONTECARLO_GOLDEN

    def test_stdout_when_no_out(self, capsys):
        assert cli.main(["sweep", "--n", "2", "--c2", "0.36"]) == 0
        assert capsys.readouterr().out == SWEEP_GOLDEN


class TestSpectrumCommand:
    def test_two_state_diagonal_symmetry(self, tmp_path):
        # mirror symmetry of the Toeplitz square root makes both deviations equal
        out = tmp_path / "s.csv"
        cli.main(["spectrum", "--n", "2", "--c2", "0.7", "--out", str(out)])
        rows = out.read_text().strip().split("\n")[1:]
        diag = [r.split(",") for r in rows if r.startswith("diag")]
        assert diag[0][5] == diag[1][5]

    def test_orthogonal_case(self, tmp_path):
        out = tmp_path / "s.csv"
        cli.main(["spectrum", "--n", "4", "--c2", "0", "--out", str(out)])
        for row in out.read_text().strip().split("\n")[1:]:
            cells = row.split(",")
            if cells[0] == "diag":
                assert cells[6] == "1"                  # gamma
                assert abs(float(cells[7])) < 1e-14     # numeric deviation
                assert float(cells[8]) == 0.0           # asymptotic deviation

    def test_diagonal_decay_dump_at_n30(self, tmp_path):
        # the numeric and closed-form deviation columns agree within 15%
        # for k = 3..10 at this overlap
        out = tmp_path / "s.csv"
        cli.main(["spectrum", "--n", "30", "--c2", "0.25", "--kmax", "15", "--out", str(out)])
        rows = [r.split(",") for r in out.read_text().strip().split("\n")[1:]]
        diag = {int(r[4]): (float(r[7]), float(r[8])) for r in rows if r[0] == "diag"}
        assert len(diag) == 15
        for k in range(3, 11):
            numeric, closed = diag[k]
            assert abs(numeric - closed) / abs(numeric) < 0.15

    def test_requires_single_point(self):
        assert cli.main(["spectrum", "--n", "4,5", "--c2", "0.5"]) == 2
        assert cli.main(["spectrum", "--n", "4", "--c2", "0.2,0.5"]) == 2

    def test_kmax_validation(self):
        assert cli.main(["spectrum", "--n", "4", "--c2", "0.5", "--kmax", "9"]) == 2


class TestConfigHandling:
    def test_config_file_with_flag_override(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("# demo sweep\nn = 2\nc2 = 0.5\nformat = csv\n")
        assert cli.main(["sweep", "--config", str(cfg), "--c2", "0.36"]) == 0
        assert capsys.readouterr().out == SWEEP_GOLDEN

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("n = 2\nc2 = 0.5\nbogus = 1\n")
        assert cli.main(["sweep", "--config", str(cfg)]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_malformed_line_rejected(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("n 2\n")
        assert cli.main(["sweep", "--config", str(cfg)]) == 2

    def test_missing_config_file(self):
        assert cli.main(["sweep", "--config", "/nonexistent/exp.cfg"]) == 2

    def test_c2_range_form(self, capsys):
        assert cli.main([
            "sweep", "--n", "2", "--config", "/dev/null",
        ]) == 2  # no c2 at all
        capsys.readouterr()
        cfg_args = ["sweep", "--n", "2"]
        assert cli.main(cfg_args + ["--c2", "0.2,0.4"]) == 0
        out = capsys.readouterr().out
        assert out.count("\n") == 3

    def test_c2_range_keys(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("n = 2\nc2_start = 0.1\nc2_stop = 0.3\nc2_count = 3\n")
        assert cli.main(["sweep", "--config", str(cfg)]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert [line.split(",")[1] for line in lines[1:]] == ["0.1", "0.2", "0.3"]

    def test_conflicting_c2_forms(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("n = 2\nc2 = 0.5\nc2_start = 0.1\nc2_stop = 0.3\nc2_count = 3\n")
        assert cli.main(["sweep", "--config", str(cfg)]) == 2

    @pytest.mark.parametrize("argv", [
        ["sweep", "--c2", "0.5"],                       # empty n grid
        ["sweep", "--n", "2", "--c2", ""],              # empty c2 grid
        ["sweep", "--n", "2", "--c2", "1.0"],           # c2 out of range
        ["sweep", "--n", "0", "--c2", "0.5"],           # n out of range
        ["sweep", "--n", "2", "--c2", "0.5", "--trials", "-1"],
        ["sweep", "--n", "2", "--c2", "0.5", "--seed", "-1"],
        ["sweep", "--n", "2", "--c2", "0.5", "--threads", "0"],
        ["montecarlo", "--strategy", "basic", "--n", "2", "--c2", "0.5", "--trials", "0"],
        ["montecarlo", "--n", "2", "--c2", "0.5"],      # missing strategy
    ])
    def test_invalid_configs_exit_2(self, argv):
        assert cli.main(argv) == 2


class TestSpectralFailureExit:
    def test_sweep_exit_3_and_no_partial_file(self, tmp_path, monkeypatch):
        def boom(n, c, tol, max_iter):
            raise SpectralFailureError("injected failure")

        monkeypatch.setattr(cli, "collective_summary", boom)
        out = tmp_path / "sweep.csv"
        rc = cli.main(["sweep", "--n", "5", "--c2", "0.5", "--out", str(out)])
        assert rc == 3
        assert not out.exists()
        assert not list(tmp_path.iterdir())

    def test_failure_message_identifies_grid_point(self, tmp_path, monkeypatch, capsys):
        def boom(n, c, tol, max_iter):
            raise SpectralFailureError("injected failure")

        monkeypatch.setattr(cli, "collective_summary", boom)
        cli.main(["sweep", "--n", "7", "--c2", "0.35"])
        err = capsys.readouterr().err
        assert "n=7" in err and "c2=0.35" in err


class TestDeterminism:
    def test_montecarlo_rerun_byte_identical(self, tmp_path):
        argv = ["montecarlo", "--strategy", "greedy", "--n", "4,6", "--c2",
                "0.3,0.6", "--trials", "2000", "--seed", "11"]
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        assert cli.main(argv + ["--out", str(out_a), "--threads", "1"]) == 0
        assert cli.main(argv + ["--out", str(out_b), "--threads", "3"]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_records_dump_byte_identical_and_consistent(self, tmp_path):
        argv = ["montecarlo", "--strategy", "basic", "--n", "6", "--c2", "0.4",
                "--trials", "400", "--seed", "21"]
        rows_a, rec_a = tmp_path / "a.csv", tmp_path / "a.jsonl"
        rows_b, rec_b = tmp_path / "b.csv", tmp_path / "b.jsonl"
        assert cli.main(argv + ["--out", str(rows_a), "--records", str(rec_a)]) == 0
        assert cli.main(argv + ["--out", str(rows_b), "--records", str(rec_b),
                                "--threads", "2"]) == 0
        assert rec_a.read_bytes() == rec_b.read_bytes()
        assert rows_a.read_bytes() == rows_b.read_bytes()
        records = [json.loads(line) for line in rec_a.read_text().splitlines()]
        assert len(records) == 400
        estimate = float(rows_a.read_text().splitlines()[1].split(",")[4])
        assert estimate == pytest.approx(
            sum(r["success"] for r in records) / 400, abs=1e-12
        )
        # records without the flag path: estimate must match monte_carlo's
        out_plain = tmp_path / "plain.csv"
        assert cli.main(argv + ["--out", str(out_plain)]) == 0
        assert out_plain.read_text().splitlines()[1] == rows_a.read_text().splitlines()[1]

    def test_sweep_threads_byte_identical(self, tmp_path):
        argv = ["sweep", "--n", "2,5", "--c2", "0.2,0.5,0.8", "--trials", "500",
                "--seed", "4"]
        out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli.main(argv + ["--out", str(out_a), "--threads", "1"]) == 0
        assert cli.main(argv + ["--out", str(out_b), "--threads", "4"]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()


class TestJsonlFormat:
    def test_sweep_jsonl_missing_fields_are_null(self, capsys):
        assert cli.main(["sweep", "--n", "2", "--c2", "0.36", "--format", "jsonl"]) == 0
        row = json.loads(capsys.readouterr().out.strip())
        assert row["n"] == 2
        assert row["lower_bound"] == 0.9
        assert row["basic_local"] is None
        assert row["greedy_estimate"] is None

    def test_montecarlo_jsonl_row(self, capsys):
        argv = ["montecarlo", "--strategy", "basic", "--n", "5", "--c2", "0.5",
                "--trials", "1000", "--seed", "3", "--format", "jsonl"]
        assert cli.main(argv) == 0
        row = json.loads(capsys.readouterr().out.strip())
        assert row["estimate"] == 0.607
        assert row["base_seed"] == 3


class TestSweepContent:
    def test_online_columns_filled_when_trials_positive(self, capsys):
        assert cli.main(["sweep", "--n", "6", "--c2", "0.5", "--trials", "800",
                         "--seed", "10"]) == 0
        cells = capsys.readouterr().out.strip().split("\n")[1].split(",")
        assert float(cells[7]) == pytest.approx(
            basic_local_closed_form(6, math.sqrt(0.5)), abs=1e-9
        )
        estimate, stderr = float(cells[8]), float(cells[9])
        assert 0.0 < estimate <= 1.0 and stderr > 0.0

    def test_rows_in_grid_order(self, capsys):
        assert cli.main(["sweep", "--n", "3,2", "--c2", "0.5,0.2"]) == 0
        lines = capsys.readouterr().out.strip().split("\n")[1:]
        heads = [tuple(line.split(",")[:2]) for line in lines]
        assert heads == [("3", "0.5"), ("3", "0.2"), ("2", "0.5"), ("2", "0.2")]

    def test_sandwich_in_output(self, capsys):
        assert cli.main(["sweep", "--n", "12", "--c2", "0.3,0.7"]) == 0
        for line in capsys.readouterr().out.strip().split("\n")[1:]:
            cells = [float(x) for x in line.split(",")[2:7]]
            lower, srm, opt, upper, _ = cells
            assert lower - 1e-12 <= srm <= opt + 1e-12 <= upper + 2e-12

    def test_orthogonal_grid_point(self, capsys):
        # c2 = 0 is a valid grid value: every figure of merit is 1
        assert cli.main(["sweep", "--n", "5", "--c2", "0"]) == 0
        cells = capsys.readouterr().out.strip().split("\n")[1].split(",")
        assert cells[2:7] == ["1", "1", "1", "1", "1"]
