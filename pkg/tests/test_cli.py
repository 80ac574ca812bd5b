"""End-to-end checks of the command-line interface.

Most cases drive cli.main() in process (fast, still exercises parsing,
dispatch, rendering, and exit codes); one test goes through a real
subprocess to cover the ``python -m gapmodel.cli`` path.
"""

import csv
import io
import json
import math
import subprocess
import sys

import pytest

from gapmodel import cli
from gapmodel.errors import DomainError


def run_main(argv, capsys):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rows, f"no data rows in:\n{text}"
    return rows


class TestParsing:
    def test_float_lists_and_ranges(self):
        assert cli._parse_floats("1,2.5") == [1.0, 2.5]
        assert cli._parse_floats("0:1:3") == [0.0, 0.5, 1.0]
        assert cli._parse_floats("2:2:1") == [2.0]
        with pytest.raises(DomainError):
            cli._parse_floats("0:1:0")

    def test_float_rendering_round_trips(self, capsys):
        code, out, _ = run_main(
            ["eigen", "--n", "2", "--K", "0.7", "--D", "1.3"], capsys
        )
        assert code == 0
        row = parse_csv(out)[0]
        for field in ("K", "D", "lambda1", "lambda2", "gap", "excess"):
            tok = row[field]
            # 17 significant digits reproduce the double exactly
            assert format(float(tok), ".17g") == tok


class TestEigen:
    def test_csv_shape_and_flat_gap(self, capsys):
        code, out, err = run_main(
            ["eigen", "--n", "4", "--K", "0", "--D", "2"], capsys
        )
        assert code == 0 and err == ""
        lines = out.strip().split("\n")
        assert lines[0] == (
            "n,K,D,lambda1,lambda2,gap,excess,side,method,error_estimate"
        )
        row = parse_csv(out)[0]
        assert float(row["gap"]) == pytest.approx(
            3 * math.pi**2 / 4, rel=1e-10
        )
        assert row["method"] == "shoot"

    def test_dichotomy_side_column(self, capsys):
        code, out, _ = run_main(
            ["eigen", "--n", "2,5", "--K", "1", "--D", "1"], capsys
        )
        assert code == 0
        rows = parse_csv(out)
        sides = {r["n"]: r["side"] for r in rows}
        assert sides == {"2": "below", "5": "above"}

    def test_determinism_and_jobs(self, capsys):
        argv = ["eigen", "--n", "2,3", "--K", "0,0.8", "--D", "1.1"]
        code1, out1, _ = run_main(argv, capsys)
        code2, out2, _ = run_main(argv, capsys)
        code3, out3, _ = run_main(argv + ["--jobs", "2"], capsys)
        assert code1 == code2 == code3 == 0
        assert out1 == out2, "identical invocations must match byte for byte"
        assert out1 == out3, "--jobs must not change content or order"
        assert len(parse_csv(out1)) == 4

    def test_json_document(self, capsys):
        code, out, _ = run_main(
            ["eigen", "--n", "3", "--K", "0.5", "--D", "1", "--format", "json"],
            capsys,
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["schema_version"] == 1
        assert doc["command"] == "eigen"
        (row,) = doc["rows"]
        # n = 3 shifts both levels equally, so the gap is exactly flat
        assert row["gap"] == pytest.approx(3 * math.pi**2, rel=1e-9)

    def test_fd_method(self, capsys):
        code, out, _ = run_main(
            ["eigen", "--n", "2", "--K", "1", "--D", "1", "--method", "fd"],
            capsys,
        )
        assert code == 0
        row = parse_csv(out)[0]
        assert row["method"] == "fd"
        assert float(row["lambda1"]) == pytest.approx(
            9.3609783265589801, rel=1e-7
        )

    def test_output_file(self, tmp_path, capsys):
        target = tmp_path / "table.csv"
        argv = ["eigen", "--n", "3", "--K", "0.2", "--D", "1"]
        code, out, _ = run_main(argv + ["--output", str(target)], capsys)
        assert code == 0 and out == ""
        _, direct, _ = run_main(argv, capsys)
        assert target.read_text() == direct


class TestSeries:
    def test_order0_normalization(self, capsys):
        code, out, _ = run_main(["series", "--order", "0"], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["branches"]["first"]["lambda0_at_D_pi"] == 1.0
        assert doc["branches"]["second"]["lambda0_at_D_pi"] == 4.0
        assert "lambda0_at_D_pi" not in doc["branches"]["gap"]
        lead = doc["branches"]["gap"]["orders"][0]["decimal"]["2"]
        assert lead == pytest.approx(3 * math.pi**2, rel=1e-14)

    def test_order5_gap_factors(self, capsys):
        code, out, _ = run_main(
            ["series", "--order", "5", "--branch", "gap"], capsys
        )
        assert code == 0
        doc = json.loads(out)
        block = doc["gap_order5_factors"]
        assert block["A2_factor"] == pytest.approx(
            -0.2836359657074432, rel=1e-12
        )
        assert block["A_factor"] == pytest.approx(
            0.2528990877987356, rel=1e-12
        )
        assert block["reference_decimals"] == [-0.522, 0.2429]
        # the engine disagrees with the reference decimals here by design
        assert block["matches_reference"] is False

    def test_check_reference_block(self, capsys):
        code, out, _ = run_main(
            ["series", "--order", "2", "--branch", "first",
             "--check-reference"],
            capsys,
        )
        assert code == 0
        doc = json.loads(out)
        rc = doc["reference_check"]
        assert rc["order"] == 5
        assert len(rc["matches"]) == 31
        assert all(rc["matches"].values())
        assert list(rc["discrepancies"]) == ["lambda_second_5"]
        disc = rc["discrepancies"]["lambda_second_5"]
        assert disc["printed_matches_engine"] is False
        assert disc["difference_is_12_over_pi_times_y22_y23"] is True
        notes = " ".join(rc["decimal_notes"])
        assert "0.36024" in notes and "0.35024" in notes
        assert rc["gap_order5_sign_change"] == [12, 11]


class TestPruefer:
    def test_flat_closed_form_and_agreement(self, capsys):
        code, out, _ = run_main(
            ["pruefer", "--k", "10", "--n", "2", "--K", "0,0.1", "--D", "1"],
            capsys,
        )
        assert code == 0
        flat, curved = parse_csv(out)
        assert float(flat["c_k"]) == pytest.approx(
            float(flat["c_k_flat_closed_form"]), abs=1e-9
        )
        assert curved["c_k_flat_closed_form"] == ""
        for row in (flat, curved):
            assert float(row["branch_agreement"]) <= 1e-7
            assert float(row["phi_right_defect"]) <= 1e-8
            assert float(row["dphi_right_defect"]) <= 1e-8
            assert float(row["dphi_left_defect"]) <= 1e-8
            assert float(row["threshold_s"]) == pytest.approx(
                float(row["c_k"]) + math.pi**2, rel=1e-12
            )


class TestFlow:
    def test_run_and_plot(self, tmp_path, capsys):
        plot = tmp_path / "snapshots.csv"
        code, out, _ = run_main(
            ["flow", "--n", "2", "--K", "0.5", "--D", "1", "--k", "10",
             "--emit-plot", str(plot), "--snapshots", "4"],
            capsys,
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "t,distance,residual"
        rows = [tuple(map(float, ln.split(","))) for ln in lines[1:]]
        assert len(rows) > 2
        assert rows[-1][1] <= 1e-6
        times = [r[0] for r in rows]
        assert times == sorted(times)

        plines = plot.read_text().strip().split("\n")
        assert plines[0] == "t,z,psi"
        snap_ts = {ln.split(",")[0] for ln in plines[1:]}
        assert len(snap_ts) >= 2
        for ln in plines[1:]:
            t, z, psi = map(float, ln.split(","))
            assert 0.0 <= z <= 0.5 and psi <= 1e-12

    def test_rejects_multiple_triples(self, capsys):
        code, out, err = run_main(
            ["flow", "--n", "2", "--K", "0.5,0.6", "--D", "1", "--k", "10"],
            capsys,
        )
        assert code == 2 and out == ""
        assert "one parameter triple" in err


class TestBounds:
    def test_sandwich_rows(self, capsys):
        code, out, _ = run_main(
            ["bounds", "--n", "3", "--K", "1", "--D", "1"], capsys
        )
        assert code == 0
        rows = parse_csv(out)
        assert [r["index"] for r in rows] == ["1", "2"]
        for row in rows:
            assert row["within"] == "True"
            assert row["lower_method"] == "comparison"
            assert row["upper_method"] == "rayleigh"
            # n = 3 collapses the sandwich to equality
            assert float(row["lower"]) == pytest.approx(
                float(row["upper"]), rel=1e-12
            )

    def test_n2_quartic_rows(self, capsys):
        code, out, _ = run_main(
            ["bounds", "--n", "2", "--K", "1", "--D", "1"], capsys
        )
        assert code == 0
        for row in parse_csv(out):
            assert row["lower"] == ""
            assert row["upper_method"] == "quartic minorant"
            assert row["within"] == "True"


class TestExitCodes:
    def test_pole_is_invalid_params(self, capsys):
        code, out, err = run_main(
            ["eigen", "--n", "2", "--K", "10", "--D", "1.1"], capsys
        )
        assert code == 2 and out == ""
        assert "invalid parameter triples" in err

    def test_bad_dimension(self, capsys):
        code, _, err = run_main(
            ["eigen", "--n", "0", "--K", "0.5", "--D", "1"], capsys
        )
        assert code == 2 and "n=0" in err

    def test_bounds_need_positive_curvature(self, capsys):
        code, _, err = run_main(
            ["bounds", "--n", "3", "--K", "-0.5", "--D", "1"], capsys
        )
        assert code == 2 and "K > 0" in err

    def test_flow_nonconvergence_is_solver_failure(self, capsys):
        code, out, err = run_main(
            ["flow", "--n", "2", "--K", "0.5", "--D", "1", "--k", "10",
             "--tol", "1e-14", "--t-max", "1e-3"],
            capsys,
        )
        assert code == 3 and out == ""
        assert err.startswith("error:")

    def test_validation_before_dispatch(self, capsys):
        # one bad triple in a sweep aborts the whole run with no output
        code, out, err = run_main(
            ["eigen", "--n", "2,0", "--K", "0.5", "--D", "1"], capsys
        )
        assert code == 2 and out == ""
        assert "(n=0" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "gapmodel.cli", "eigen", "--n", "3",
         "--K", "0.5", "--D", "1", "--format", "json"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    doc = json.loads(proc.stdout)
    (row,) = doc["rows"]
    assert row["gap"] == pytest.approx(29.60881320323023, rel=1e-12)
