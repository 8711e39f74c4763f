import json
import math

import numpy as np
import pytest

from porism.cli import CSV_HEADER, ReportFile, RunConfig, main, random_table
from porism.errors import NonConvexTable
from porism.invariants import CSV_QUANTITIES


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_kv(text):
    vals = {}
    for line in text.strip().splitlines():
        key, _, val = line.partition(" = ")
        vals[key] = float(val)
    return vals


class TestCausticCommand:
    def test_quad_fixture(self, capsys):
        code, out, _ = run(capsys, "caustic", "--a1", "2", "--a2", "1", "--n", "4", "--k", "1")
        assert code == 0
        vals = parse_kv(out)
        assert vals["lambda"] == pytest.approx(0.8, abs=1e-9)
        assert vals["J"] == pytest.approx(0.4472135954999579, abs=1e-9)
        assert vals["rotation_residual"] < 1e-9

    def test_circle(self, capsys):
        code, out, _ = run(capsys, "caustic", "--a1", "1", "--a2", "1", "--n", "4", "--k", "1")
        assert code == 0
        assert parse_kv(out)["lambda"] == pytest.approx(0.5, abs=1e-9)

    def test_rotation_range_rejected(self, capsys):
        code, _, err = run(capsys, "caustic", "--n", "4", "--k", "3")
        assert code == 2
        assert "gcd/rotation range" in err

    def test_gcd_rejected(self, capsys):
        code, _, err = run(capsys, "caustic", "--n", "6", "--k", "2")
        assert code == 2


class TestVerifyCommand:
    def test_quad_family_passes(self, capsys):
        code, out, _ = run(capsys, "verify", "--n", "4", "--k", "1", "--samples", "16")
        assert code == 0
        report = json.loads(out)
        assert set(report) == {"config", "meta", "family", "table", "quantities", "checks", "pass"}
        assert report["pass"] is True
        assert report["family"]["lambda"] == pytest.approx(0.8, abs=1e-9)
        prod_o = next(q for q in report["quantities"] if q["name"] == "prod_O")
        assert prod_o["expected"] == pytest.approx(0.64, rel=1e-9)
        assert len(prod_o["values"]) == 16
        assert any(c["name"].startswith("quad_") for c in report["checks"])

    def test_divisibility_gating(self, capsys):
        code, out, _ = run(capsys, "verify", "--n", "5", "--k", "2", "--samples", "8")
        assert code == 0
        report = json.loads(out)
        prod_f1 = next(q for q in report["quantities"] if q["name"] == "prod_F1")
        assert prod_f1["expected"] is None
        skipped = {c["name"]: c for c in report["checks"] if "note" in c}
        assert {"focal_product_f1_value", "focal_product_f2_value",
                "center_product_value"} <= set(skipped)
        assert all("not applicable" in c["note"] for c in skipped.values())
        names = [c["name"] for c in report["checks"]]
        assert not any(name.startswith("quad_") for name in names)

    def test_unreachable_tolerance_fails(self, capsys):
        code, out, _ = run(capsys, "verify", "--n", "3", "--k", "1",
                           "--samples", "8", "--tol", "1e-15")
        assert code == 1
        report = json.loads(out)
        closure = next(c for c in report["checks"] if c["name"] == "closure")
        assert not closure["passed"]

    def test_deterministic_up_to_timestamp(self, capsys):
        _, out1, _ = run(capsys, "verify", "--n", "4", "--samples", "8")
        _, out2, _ = run(capsys, "verify", "--n", "4", "--samples", "8")
        a, b = json.loads(out1), json.loads(out2)
        a["meta"].pop("timestamp")
        b["meta"].pop("timestamp")
        assert a == b

    def test_parallel_matches_serial(self, capsys):
        _, out1, _ = run(capsys, "verify", "--n", "6", "--samples", "8")
        _, out2, _ = run(capsys, "verify", "--n", "6", "--samples", "8", "--parallel")
        a, b = json.loads(out1), json.loads(out2)
        assert [q["values"] for q in a["quantities"]] == [q["values"] for q in b["quantities"]]

    def test_csv_format(self, capsys):
        code, out, _ = run(capsys, "verify", "--n", "4", "--samples", "4", "--format", "csv")
        assert code == 0
        assert out.splitlines()[0] == CSV_HEADER


class TestSweepCommand:
    def test_header_and_row_count(self, capsys):
        code, out, _ = run(capsys, "sweep", "--n", "4", "--samples", "2")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 3

    def test_matches_json_bit_for_bit(self, capsys):
        _, csv_text, _ = run(capsys, "sweep", "--n", "5", "--k", "2", "--samples", "6")
        _, json_text, _ = run(capsys, "verify", "--n", "5", "--k", "2", "--samples", "6")
        report = json.loads(json_text)
        by_name = {q["name"]: q["values"] for q in report["quantities"]}
        rows = [line.split(",") for line in csv_text.strip().splitlines()[1:]]
        header = CSV_HEADER.split(",")
        for s, row in enumerate(rows):
            assert int(row[0]) == s
            for col, cell in zip(header[2:], row[2:]):
                assert float(cell) == by_name[col][s]

    def test_constant_center_product_column(self, capsys):
        _, out, _ = run(capsys, "sweep", "--n", "4", "--samples", "8")
        rows = [line.split(",") for line in out.strip().splitlines()[1:]]
        col = CSV_HEADER.split(",").index("prod_O")
        vals = np.array([float(r[col]) for r in rows])
        assert np.allclose(vals, 0.64, rtol=1e-9)

    def test_small_sin2psi_column(self, capsys):
        _, out, _ = run(capsys, "sweep", "--n", "5", "--k", "2", "--samples", "8")
        rows = [line.split(",") for line in out.strip().splitlines()[1:]]
        col = CSV_HEADER.split(",").index("sum_sin2psi")
        assert all(abs(float(r[col])) < 1e-9 for r in rows)


class TestGenericCommand:
    def test_random_table_orbit(self, capsys):
        code, out, _ = run(capsys, "generic", "--seed", "42", "--harmonics", "4",
                           "--n", "7", "--k", "2")
        assert code == 0
        report = json.loads(out)
        assert report["pass"] is True
        r1 = next(q for q in report["quantities"] if q["name"] == "action_sum_residual")
        assert abs(r1["values"][0]) < 1e-8 * report["table"]["L"]
        assert len(report["table"]["harmonics"]) == 3  # orders 2, 3, 4

    def test_zero_harmonics_is_circle(self, capsys):
        code, out, _ = run(capsys, "generic", "--seed", "1", "--harmonics", "0",
                           "--n", "7", "--k", "2")
        assert code == 0
        report = json.loads(out)
        assert report["table"]["harmonics"] == []
        # regular (7,2) star in the unit circle
        assert report["table"]["L"] == pytest.approx(14.0 * math.sin(2 * math.pi / 7), rel=1e-9)

    def test_nonconvex_rejected(self, capsys):
        code, _, err = run(capsys, "generic", "--seed", "1", "--harmonics", "3",
                           "--amplitude", "5.0", "--n", "5", "--k", "2")
        assert code == 2
        assert "convex" in err

    def test_deterministic(self, capsys):
        _, out1, _ = run(capsys, "generic", "--seed", "9", "--harmonics", "5")
        _, out2, _ = run(capsys, "generic", "--seed", "9", "--harmonics", "5")
        a, b = json.loads(out1), json.loads(out2)
        a["meta"].pop("timestamp")
        b["meta"].pop("timestamp")
        assert a == b


class TestReportFile:
    def test_round_trip(self, capsys):
        _, out, _ = run(capsys, "verify", "--n", "4", "--samples", "4")
        rf = ReportFile.from_json(out)
        assert ReportFile.from_json(rf.to_json()) == rf

    def test_output_file(self, tmp_path, capsys):
        path = tmp_path / "report.json"
        code, out, _ = run(capsys, "verify", "--n", "4", "--samples", "4", "--out", str(path))
        assert code == 0
        report = json.loads(path.read_text())
        assert report["pass"] is True


class TestRunConfig:
    def test_validation(self):
        RunConfig().validate()
        with pytest.raises(ValueError):
            RunConfig(a1=1.0, a2=2.0).validate()
        with pytest.raises(ValueError):
            RunConfig(n=4, k=2).validate()
        with pytest.raises(ValueError):
            RunConfig(samples=1).validate()
        with pytest.raises(ValueError):
            RunConfig(tol=0.0).validate()
        with pytest.raises(ValueError):
            RunConfig(fmt="xml").validate()


def test_random_table_rejection_sampling():
    table = random_table(3, 5)
    assert len(table.harmonics) == 4
    with pytest.raises(NonConvexTable):
        random_table(3, 5, amplitude=10.0)
    assert random_table(3, 0).harmonics == ()


def test_csv_quantities_match_header():
    assert CSV_HEADER.split(",")[2:] == list(CSV_QUANTITIES)
