import json
import subprocess
import sys

import jsonschema
import pytest

from lielinear.cli import main
from lielinear.descriptor import fixture_path, load_schema


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def _valid(out, schema):
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema(schema))
    return doc


class TestValidate:
    def test_example1(self, capsys):
        code, out, _ = run(capsys, "validate", fixture_path("sl2_unipotent"))
        assert code == 0
        assert _valid(out, "validation")["passed"] is True

    def test_printed_example2(self, capsys):
        code, out, _ = run(capsys, "validate", fixture_path("sl2_trig_printed"))
        assert code == 2
        doc = _valid(out, "validation")
        assert "b(0) != e" in doc["checks"][0]["detail"]

    def test_missing_file(self, capsys, tmp_path):
        code, out, err = run(capsys, "validate", tmp_path / "nope.json")
        assert code == 1 and out == "" and "cannot read" in err

    def test_bad_json(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert run(capsys, "validate", p)[0] == 1

    def test_schema_violation(self, capsys, tmp_path):
        doc = json.loads(fixture_path("sl2_unipotent").read_text())
        doc["group"]["kind"] = "SO"
        p = tmp_path / "so.json"
        p.write_text(json.dumps(doc))
        code, _, err = run(capsys, "validate", p)
        assert code == 1 and "schema" in err

    def test_bad_expression(self, capsys, tmp_path):
        doc = json.loads(fixture_path("sl2_unipotent").read_text())
        doc["b_entries"][0][0] = "1 + tan(u1)"
        p = tmp_path / "tan.json"
        p.write_text(json.dumps(doc))
        code, _, err = run(capsys, "validate", p)
        assert code == 1 and "offset" in err


class TestAnalyze:
    @pytest.mark.parametrize("name, status", [
        ("sl2_unipotent", "Controllable"),
        ("sl2_trig_corrected", "Controllable"),
        ("sl2_hyperbolic", "CriterionNotMet"),
        ("sl2_trig_printed", "InvalidSystem"),
    ])
    def test_fixtures(self, capsys, name, status):
        code, out, _ = run(capsys, "analyze", fixture_path(name), "--json")
        assert code == 0
        assert _valid(out, "verdict")["status"] == status

    def test_tolerance_forced(self, capsys):
        code, out, _ = run(capsys, "analyze", fixture_path("sl2_hyperbolic"), "--tol-unimodular", "10")
        doc = _valid(out, "verdict")
        assert code == 0 and doc["status"] == "Controllable"
        assert any(n.startswith("tolerance-forced") for n in doc["notes"])
        assert doc["tolerances"]["unimodular"] == 10.0

    def test_k_max_too_small(self, capsys):
        code, out, _ = run(capsys, "analyze", fixture_path("sl2_unipotent"), "--k-max", "2")
        assert code == 0 and _valid(out, "verdict")["status"] == "CertificateNotFound"

    def test_byte_identical(self, capsys):
        a = run(capsys, "analyze", fixture_path("sl2_unipotent"), "--seed", "3")[1]
        b = run(capsys, "analyze", fixture_path("sl2_unipotent"), "--seed", "3")[1]
        assert a == b


class TestReach:
    def test_mc_reproducible(self, capsys, tmp_path):
        outs = []
        for i in range(2):
            p = tmp_path / f"r{i}.csv"
            code, out, _ = run(capsys, "reach", fixture_path("sl2_unipotent"), "--horizon", 3,
                               "--strategy", "mc", "--samples", 1000, "--seed", 7, "--out", p)
            assert code == 0
            doc = _valid(out, "reach_summary")
            assert doc["samples"] == 1000 and doc["contains_identity"] is True
            outs.append(p.read_bytes())
        assert outs[0] == outs[1]
        assert len(outs[0].decode().splitlines()) == 1001

    def test_grid_three_rows(self, capsys, tmp_path):
        p = tmp_path / "g.csv"
        code, _, _ = run(capsys, "reach", fixture_path("sl2_unipotent"), "--horizon", 1,
                         "--strategy", "grid", "--samples", 3, "--out", p)
        lines = p.read_text().splitlines()
        assert code == 0 and len(lines) == 4
        assert lines[1] == "1,0,1,0,0,1"

    def test_budget_refusal(self, capsys, tmp_path):
        code, out, err = run(capsys, "reach", fixture_path("sl2_unipotent"), "--horizon", 3,
                             "--samples", 100000000, "--out", tmp_path / "x.csv")
        assert code == 3 and out == "" and "refusing" in err
        assert not (tmp_path / "x.csv").exists()

    def test_unwritable_output(self, capsys, tmp_path):
        code, _, _ = run(capsys, "reach", fixture_path("sl2_unipotent"), "--horizon", 1,
                         "--samples", 3, "--out", tmp_path / "missing" / "x.csv")
        assert code == 1

    def test_workers_identical(self, capsys, tmp_path):
        files = []
        for w in (1, 4):
            p = tmp_path / f"w{w}.csv"
            run(capsys, "reach", fixture_path("sl2_hyperbolic"), "--horizon", 4, "--samples", 300,
                "--seed", 1, "--workers", w, "--out", p)
            files.append(p.read_bytes())
        assert files[0] == files[1]


class TestDuality:
    def test_example1(self, capsys):
        code, out, _ = run(capsys, "duality", fixture_path("sl2_unipotent"), "--horizon", 3, "--samples", 200)
        doc = _valid(out, "check")
        assert code == 0 and doc["passed"] and doc["max_residual"] <= 1e-9

    def test_bad_horizon(self, capsys):
        code, _, err = run(capsys, "duality", fixture_path("sl2_unipotent"), "--horizon", 0)
        assert code == 1 and "invalid argument" in err


def test_usage_error_exits_one(capsys):
    with pytest.raises(SystemExit) as info:
        main(["reach", str(fixture_path("sl2_unipotent"))])
    assert info.value.code == 1


class TestSimulate:
    def test_zero_controls(self, capsys, tmp_path):
        c = tmp_path / "c.json"
        c.write_text("[[0], [0], [0]]")
        code, out, _ = run(capsys, "simulate", fixture_path("sl2_unipotent"), "--controls", c)
        states = _valid(out, "trajectory")
        assert code == 0 and states == [[[1.0, 0.0], [0.0, 1.0]]] * 4

    def test_three_steps(self, capsys, tmp_path):
        import numpy as np

        w, v, u = 0.1, -0.2, 0.3
        c = tmp_path / "c.json"
        c.write_text(json.dumps([w, v, u]))
        code, out, _ = run(capsys, "simulate", fixture_path("sl2_unipotent"), "--controls", c)
        h = np.array([[1.0, 1.0], [0.0, 1.0]])
        hi = np.linalg.inv(h)

        def b(x):
            return np.array([[1 + x, -x], [x, 1 - x]])

        expected = b(u) @ h @ b(v) @ hi @ h @ h @ b(w) @ hi @ hi
        assert code == 0
        assert np.allclose(json.loads(out)[-1], expected, atol=1e-12, rtol=0)

    def test_initial_state(self, capsys, tmp_path):
        c = tmp_path / "c.json"
        c.write_text("[[0]]")
        g = tmp_path / "g.json"
        g.write_text("[[2, 0], [0, 0.5]]")
        code, out, _ = run(capsys, "simulate", fixture_path("sl2_unipotent"), "--controls", c, "--initial", g)
        # h g h^-1 with h = [[1,1],[0,1]]
        assert code == 0 and json.loads(out)[1] == [[2.0, -1.5], [0.0, 0.5]]

    def test_out_of_box(self, capsys, tmp_path):
        c = tmp_path / "c.json"
        c.write_text("[[0.9]]")
        code, _, err = run(capsys, "simulate", fixture_path("sl2_unipotent"), "--controls", c)
        assert code == 2 and "outside the box" in err

    def test_missing_controls(self, capsys, tmp_path):
        code, _, _ = run(capsys, "simulate", fixture_path("sl2_unipotent"), "--controls", tmp_path / "none.json")
        assert code == 1

    def test_bad_initial_shape(self, capsys, tmp_path):
        c = tmp_path / "c.json"
        c.write_text("[[0]]")
        g = tmp_path / "g.json"
        g.write_text("[[1, 0, 0]]")
        assert run(capsys, "simulate", fixture_path("sl2_unipotent"), "--controls", c, "--initial", g)[0] == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lielinear", "validate", str(fixture_path("sl2_unipotent"))],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["passed"] is True
