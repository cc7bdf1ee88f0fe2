import csv
import io
import json
import math

import numpy as np
import pytest

from bogofock.cli import main
from bogofock.problem import DEMOS, ProblemError, demo, dump_problem, parse_problem
from bogofock.suites import ConfigError, RunConfig, run_check

IDENTITY = "format: bogofock-problem/1\nkind: element\nd: 2\nS.0: [[1, 0], [0, 0]]\nS.1: [[0, 0], [1, 0]]\nT.0: [[0, 0], [0, 0]]\nT.1: [[0, 0], [0, 0]]\n"


def write(tmp_path, text, name="p.txt"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def demo_file(tmp_path, name):
    path = tmp_path / f"{name}.txt"
    assert main(["demo", name, "--out", str(path)]) == 0
    return str(path)


class TestProblemFormat:
    @pytest.mark.parametrize("name", sorted(DEMOS))
    def test_round_trip(self, name):
        text = dump_problem(demo(name))
        p = parse_problem(text)
        assert dump_problem(p) == text
        assert all(e.passed for e in run_check(p))

    def test_demo_contents(self):
        sq = demo("squeeze")
        assert (sq.d, sq.S[0, 0], sq.T[0, 0]) == (1, 0, 0.5)
        rot = demo("rotation")
        assert (rot.S[0, 0], rot.T[0, 0]) == (1j, 0)
        c2 = demo("commuting2d")
        np.testing.assert_array_equal(c2.T, np.diag([0.3, 0.7]))
        np.testing.assert_array_equal(c2.S, np.zeros((2, 2)))

    def test_comments_and_blank_lines(self):
        text = "# squeeze\n\n" + dump_problem(demo("squeeze"))
        assert parse_problem(text).T[0, 0] == 0.5

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "format: other/1\nkind: generator\nd: 1\nS.0: [[0, 0]]\nT.0: [[0, 0]]\n",
            "format: bogofock-problem/1\nkind: mystery\nd: 1\nS.0: [[0, 0]]\nT.0: [[0, 0]]\n",
            "format: bogofock-problem/1\nkind: generator\nd: 0\n",
            "format: bogofock-problem/1\nkind: generator\nd: 1\nS.0: [[0, 0]]\n",
            "format: bogofock-problem/1\nkind: generator\nd: 1\nS.0: [[0, 0], [1, 1]]\nT.0: [[0, 0]]\n",
            "format: bogofock-problem/1\nkind: generator\nd: 1\nS.0: [[0]]\nT.0: [[0, 0]]\n",
            "format: bogofock-problem/1\nkind: generator\nd: 1\nS.0: [[NaN, 0]]\nT.0: [[0, 0]]\n",
            "format: bogofock-problem/1\nkind: generator\nd: 1\nS.0: [[0, 0]]\nT.0: [[0, 0]]\nX: 1\n",
            "format: bogofock-problem/1\nformat: bogofock-problem/1\n",
            "no colon here\n",
        ],
    )
    def test_rejects(self, text):
        with pytest.raises(ProblemError):
            parse_problem(text)


class TestRunConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_max": 9, "sector_cap": 4, "t_grid": (0.5,)},
            {"n_max": 20, "sector_cap": 2, "t_grid": ()},
            {"n_max": 20, "sector_cap": 2, "t_grid": (math.nan,)},
            {"n_max": 20, "sector_cap": 2, "t_grid": (0.5,), "tolerances": {"bogus": 1.0}},
            {"n_max": 20, "sector_cap": 2, "t_grid": (0.5,), "tolerances": {"theorem": -1.0}},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            RunConfig(**kwargs)


class TestCheck:
    def test_identity(self, tmp_path, capsys):
        assert main(["check", write(tmp_path, IDENTITY)]) == 0
        assert "checks passed" in capsys.readouterr().out

    def test_squeeze_element(self, tmp_path):
        text = f"format: bogofock-problem/1\nkind: element\nd: 1\nS.0: [[{math.cosh(0.5)!r}, 0]]\nT.0: [[{math.sinh(0.5)!r}, 0]]\n"
        assert main(["check", write(tmp_path, text)]) == 0

    def test_s_equals_t_fails(self, tmp_path, capsys):
        text = "format: bogofock-problem/1\nkind: element\nd: 1\nS.0: [[1, 0]]\nT.0: [[1, 0]]\n"
        out_path = tmp_path / "r.jsonl"
        assert main(["check", write(tmp_path, text), "--out", str(out_path)]) == 1
        records = [json.loads(line) for line in out_path.read_text().splitlines()]
        s1 = next(r for r in records if r.get("name") == "s1")
        assert s1["residual"] == 1.0 and s1["pass"] is False
        assert "FAIL symplectic.is_symplectic:s1" in capsys.readouterr().out

    def test_parse_error(self, tmp_path):
        assert main(["check", write(tmp_path, "garbage\n")]) == 2

    def test_missing_file(self, tmp_path):
        assert main(["check", str(tmp_path / "nope.txt")]) == 2


class TestFlow:
    def read_csv(self, capsys):
        return list(csv.DictReader(io.StringIO(capsys.readouterr().out)))

    def test_diagonal_has_zero_tau(self, tmp_path, capsys):
        assert main(["flow", demo_file(tmp_path, "rotation"), "--t-grid", "0,0.5,1,2"]) == 0
        rows = self.read_csv(capsys)
        assert [float(r["tau"]) for r in rows] == [0, 0, 0, 0]

    def test_squeeze_k_is_tanh(self, tmp_path, capsys):
        assert main(["flow", demo_file(tmp_path, "squeeze"), "--t-grid", "0.5,1,2"]) == 0
        rows = self.read_csv(capsys)
        for row in rows:
            assert float(row["k_norm"]) == pytest.approx(math.tanh(0.5 * float(row["t"])), rel=1e-9)

    def test_phase_tau_negative(self, tmp_path, capsys):
        assert main(["flow", demo_file(tmp_path, "phase"), "--t-grid", "0.25,0.5,1,1.5"]) == 0
        rows = self.read_csv(capsys)
        assert all(float(r["tau"]) < 0 for r in rows)
        assert list(rows[0]) == ["t", "norm_b11", "norm_b12", "norm_b21", "norm_b22", "k_norm", "k_hs", "tau", "theta"]

    def test_deterministic(self, tmp_path):
        path = demo_file(tmp_path, "phase")
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["flow", path, "--out", str(a)]) == 0
        assert main(["flow", path, "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_report_format(self, tmp_path, capsys):
        assert main(["flow", demo_file(tmp_path, "squeeze"), "--format", "report"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert json.loads(lines[0])["schema"] == "bogofock-report/1"
        assert all(json.loads(line)["record"] == "flow" for line in lines[1:])

    def test_element_rejected(self, tmp_path):
        assert main(["flow", write(tmp_path, IDENTITY)]) == 2

    def test_invalid_generator(self, tmp_path):
        text = "format: bogofock-problem/1\nkind: generator\nd: 1\nS.0: [[1, 0]]\nT.0: [[0, 0]]\n"
        assert main(["flow", write(tmp_path, text)]) == 1

    def test_huge_t_rejected(self, tmp_path):
        assert main(["flow", demo_file(tmp_path, "squeeze"), "--t-grid", "500"]) == 2


class TestVerify:
    def test_small_run_is_byte_stable(self, tmp_path):
        path = demo_file(tmp_path, "phase")
        outs = []
        for name in ("a.jsonl", "b.jsonl"):
            out = tmp_path / name
            args = ["verify", path, "--n-max", "40", "--sector-cap", "2", "--t-grid", "0.2,0.3", "--seed", "7", "--out", str(out)]
            main(args)
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
        records = [json.loads(line) for line in outs[0].decode().splitlines()]
        assert records[0]["record"] == "header" and records[0]["config"]["seed"] == 7
        assert records[-1]["record"] == "summary"
        checks = records[1:-1]
        assert {"suite", "name", "residual", "tolerance", "pass", "n_max", "sector_cap"} <= set(checks[0])
        modules = {"symplectic", "quadops", "bogoliubov"}
        assert all(r["suite"].split(".")[0] in modules for r in checks)
        assert records[-1]["checks"] == len(checks)

    def test_csv(self, tmp_path, capsys):
        path = demo_file(tmp_path, "rotation")
        code = main(["verify", path, "--n-max", "20", "--t-grid", "0.5", "--format", "csv"])
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert code == 0
        assert rows and all(r["pass"] == "true" for r in rows)
        assert any(r["name"] == "theta_zero" for r in rows)

    def test_tolerance_override_can_fail(self, tmp_path):
        path = demo_file(tmp_path, "squeeze")
        args = ["verify", path, "--n-max", "20", "--t-grid", "0.5", "--tol", "determinant=1e-15"]
        assert main(args) == 1

    @pytest.mark.parametrize(
        "extra",
        [
            ["--tol", "nonsense=1"],
            ["--tol", "theorem"],
            ["--tol", "theorem=abc"],
            ["--n-max", "8"],
            ["--t-grid", "a,b"],
            ["--t-grid", ","],
            ["--t-grid", "60"],
        ],
    )
    def test_input_errors(self, tmp_path, extra):
        assert main(["verify", demo_file(tmp_path, "phase"), *extra]) == 2

    def test_suite_exception_exit_code(self, tmp_path, capsys):
        # K_t saturates to 1 in floating point long before cosh overflows
        assert main(["verify", demo_file(tmp_path, "phase"), "--t-grid", "30", "--n-max", "12"]) == 3
        assert "internal error" in capsys.readouterr().err

    def test_invalid_generator_fails_validation(self, tmp_path):
        text = "format: bogofock-problem/1\nkind: generator\nd: 1\nS.0: [[0, 0]]\nT.0: [[0, 1]]\n"
        path = write(tmp_path, text)
        assert main(["verify", path]) == 0  # complex symmetric T is fine
        text = "format: bogofock-problem/1\nkind: generator\nd: 2\nS.0: [[0, 0], [0, 0]]\nS.1: [[0, 0], [0, 0]]\nT.0: [[0, 0], [1, 0]]\nT.1: [[0, 0], [0, 0]]\n"
        assert main(["verify", write(tmp_path, text, "q.txt"), "--n-max", "12"]) == 1

    def test_element_problem(self, tmp_path):
        text = f"format: bogofock-problem/1\nkind: element\nd: 1\nS.0: [[{math.cosh(0.3)!r}, 0]]\nT.0: [[{math.sinh(0.3)!r}, 0]]\n"
        assert main(["verify", write(tmp_path, text)]) == 0


class TestDemoCommand:
    def test_unknown(self):
        assert main(["demo", "nope"]) == 2

    def test_stdout(self, capsys):
        assert main(["demo", "squeeze"]) == 0
        assert capsys.readouterr().out == dump_problem(demo("squeeze"))

    def test_no_command(self):
        assert main([]) == 2
