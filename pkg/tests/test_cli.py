import filecmp
import json
import math

import numpy as np
import pytest

import pklap.cli as cli
from pklap.core import Nonlinearity
from pklap.nonlinearities import BuiltinSpec, make_builtin, make_power
from pklap.solvers import SolutionSet


def _config(tmp_path, name="cfg.json", **overrides):
    base = {
        "m": 2,
        "p": 2.0,
        "lambda": 5.0,
        "nonlinearity": {
            "builtin": "power",
            "params": {"a": 1.0, "b": 1.0, "s": 2.0, "r": 2.0},
        },
        "solver": {"starts": 6},
        "seed": 0,
    }
    base.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(base))
    return str(path)


class TestLoadConfig:
    def test_round_trip(self, tmp_path):
        loaded = cli.load_config(_config(tmp_path))
        assert loaded.problem.m == 2
        assert loaded.problem.lam == 5.0
        assert loaded.builtin.name == "power"
        assert loaded.solver.starts == 6
        assert loaded.subspace == "H_m"

    def test_scalar_p_broadcasts(self, tmp_path):
        loaded = cli.load_config(_config(tmp_path, m=4, p=2.5, nonlinearity={
            "builtin": "example1"
        }))
        assert list(loaded.problem.exponent.values) == [2.5] * 4

    def test_top_level_seed_reaches_solver(self, tmp_path):
        loaded = cli.load_config(_config(tmp_path, seed=9))
        assert loaded.solver.seed == 9
        # an explicit solver seed wins over the top-level one
        loaded = cli.load_config(
            _config(tmp_path, seed=9, solver={"starts": 4, "seed": 2})
        )
        assert loaded.solver.seed == 2

    @pytest.mark.parametrize(
        "overrides",
        [
            {"m": 1},
            {"m": True},
            {"m": "2"},
            {"p": [2.0, 2.0, 2.0]},
            {"p": "quadratic"},
            {"p": 0.5},
            {"lambda": "big"},
            {"lambda": -1.0},
            {"nonlinearity": {"builtin": "no_such"}},
            {"nonlinearity": {"params": {}}},
            {"nonlinearity": {"builtin": "power", "extra": 1}},
            {"solver": {"starts": 6, "bogus": 1}},
            {"solver": "fast"},
            {"subspace": "W"},
            {"seed": 1.5},
            {"n": 0},
            {"typo_key": 1},
        ],
    )
    def test_invalid_configs_rejected(self, tmp_path, overrides):
        with pytest.raises(cli.ConfigError):
            cli.load_config(_config(tmp_path, **overrides))

    def test_missing_required_key(self, tmp_path):
        path = tmp_path / "partial.json"
        path.write_text(json.dumps({"m": 2, "p": 2.0, "lambda": 1.0}))
        with pytest.raises(cli.ConfigError, match="nonlinearity"):
            cli.load_config(str(path))

    def test_unreadable_and_malformed_files(self, tmp_path):
        with pytest.raises(cli.ConfigError, match="cannot read"):
            cli.load_config(str(tmp_path / "absent.json"))
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(cli.ConfigError, match="not valid JSON"):
            cli.load_config(str(bad))
        arr = tmp_path / "arr.json"
        arr.write_text("[1, 2]")
        with pytest.raises(cli.ConfigError, match="JSON object"):
            cli.load_config(str(arr))


class TestExitCodes:
    def test_missing_config_file(self, tmp_path, capsys):
        code = cli.main(["check", str(tmp_path / "none.json")])
        assert code == cli.EXIT_CONFIG
        assert "configuration" in capsys.readouterr().err

    def test_no_command_is_usage_error(self):
        assert cli.main([]) == cli.EXIT_CONFIG

    def test_bad_flag_value(self, tmp_path):
        cfg = _config(tmp_path)
        out = str(tmp_path / "g.json")
        assert cli.main(["gradcheck", cfg, "--points", "0", "--output", out]) == cli.EXIT_CONFIG

    def test_solve_without_solutions_is_compute_error(self, tmp_path, monkeypatch):
        monkeypatch.setattr(
            cli, "find_multiple", lambda *a, **k: SolutionSet(records=())
        )
        cfg = _config(tmp_path)
        values = str(tmp_path / "v.csv")
        summary = str(tmp_path / "s.csv")
        code = cli.main(
            ["solve", cfg, "--values-out", values, "--summary-out", summary]
        )
        assert code == cli.EXIT_COMPUTE
        # outputs are still written for inspection
        assert open(values).read().startswith("solution_id,k,component,value")
        assert open(summary).read().splitlines()[0].startswith("solution_id,action")

    def test_unexpected_exception_is_internal(self, tmp_path, monkeypatch):
        def boom(*a, **k):
            raise RuntimeError("wat")

        monkeypatch.setattr(cli, "find_multiple", boom)
        code = cli.main(["solve", _config(tmp_path)])
        assert code == cli.EXIT_INTERNAL


class TestCheck:
    def test_borderline_power_report(self, tmp_path):
        cfg = _config(tmp_path)
        out = str(tmp_path / "check.json")
        assert cli.main(["check", cfg, "--output", out]) == cli.EXIT_OK
        payload = json.loads(open(out).read())
        assert payload["m"] == 2
        assert payload["xi"] == pytest.approx(4.0)
        assert payload["thresholds"]["lambda1"] == pytest.approx(4.0)
        assert payload["thresholds"]["lambda3"] == pytest.approx(2.0)
        [route] = payload["routing"]
        assert route["route"] == "above_lambda3"
        assert route["lambda_interval"] == [2.0, "inf"]
        names = {rep["name"] for rep in payload["reports"]}
        assert {"C.1", "C.2", "C.3", "A.4", "A.5", "A.6.3", "anticoercivity"} <= names
        by_name = {rep["name"]: rep for rep in payload["reports"]}
        assert by_name["C.1"]["verdict"] == "holds_on_samples"
        assert by_name["A.4"]["verdict"] == "holds_on_samples"

    def test_bounded_family_report(self, tmp_path):
        cfg = _config(
            tmp_path,
            name="e3.json",
            m=2,
            p=[2.0, 2.0],
            **{"lambda": 1.0},
            nonlinearity={"builtin": "example3"},
        )
        out = str(tmp_path / "check3.json")
        assert cli.main(["check", cfg, "--output", out]) == cli.EXIT_OK
        payload = json.loads(open(out).read())
        assert payload["thresholds"] is None
        assert payload["r2"] == pytest.approx(1.0)
        assert payload["lambda_star"] == pytest.approx(2.149126479012437)
        [route] = payload["routing"]
        assert route["route"] == "bounded_three_solutions"
        assert route["interval_is_estimate"] is True
        assert route["lambda_interval"][0] == 0.0
        assert route["lambda_interval"][1] == pytest.approx(2.149126479012437)
        names = {rep["name"] for rep in payload["reports"]}
        assert {"A.7", "A.8", "A.9", "B.2", "B.3"} <= names

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = _config(tmp_path)
        out_a = str(tmp_path / "a.json")
        out_b = str(tmp_path / "b.json")
        assert cli.main(["check", cfg, "--output", out_a]) == cli.EXIT_OK
        assert cli.main(["check", cfg, "--output", out_b]) == cli.EXIT_OK
        assert filecmp.cmp(out_a, out_b, shallow=False)


class TestRouting:
    def _routes(self, m, p, s, r):
        spec = make_builtin("power", m, {"a": 1.0, "b": 1.0, "s": s, "r": r})
        from pklap.analysis import thresholds
        from pklap.core import ExponentFunction, Problem

        prob = Problem(
            m=m,
            n=1,
            exponent=ExponentFunction.constant(p, m),
            nonlinearity=spec.nonlinearity,
            lam=1.0,
        )
        thr = thresholds(prob, spec.growth)
        return cli._routing(prob, spec, thr, None), thr

    def test_super_p_growth_in_s(self):
        routes, _ = self._routes(2, 2.0, 4.0, 4.0)
        assert routes[0]["route"] == "any_lambda_via_s"
        assert routes[0]["lambda_interval"] == [0.0, math.inf]

    def test_super_p_growth_in_r_only(self):
        routes, _ = self._routes(2, 2.0, 2.0, 4.0)
        assert routes[0]["route"] == "any_lambda_via_r"

    def test_equality_in_s_only(self):
        routes, thr = self._routes(2, 3.0, 3.0, 2.0)
        assert routes[0]["route"] == "above_lambda1"
        assert routes[0]["lambda_interval"][0] == thr.lambda1

    def test_equality_in_r_only(self):
        routes, thr = self._routes(2, 3.0, 2.0, 3.0)
        assert routes[0]["route"] == "above_lambda2"
        assert routes[0]["lambda_interval"][0] == thr.lambda2

    def test_subcritical_growth_has_no_route(self):
        routes, _ = self._routes(2, 3.0, 2.5, 2.5)
        assert routes[0]["route"] == "none"
        assert routes[0]["lambda_interval"] is None


class TestSolve:
    def test_borderline_solve_outputs(self, tmp_path):
        cfg = _config(tmp_path)
        values = str(tmp_path / "v.csv")
        summary = str(tmp_path / "s.csv")
        code = cli.main(["solve", cfg, "--values-out", values, "--summary-out", summary])
        assert code == cli.EXIT_OK

        v_lines = open(values).read().splitlines()
        assert v_lines[0] == "solution_id,k,component,value"
        # lambda = 5 sits above every threshold but the linear system is
        # invertible, so only the zero sequence solves it
        assert v_lines[1:] == ["0,1,0,0.0", "0,2,0,0.0"]

        s_lines = open(summary).read().splitlines()
        assert s_lines[0] == (
            "solution_id,action,residual_norm,morse_index,"
            "classification,in_Y,method,converged,flags"
        )
        fields = s_lines[1].split(",")
        assert fields[0] == "0"
        assert float(fields[1]) == 0.0
        assert int(fields[3]) == 2
        assert fields[4] == "maximum"
        assert s_lines[-1] == "# sign_flip_symmetry_ok: true"

    def test_solve_rerun_byte_identical(self, tmp_path):
        cfg = _config(tmp_path)
        pairs = []
        for tag in ("x", "y"):
            values = str(tmp_path / f"v_{tag}.csv")
            summary = str(tmp_path / f"s_{tag}.csv")
            assert (
                cli.main(
                    ["solve", cfg, "--values-out", values, "--summary-out", summary]
                )
                == cli.EXIT_OK
            )
            pairs.append((values, summary))
        assert filecmp.cmp(pairs[0][0], pairs[1][0], shallow=False)
        assert filecmp.cmp(pairs[0][1], pairs[1][1], shallow=False)

    def test_tol_override_rejects_nonsense(self, tmp_path):
        cfg = _config(tmp_path)
        assert cli.main(["solve", cfg, "--tol", "-1"]) == cli.EXIT_CONFIG


class TestSweep:
    def _quartic_config(self, tmp_path):
        return _config(
            tmp_path,
            name="quartic.json",
            nonlinearity={
                "builtin": "power",
                "params": {"a": 1.0, "b": 1.0, "s": 4.0, "r": 4.0},
            },
            solver={"starts": 4},
        )

    def test_grid_validation(self, tmp_path):
        cfg = self._quartic_config(tmp_path)
        out = str(tmp_path / "sweep.csv")
        args = ["sweep", cfg, "--output", out]
        assert cli.main(args + ["--lambda-min", "2", "--lambda-max", "1"]) == cli.EXIT_CONFIG
        assert cli.main(args + ["--lambda-min", "-1", "--lambda-max", "1"]) == cli.EXIT_CONFIG
        assert (
            cli.main(
                args + ["--lambda-min", "1", "--lambda-max", "2", "--steps", "0"]
            )
            == cli.EXIT_CONFIG
        )

    def test_sweep_rows_and_estimate(self, tmp_path):
        cfg = self._quartic_config(tmp_path)
        out = str(tmp_path / "sweep.csv")
        code = cli.main(
            [
                "sweep",
                cfg,
                "--lambda-min",
                "0.5",
                "--lambda-max",
                "1.5",
                "--steps",
                "2",
                "--output",
                out,
            ]
        )
        assert code == cli.EXIT_OK
        lines = open(out).read().splitlines()
        assert lines[0] == "lambda,count,nontrivial_count,min_action"
        data = [ln for ln in lines if not ln.startswith("#")][1:]
        assert len(data) == 2
        # zero plus the pair of alternating solutions at every lambda
        for ln in data:
            _, count, nontriv, _ = ln.split(",")
            assert int(count) >= 3
            assert int(nontriv) >= 2
        assert lines[-1] == "# A_estimate: 0.5,1.5"

    def test_single_point_grid(self, tmp_path):
        cfg = self._quartic_config(tmp_path)
        out = str(tmp_path / "one.csv")
        code = cli.main(
            [
                "sweep",
                cfg,
                "--lambda-min",
                "1.0",
                "--lambda-max",
                "2.0",
                "--steps",
                "1",
                "--output",
                out,
            ]
        )
        assert code == cli.EXIT_OK
        data = [
            ln for ln in open(out).read().splitlines() if not ln.startswith("#")
        ][1:]
        assert len(data) == 1
        assert data[0].startswith("1.0,")


class TestGradcheck:
    def test_passes_on_consistent_derivatives(self, tmp_path):
        cfg = _config(tmp_path)
        out = str(tmp_path / "grad.json")
        assert (
            cli.main(["gradcheck", cfg, "--points", "25", "--output", out])
            == cli.EXIT_OK
        )
        payload = json.loads(open(out).read())
        assert payload["passed"] is True
        assert payload["max_relative_error"] <= 1e-5
        assert payload["points"] == 25

    def test_detects_corrupted_derivative(self, tmp_path, monkeypatch, capsys):
        real = make_builtin("power", 2, {"a": 1.0, "b": 1.0, "s": 2.0, "r": 2.0})
        scale = 1.02

        broken_nl = Nonlinearity(
            m=real.nonlinearity.m,
            F=real.nonlinearity.F,
            F2_prime=real.nonlinearity.F2_prime,
            F3_prime=lambda k, u1, u2: scale * real.nonlinearity.F3_prime(k, u1, u2),
            n=real.nonlinearity.n,
            name="power",
        )
        broken = BuiltinSpec(
            real.name, real.params, broken_nl, growth=real.growth
        )
        monkeypatch.setattr(cli, "make_builtin", lambda *a, **k: broken)

        cfg = _config(tmp_path)
        out = str(tmp_path / "grad.json")
        code = cli.main(["gradcheck", cfg, "--points", "10", "--output", out])
        assert code == cli.EXIT_COMPUTE
        payload = json.loads(open(out).read())
        assert payload["passed"] is False
        assert payload["max_relative_error"] > 1e-5
        assert payload["worst_point"] is not None
        assert "worst point" in capsys.readouterr().err
