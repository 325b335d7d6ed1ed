import csv
import os

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from smbbmo.bench import (
    RUNS_HEADER,
    SUMMARY_HEADER,
    BenchmarkPlan,
    PlanError,
    RunResult,
    cli_main,
    emit_csv,
    emit_front,
    front_filename,
    parse_config,
    resolve_problem,
    run_plan,
    run_seed,
    summarize,
)
from smbbmo.problems import quadratic_problem, sample_start
from smbbmo.solver import STOP_TOL, SolverConfig, solve


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


class TestPlan:
    def test_validation(self):
        with pytest.raises(PlanError):
            BenchmarkPlan(problems=["QPa"], runs=0).validate()
        with pytest.raises(PlanError):
            BenchmarkPlan(problems=[]).validate()
        with pytest.raises(PlanError):
            BenchmarkPlan(problems=["QPa"], algorithms=["newton"]).validate()

    def test_large_problems_gated(self):
        with pytest.raises(PlanError, match="--large"):
            BenchmarkPlan(problems=["QPg"]).validate()
        BenchmarkPlan(problems=["QPh"], allow_large=True).validate()

    def test_unknown_problem(self):
        with pytest.raises(PlanError):
            resolve_problem("QPz")
        with pytest.raises(PlanError):
            resolve_problem("qp:10,0.5,2")

    def test_generated_quadratic(self):
        prob = resolve_problem("qp:100,1e2,1e2", 3)
        assert (prob.n, prob.m) == (100, 2)
        again = resolve_problem("qp:100,1e2,1e2", 3)
        np.testing.assert_array_equal(prob.A, again.A)
        other = resolve_problem("qp:100,1e2,1e2", 4)
        assert not np.array_equal(prob.b, other.b)

    def test_seeds_are_stable_and_distinct(self):
        seeds = {run_seed(0, "QPa", r) for r in range(100)}
        assert len(seeds) == 100
        assert run_seed(0, "QPa", 5) == run_seed(0, "QPa", 5)
        assert run_seed(0, "QPa", 5) != run_seed(1, "QPa", 5)
        assert run_seed(0, "QPa", 5) != run_seed(0, "QPb", 5)
        assert all(0 <= s < 2 ** 63 for s in seeds)


class TestRunPlan:
    def test_shared_starts(self):
        results, _ = run_plan(BenchmarkPlan(problems=["QPa"], runs=4, master_seed=11))
        by_run = {}
        for res in results:
            by_run.setdefault(res.run, []).append(res)
        for pair in by_run.values():
            assert len(pair) == 2
            assert pair[0].seed == pair[1].seed
            np.testing.assert_array_equal(pair[0].record.x0, pair[1].record.x0)

    def test_independent_starts(self):
        results, _ = run_plan(BenchmarkPlan(problems=["QPa"], runs=2, shared_starts=False))
        sm = [r for r in results if r.algo == "smbbmo"]
        bb = [r for r in results if r.algo == "bbdmo"]
        assert all(a.seed != b.seed for a, b in zip(sm, bb))

    def test_start_matches_seed(self):
        results, _ = run_plan(BenchmarkPlan(problems=["QPb"], algorithms=["bbdmo"], runs=3))
        prob = resolve_problem("QPb")
        for res in results:
            np.testing.assert_array_equal(res.record.x0,
                                          sample_start(prob, np.random.default_rng(res.seed)))

    def test_deterministic_records(self):
        plan = BenchmarkPlan(problems=["QPa", "JOS1-like"], runs=3, master_seed=5)
        r1, _ = run_plan(plan)
        r2, _ = run_plan(plan)
        key = [(r.problem, r.algo, r.run, r.seed, r.record.status, r.record.iters,
                r.record.fevals, r.record.gevals) for r in r1]
        assert key == [(r.problem, r.algo, r.run, r.seed, r.record.status, r.record.iters,
                        r.record.fevals, r.record.gevals) for r in r2]
        assert key == sorted(key, key=lambda t: (t[0], t[1], t[2]))


class TestEmit:
    def test_empty_plan_gives_headers(self, tmp_path):
        emit_csv([], summarize([]), str(tmp_path))
        assert read_csv(tmp_path / "runs.csv") == [RUNS_HEADER]
        assert read_csv(tmp_path / "summary.csv") == [SUMMARY_HEADER]

    def test_single_run_summary_equals_run(self, tmp_path):
        results, rows = run_plan(BenchmarkPlan(problems=["QPa"], algorithms=["smbbmo"], runs=1))
        emit_csv(results, rows, str(tmp_path))
        run = dict(zip(RUNS_HEADER, read_csv(tmp_path / "runs.csv")[1]))
        summ = dict(zip(SUMMARY_HEADER, read_csv(tmp_path / "summary.csv")[1]))
        assert summ["runs"] == "1" and summ["conv_rate"] == "1"
        assert summ["mean_iters"] == run["iters"]
        assert summ["mean_fevals"] == run["fevals"]
        assert summ["mean_gevals"] == run["gevals"]
        assert summ["mean_time_ms"] == run["time_ms"]

    def test_re_emit_is_byte_identical(self, tmp_path):
        results, rows = run_plan(BenchmarkPlan(problems=["QPb"], runs=3))
        emit_csv(results, rows, str(tmp_path / "a"))
        emit_csv(results, rows, str(tmp_path / "b"))
        for name in ("runs.csv", "summary.csv"):
            assert read_bytes(tmp_path / "a" / name) == read_bytes(tmp_path / "b" / name)

    def test_no_timing_leaves_time_empty(self, tmp_path):
        results, rows = run_plan(BenchmarkPlan(problems=["QPa"], runs=2, timing=False))
        emit_csv(results, rows, str(tmp_path), timing=False)
        assert all(r[-1] == "" for r in read_csv(tmp_path / "runs.csv")[1:])
        assert all(r[-1] == "" for r in read_csv(tmp_path / "summary.csv")[1:])

    def test_summary_recomputed_from_runs(self, tmp_path):
        results, rows = run_plan(BenchmarkPlan(problems=["QPa", "QPb"], runs=7, master_seed=2))
        emit_csv(results, rows, str(tmp_path))
        table = read_csv(tmp_path / "runs.csv")[1:]
        written = {(r[0], r[1]): r for r in read_csv(tmp_path / "summary.csv")[1:]}
        for row in rows:
            mine = [r for r in table if (r[0], r[1]) == (row.problem, row.algo)]
            assert row.runs == len(mine)
            conv = np.mean([r[4] == "converged" for r in mine])
            means = [np.mean([float(r[j]) for r in mine]) for j in (5, 6, 7)]
            assert abs(row.conv_rate - conv) <= 1e-9
            for got, want in zip((row.mean_iters, row.mean_fevals, row.mean_gevals), means):
                assert abs(got - want) <= 1e-9
            # the file keeps six significant digits
            on_disk = [float(x) for x in written[(row.problem, row.algo)][3:7]]
            np.testing.assert_allclose(on_disk, [conv, *means], rtol=5e-6)

    def test_front_of_translated_paraboloids(self, tmp_path):
        n = 2
        prob = quadratic_problem("pair", np.stack([np.eye(n)] * 2),
                                 np.stack([np.zeros(n), -2 * np.ones(n)]), -5, 5)
        rng = np.random.default_rng(0)
        results = []
        for run in range(30):
            rec = solve(prob, sample_start(prob, rng), SolverConfig(), "smbbmo")
            assert rec.converged
            results.append(RunResult("pair", "smbbmo", run, run, rec))
        (path,) = emit_front(results, str(tmp_path))
        assert os.path.basename(path) == front_filename("pair", "smbbmo")
        rows = read_csv(path)
        assert rows[0] == ["f1", "f2"] and len(rows) == 31

        def image(t):
            # critical set is x = t * 1 for t in [0, 2]
            return np.array([0.5 * n * t * t, 0.5 * n * t * t - 2 * n * t])

        for f1, f2 in rows[1:]:
            point = np.array([float(f1), float(f2)])
            best = minimize_scalar(lambda t: np.linalg.norm(image(t) - point),
                                   bounds=(0.0, 2.0), method="bounded",
                                   options={"xatol": 1e-12})
            assert best.fun <= 10 * np.sqrt(STOP_TOL)

    def test_front_rejects_three_objectives(self, tmp_path):
        prob = quadratic_problem("tri", np.stack([np.eye(2)] * 3), np.eye(3, 2), -1, 1)
        rec = solve(prob, np.zeros(2) + 0.3)
        with pytest.raises(ValueError):
            emit_front([RunResult("tri", "smbbmo", 0, 0, rec)], str(tmp_path))


class TestConfig:
    def test_parse(self):
        cfg = parse_config("""
            # repair bounds
            c1 = 1e-5
            max_iters = 50   # shorter
            audit = yes
            fw_max_iter = none
        """)
        assert (cfg.c1, cfg.max_iters, cfg.audit, cfg.fw_max_iter) == (1e-5, 50, True, None)
        assert cfg.c2 == SolverConfig().c2

    @pytest.mark.parametrize("text", ["nonsense", "colour = red", "max_iters = many",
                                      "sigma1 = 0.5", "audit = maybe"])
    def test_bad_config(self, text):
        with pytest.raises(PlanError):
            parse_config(text)


class TestCLI:
    def test_example_invocation(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = cli_main(["--problem", "QPa", "--algo", "all", "--runs", "5", "--seed", "7",
                         "--out", str(out)])
        assert code == 0
        rows = read_csv(out / "runs.csv")
        assert len(rows) == 1 + 10
        assert {r[1] for r in rows[1:]} == {"smbbmo", "bbdmo"}
        assert "QPa" in capsys.readouterr().out

    def test_generated_problem(self, tmp_path):
        code = cli_main(["--problem", "qp:100,1e2,1e2", "--algo", "smbbmo", "--runs", "1",
                         "--out", str(tmp_path)])
        assert code == 0
        assert read_csv(tmp_path / "runs.csv")[1][0] == "qp:100,1e2,1e2"

    def test_audit_and_front(self, tmp_path, capsys):
        code = cli_main(["--problem", "JOS1-like", "--runs", "3", "--audit", "--emit-front",
                         "--out", str(tmp_path)])
        assert code == 0
        assert "audit: 0 invariant violation(s)" in capsys.readouterr().out
        assert (tmp_path / front_filename("JOS1-like", "bbdmo")).exists()

    def test_no_arguments(self, capsys):
        assert cli_main([]) == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        assert cli_main(["--problem", "QPa", "--bogus"]) == 1

    def test_plan_errors(self, tmp_path, capsys):
        assert cli_main(["--problem", "QPg", "--out", str(tmp_path)]) == 1
        assert cli_main(["--problem", "nope", "--out", str(tmp_path)]) == 1
        assert cli_main(["--problem", "QPa", "--runs", "0", "--out", str(tmp_path)]) == 1

    def test_io_errors(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert cli_main(["--problem", "QPa", "--runs", "1", "--out", str(blocker / "sub")]) == 2
        assert cli_main(["--problem", "QPa", "--config", str(tmp_path / "missing.cfg")]) == 2

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "solver.cfg"
        cfg.write_text("max_iters = 2\n")
        code = cli_main(["--problem", "QPd", "--algo", "bbdmo", "--runs", "2",
                         "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert code == 0
        rows = read_csv(tmp_path / "o" / "runs.csv")[1:]
        assert all(r[4] == "max-iters" and r[5] == "2" for r in rows)

    def test_no_timing_runs_are_byte_identical(self, tmp_path):
        args = ["--problem", "QPa", "--problem", "QPb", "--runs", "4", "--no-timing"]
        assert cli_main(args + ["--out", str(tmp_path / "a")]) == 0
        assert cli_main(args + ["--out", str(tmp_path / "b")]) == 0
        for name in ("runs.csv", "summary.csv"):
            assert read_bytes(tmp_path / "a" / name) == read_bytes(tmp_path / "b" / name)
