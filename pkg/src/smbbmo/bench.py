"""Seeded benchmark batches, CSV output and the ``smbbmo-bench`` command line.

Every (problem, run) pair gets its own seed derived from the master seed;
with shared starts, all algorithms of a run begin at the same point.
"""

import argparse
import csv
import logging
import os
import re
import sys
import zlib
from dataclasses import dataclass, field, fields, replace
from typing import List, Optional, Sequence

import numpy as np

from .problems import (
    LARGE_PROBLEMS,
    QuadraticSpec,
    available_problems,
    make_quadratic,
    registry_lookup,
    sample_start,
)
from .solver import RunRecord, SolverConfig, solve

__all__ = [
    "BenchmarkPlan",
    "SummaryRow",
    "PlanError",
    "resolve_problem",
    "run_seed",
    "run_plan",
    "summarize",
    "emit_csv",
    "emit_front",
    "load_config",
    "cli_main",
    "RUNS_HEADER",
    "SUMMARY_HEADER",
]

log = logging.getLogger(__name__)

ALGORITHMS = ("smbbmo", "bbdmo")
RUNS_HEADER = ["problem", "algo", "run", "seed", "status", "iters", "fevals", "gevals", "time_ms"]
SUMMARY_HEADER = ["problem", "algo", "runs", "conv_rate", "mean_iters", "mean_fevals",
                  "mean_gevals", "mean_time_ms"]


class PlanError(ValueError):
    """Invalid benchmark plan or configuration."""


@dataclass
class BenchmarkPlan:
    problems: Sequence[str]
    algorithms: Sequence[str] = ALGORITHMS
    runs: int = 200
    master_seed: int = 0
    shared_starts: bool = True
    out_dir: Optional[str] = None
    emit_front: bool = False
    allow_large: bool = False
    timing: bool = True
    config: SolverConfig = field(default_factory=SolverConfig)

    def validate(self):
        if self.runs < 1:
            raise PlanError("runs must be at least 1")
        if not self.problems:
            raise PlanError("no problems given")
        if not self.algorithms:
            raise PlanError("no algorithms given")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise PlanError(f"unknown algorithm(s) {bad}; choose from {ALGORITHMS}")
        for name in self.problems:
            if name in LARGE_PROBLEMS and not self.allow_large:
                raise PlanError(f"{name} is a large problem; pass --large to include it")


@dataclass
class RunResult:
    """A solver record tagged with its place in the plan."""

    problem: str
    algo: str
    run: int
    seed: int
    record: RunRecord


@dataclass
class SummaryRow:
    problem: str
    algo: str
    runs: int
    conv_rate: float
    mean_iters: float
    mean_fevals: float
    mean_gevals: float
    mean_time_ms: float


_QP_RE = re.compile(r"^qp:(\d+),([^,]+),([^,]+)$")


def _stable_hash(text):
    return zlib.crc32(text.encode("utf-8"))


def resolve_problem(name, master_seed=0):
    """Registry name, or ``qp:n,k1,k2`` for a generated quadratic.

    Generated instances take their seed from the problem string and the
    master seed, so a plan is reproducible end to end.
    """
    match = _QP_RE.match(name)
    if match is None:
        try:
            return registry_lookup(name)
        except KeyError as exc:
            raise PlanError(str(exc.args[0])) from None
    try:
        n = int(match.group(1))
        kappa = (float(match.group(2)), float(match.group(3)))
        seed = np.random.SeedSequence([master_seed, _stable_hash(name)]).generate_state(1)[0]
        return make_quadratic(QuadraticSpec(n=n, kappa=kappa, seed=int(seed), name=name))
    except ValueError as exc:
        raise PlanError(f"bad quadratic spec {name!r}: {exc}") from None


def run_seed(master_seed, problem, run):
    """Seed of the starting point for run ``run`` of ``problem``."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(_stable_hash(problem), run))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def run_plan(plan: BenchmarkPlan):
    """Run every (problem, run, algorithm) triple of the plan.

    Returns
    -------
    results : list of RunResult
        Sorted by problem, algorithm and run index.
    rows : list of SummaryRow
    """
    plan.validate()
    results = []
    for pname in plan.problems:
        problem = resolve_problem(pname, plan.master_seed)
        for run in range(plan.runs):
            for algo in plan.algorithms:
                key = pname if plan.shared_starts else f"{pname}/{algo}"
                seed = run_seed(plan.master_seed, key, run)
                x0 = sample_start(problem, np.random.default_rng(seed))
                rec = solve(problem, x0, plan.config, algo)
                results.append(RunResult(pname, algo, run, seed, rec))
        log.info("finished %s (%d runs)", pname, plan.runs)
    results.sort(key=lambda r: (r.problem, r.algo, r.run))
    return results, summarize(results)


def summarize(results) -> List[SummaryRow]:
    """Per (problem, algo) means over all runs, non-converged runs included."""
    groups = {}
    for res in results:
        groups.setdefault((res.problem, res.algo), []).append(res.record)
    rows = []
    for (pname, algo), recs in sorted(groups.items()):
        rows.append(SummaryRow(
            problem=pname, algo=algo, runs=len(recs),
            conv_rate=float(np.mean([r.converged for r in recs])),
            mean_iters=float(np.mean([r.iters for r in recs])),
            mean_fevals=float(np.mean([r.fevals for r in recs])),
            mean_gevals=float(np.mean([r.gevals for r in recs])),
            mean_time_ms=float(np.mean([1e3 * r.wall_time for r in recs])),
        ))
    return rows


def _fmt(value):
    return f"{value:.6g}"


def emit_csv(results, rows, path, timing=True):
    """Write ``runs.csv`` and ``summary.csv`` into directory ``path``.

    Rows are sorted by (problem, algo, run); floats keep six significant
    digits.  With ``timing=False`` the time columns are left empty so that
    repeated invocations produce identical bytes.
    """
    os.makedirs(path, exist_ok=True)
    ordered = sorted(results, key=lambda r: (r.problem, r.algo, r.run))
    with open(os.path.join(path, "runs.csv"), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RUNS_HEADER)
        for res in ordered:
            rec = res.record
            writer.writerow([res.problem, res.algo, res.run, res.seed, rec.status, rec.iters,
                             rec.fevals, rec.gevals,
                             _fmt(1e3 * rec.wall_time) if timing else ""])
    with open(os.path.join(path, "summary.csv"), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for row in sorted(rows, key=lambda r: (r.problem, r.algo)):
            writer.writerow([row.problem, row.algo, row.runs, _fmt(row.conv_rate),
                             _fmt(row.mean_iters), _fmt(row.mean_fevals), _fmt(row.mean_gevals),
                             _fmt(row.mean_time_ms) if timing else ""])


def front_filename(problem, algo):
    safe = re.sub(r"[^A-Za-z0-9._-]+", "_", problem)
    return f"front_{safe}_{algo}.csv"


def emit_front(results, path):
    """Write final objective values ``f1,f2`` per (problem, algo), one row per run."""
    os.makedirs(path, exist_ok=True)
    groups = {}
    for res in sorted(results, key=lambda r: (r.problem, r.algo, r.run)):
        if res.record.F is None:
            continue
        if res.record.F.shape != (2,):
            raise ValueError(f"{res.problem} is not bi-objective")
        groups.setdefault((res.problem, res.algo), []).append(res.record.F)
    written = []
    for (pname, algo), values in groups.items():
        fname = os.path.join(path, front_filename(pname, algo))
        with open(fname, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["f1", "f2"])
            for f1, f2 in values:
                writer.writerow([repr(float(f1)), repr(float(f2))])
        written.append(fname)
    return written


# ---------------------------------------------------------------------------
# Configuration files and command line


def _parse_bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config(text, base=None) -> SolverConfig:
    """Parse ``key = value`` lines (``#`` starts a comment) into a config."""
    base = base or SolverConfig()
    kinds = {f.name: f.default for f in fields(SolverConfig)}
    updates = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PlanError(f"config line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in kinds:
            raise PlanError(f"config line {lineno}: unknown key {key!r}")
        default = kinds[key]
        try:
            if isinstance(default, bool):
                updates[key] = _parse_bool(value)
            elif isinstance(default, int) or key == "fw_max_iter":
                updates[key] = None if value.lower() == "none" else int(value)
            else:
                updates[key] = float(value)
        except ValueError as exc:
            raise PlanError(f"config line {lineno}: {exc}") from None
    try:
        return replace(base, **updates)
    except ValueError as exc:
        raise PlanError(f"invalid configuration: {exc}") from None


def load_config(path, base=None) -> SolverConfig:
    with open(path) as fh:
        return parse_config(fh.read(), base)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(
        prog="smbbmo-bench",
        description="Run seeded SMBBMO/BBDMO benchmark batches and write CSV statistics.",
    )
    parser.add_argument("--problem", action="append", required=True, metavar="NAME|qp:n,k1,k2",
                        help="problem to run (repeatable); registered: "
                             + ", ".join(available_problems()))
    parser.add_argument("--algo", default="all", choices=["smbbmo", "bbdmo", "all"])
    parser.add_argument("--runs", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--max-iters", type=int, default=None)
    parser.add_argument("--out", default="bench-out", metavar="DIR")
    parser.add_argument("--emit-front", action="store_true",
                        help="also write final objective values per problem and algorithm")
    parser.add_argument("--audit", action="store_true", help="check invariants at every iteration")
    parser.add_argument("--config", metavar="FILE", help="key = value overrides of solver settings")
    parser.add_argument("--large", action="store_true", help="allow QPg and QPh (n=1000)")
    parser.add_argument("--no-timing", action="store_true",
                        help="leave time columns empty for byte-reproducible output")
    parser.add_argument("--independent-starts", action="store_true",
                        help="draw a separate start per algorithm")
    return parser


def cli_main(argv=None) -> int:
    """Entry point; returns 0 on success, 1 on plan errors, 2 on I/O errors."""
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1

    try:
        cfg = load_config(args.config) if args.config else SolverConfig()
    except OSError as exc:
        print(f"smbbmo-bench: cannot read config: {exc}", file=sys.stderr)
        return 2
    except PlanError as exc:
        print(f"smbbmo-bench: {exc}", file=sys.stderr)
        return 1
    try:
        if args.max_iters is not None:
            cfg = replace(cfg, max_iters=args.max_iters)
        if args.audit:
            cfg = replace(cfg, audit=True)
        plan = BenchmarkPlan(
            problems=args.problem,
            algorithms=ALGORITHMS if args.algo == "all" else (args.algo,),
            runs=args.runs, master_seed=args.seed, shared_starts=not args.independent_starts,
            out_dir=args.out, emit_front=args.emit_front, allow_large=args.large,
            timing=not args.no_timing, config=cfg,
        )
        results, rows = run_plan(plan)
    except (PlanError, ValueError) as exc:
        print(f"smbbmo-bench: {exc}", file=sys.stderr)
        return 1

    try:
        emit_csv(results, rows, args.out, timing=plan.timing)
        if args.emit_front:
            emit_front(results, args.out)
    except OSError as exc:
        print(f"smbbmo-bench: cannot write output: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"smbbmo-bench: {exc}", file=sys.stderr)
        return 1

    for row in rows:
        print(f"{row.problem:>14} {row.algo:>7}  conv={row.conv_rate:6.1%}  "
              f"iter={row.mean_iters:8.2f}  feval={row.mean_fevals:8.2f}  "
              f"time={row.mean_time_ms:9.2f}ms")
    if cfg.audit:
        bad = sum(len(r.record.violations) for r in results)
        print(f"audit: {bad} invariant violation(s)")
    return 0


def main():
    logging.basicConfig(level=logging.WARNING)
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
