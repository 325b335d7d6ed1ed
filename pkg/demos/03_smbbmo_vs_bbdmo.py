#!/usr/bin/env python
"""Compare the subspace method with the plain BB descent method.

Both solvers share the same starting points.  The gap between them grows
with the condition number of the Hessians.
"""
import numpy as np

from smbbmo.bench import BenchmarkPlan, run_plan
from smbbmo.problems import registry_lookup, sample_start
from smbbmo.solver import SolverConfig, bbdmo_solve, smbbmo_solve

# One solve in detail, with the iteration trace switched on.
prob = registry_lookup("QPb")
x0 = sample_start(prob, np.random.default_rng(0))
rec = smbbmo_solve(prob, x0, SolverConfig(trace=True, audit=True))
print(f"QPb: {rec.status} after {rec.iters} iterations, "
      f"{rec.fevals} F-evaluations, {rec.gevals} Jacobians")
print("F(x0) =", prob.f(x0), "-> F(x*) =", rec.F)
print("iteration kinds:", "".join("S" if s.kind == "subspace" else "B" for s in rec.trace))
print("audit violations:", rec.violations)

for snap in rec.trace[:4]:
    print(f"  k={snap.k} {snap.kind:8} D0={snap.D0:+.3e} t={snap.t:.3g}")

rec_bb = bbdmo_solve(prob, x0)
print(f"BBDMO from the same start: {rec_bb.status} after {rec_bb.iters} iterations")

# Small batches over the quadratic family; larger n and kappa widen the gap.
print()
print(f"{'problem':8} {'SMBBMO':>8} {'BBDMO':>8}")
for name in ("QPa", "QPb", "QPc", "QPd"):
    _, rows = run_plan(BenchmarkPlan(problems=[name], runs=10, master_seed=1))
    it = {r.algo: r.mean_iters for r in rows}
    print(f"{name:8} {it['smbbmo']:8.1f} {it['bbdmo']:8.1f}")
