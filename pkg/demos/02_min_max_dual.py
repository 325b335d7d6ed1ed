#!/usr/bin/env python
"""The min-max direction subproblem and its dual over the simplex.

min_w max_i <a_i, w> + w^T M w / 2 is solved through its dual
min_{lam in simplex} lam^T (a M^{-1} a^T) lam / 2, with w = -M^{-1} a^T lam.
"""
import numpy as np

from smbbmo.simplex_qp import MinMaxInstance, closed_form_m2, dual_solve, primal_value

# Two gradients pointing partly against each other.
a = np.array([[1.0, 0.2], [-0.4, 1.0]])
inst = MinMaxInstance(a)
sol = dual_solve(inst)
print("weights lam =", sol.lam)
print("direction w =", sol.w)
print("theta =", sol.theta, " primal =", primal_value(inst, sol.w), " gap =", sol.gap)

# Every objective decreases along w to first order.
print("<a_i, w> =", a @ sol.w)

# With two objectives the dual is a scalar problem with a closed form.
ref = closed_form_m2(inst)
print("closed-form lam =", ref.lam)

# Opposed gradients: no common descent direction, the point is critical.
crit = dual_solve(MinMaxInstance([[1.0, 0.0], [-1.0, 0.0]]))
print("opposed pair: w =", crit.w, "theta =", crit.theta)

# A non-identity metric changes the geometry but not the recipe.
M = np.array([[4.0, 1.0], [1.0, 2.0]])
sol_M = dual_solve(MinMaxInstance(a, M))
print("metric M: lam =", sol_M.lam, "w =", sol_M.w)
print("  theta = -w^T M w / 2:", np.isclose(sol_M.theta, -0.5 * sol_M.w @ M @ sol_M.w))
