"""Subspace minimization Barzilai-Borwein methods for multiobjective optimization."""

from .errors import (
    DegenerateSubspace,
    EvaluationFault,
    LineSearchFailure,
    MatrixError,
    WolfeGuaranteeBroken,
)
from .problems import (
    EvalCounters,
    Problem,
    QuadraticProblem,
    QuadraticSpec,
    evaluate,
    gradients,
    make_quadratic,
    registry_lookup,
    sample_start,
)
from .simplex_qp import MinMaxInstance, DualSolution, closed_form_m2, dual_solve, primal_value
from .linesearch import LineSearchConfig, check_wolfe, wolfe_search
from .solver import RunRecord, SolverConfig, audit_iteration, bbdmo_solve, smbbmo_solve, solve

__version__ = "0.1.0"
