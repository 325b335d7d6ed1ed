"""Wolfe line search for scaled multiobjective descent directions.

A step ``t`` is accepted when every objective decreases enough relative to
its scale,

    (F_i(x + t d) - F_i(x)) / abar_i <= sigma1 * t * D0      for all i,

and the scaled directional value has risen enough,

    max_i <grad F_i(x + t d) / abar_i, d> >= sigma2 * D0,

where ``D0 = max_i <grad F_i(x) / abar_i, d> < 0``.
"""

from dataclasses import dataclass

import numpy as np

from .direction import directional_value
from .errors import LineSearchFailure
from .problems import evaluate, gradients

__all__ = ["LineSearchConfig", "LineSearchResult", "wolfe_search", "check_wolfe"]


@dataclass(frozen=True)
class LineSearchConfig:
    sigma1: float = 1e-4
    sigma2: float = 0.1
    t_init: float = 1.0
    expand: float = 2.0
    max_evals: int = 50
    t_max: float = 1e10

    def __post_init__(self):
        if not 0 < self.sigma1 <= self.sigma2 < 1:
            raise ValueError(f"need 0 < sigma1 <= sigma2 < 1, got {self.sigma1}, {self.sigma2}")
        if not 0 < self.t_init <= self.t_max:
            raise ValueError("need 0 < t_init <= t_max")
        if not self.expand > 1:
            raise ValueError("expand must exceed 1")
        if self.max_evals < 1:
            raise ValueError("max_evals must be positive")


@dataclass
class LineSearchResult:
    t: float
    x_new: np.ndarray
    F_new: np.ndarray
    grads_new: np.ndarray
    D_exit: float
    fevals: int
    gevals: int


def armijo_ok(F_x, F_new, t, D0, alpha_bar, sigma1):
    return bool(np.all((F_new - F_x) / alpha_bar <= sigma1 * t * D0))


def check_wolfe(F_x, F_new, t, D0, D_new, alpha_bar, sigma1, sigma2):
    """Re-evaluate both Wolfe conditions from raw values.

    Returns
    -------
    (bool, bool)
        Sufficient decrease for all objectives, and the curvature condition.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    F_x = np.asarray(F_x, dtype=float)
    F_new = np.asarray(F_new, dtype=float)
    alpha_bar = np.asarray(alpha_bar, dtype=float)
    return armijo_ok(F_x, F_new, t, D0, alpha_bar, sigma1), bool(D_new >= sigma2 * D0)


def wolfe_search(problem, x, F_x, d, alpha_bar, D0, cfg=None, counters=None) -> LineSearchResult:
    """Find a step satisfying both Wolfe conditions along ``d``.

    Starts at ``cfg.t_init``.  While the sufficient decrease condition holds
    but the curvature condition does not, the step is expanded by
    ``cfg.expand``; once a step violating sufficient decrease is seen, the
    bracket is bisected.  Each trial costs one objective bundle, plus one
    gradient bundle when sufficient decrease holds.

    Raises
    ------
    LineSearchFailure
        After ``cfg.max_evals`` trials, or if the bracket cannot grow past
        ``cfg.t_max``.
    EvaluationFault
        On non-finite trial values.
    """
    cfg = cfg or LineSearchConfig()
    if not D0 < 0:
        raise ValueError(f"not a descent direction: D0={D0}")
    alpha_bar = np.asarray(alpha_bar, dtype=float)
    lo, hi = 0.0, None
    t = cfg.t_init
    best = None
    nf = ng = 0
    for _ in range(cfg.max_evals):
        x_new = x + t * d
        F_new = evaluate(problem, x_new, counters)
        nf += 1
        if armijo_ok(F_x, F_new, t, D0, alpha_bar, cfg.sigma1):
            best = t if best is None else max(best, t)
            G_new = gradients(problem, x_new, counters)
            ng += 1
            D_new = directional_value(G_new, alpha_bar, d)
            if D_new >= cfg.sigma2 * D0:
                return LineSearchResult(t=t, x_new=x_new, F_new=F_new, grads_new=G_new,
                                        D_exit=D_new, fevals=nf, gevals=ng)
            lo = t
        else:
            hi = t
        if hi is None:
            if t >= cfg.t_max:
                raise LineSearchFailure(best, "step exceeded t_max")
            t = min(cfg.expand * t, cfg.t_max)
        else:
            t = 0.5 * (lo + hi)
    raise LineSearchFailure(best, f"no Wolfe step within {cfg.max_evals} trials")
