"""Search directions: Barzilai-Borwein scales, the BB direction and the
two-dimensional subspace model with its modified Cholesky repair.

Gradient bundles are ``(m, n)`` arrays.  Scales are length-``m`` vectors.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateSubspace, WolfeGuaranteeBroken
from .problems import gradients
from .simplex_qp import DEFAULT_FW_TOL, MinMaxInstance, dual_solve

__all__ = [
    "SubspaceModel",
    "DirectionResult",
    "IterateMemory",
    "bb_scale",
    "bb_scales",
    "subspace_scales",
    "bb_direction",
    "aggregate_y",
    "aggregate_yv",
    "rho1",
    "rho2",
    "assemble_model",
    "modified_cholesky",
    "subspace_direction",
    "directional_value",
]


def _clamp(z, bounds):
    lo, hi = bounds
    return max(lo, min(z, hi))


def bb_scale(s, y_i, denom, ynorm_denom, bounds=(1e-3, 1e3)):
    """Three-branch Barzilai-Borwein scale for one objective.

    ``<s, y_i> / denom`` when the curvature ``<s, y_i>`` is positive,
    ``||y_i|| / ynorm_denom`` when it is negative, and the lower bound when it
    vanishes; the first two are clamped to ``bounds``.  ``denom`` is
    ``||s||^2`` (plain scales) or ``rho2`` (subspace scales), ``ynorm_denom``
    is ``||s||`` or the norm of the aggregated difference.  A zero
    ``ynorm_denom`` sends the negative branch to the upper bound.
    """
    sy = float(np.dot(s, y_i))
    if sy > 0:
        return _clamp(sy / denom, bounds)
    if sy < 0:
        ny = float(np.linalg.norm(y_i))
        return _clamp(ny / ynorm_denom if ynorm_denom > 0 else np.inf, bounds)
    return bounds[0]


def bb_scales(s, Y, bounds=(1e-3, 1e3)):
    """Per-objective scales from the last step ``s`` and gradient differences ``Y``."""
    ss = float(s @ s)
    ns = np.sqrt(ss)
    return np.array([bb_scale(s, y, ss, ns, bounds) for y in Y])


def subspace_scales(s, Y, rho2_value, y, bounds=(1e-3, 1e3)):
    """Preconditioned scales: curvature measured against ``rho2`` and ``||y||``."""
    ny = float(np.linalg.norm(y))
    return np.array([bb_scale(s, yi, rho2_value, ny, bounds) for yi in Y])


def directional_value(grads, alpha, d) -> float:
    """``max_i <grad_i / alpha_i, d>``."""
    return float(np.max((grads @ d) / alpha))


@dataclass
class DirectionResult:
    """A search direction and the subproblem data behind it.

    ``theta`` is the optimal value of the min-max subproblem and ``D_value``
    its closed form ``-w^T M w``; at an exact solution ``D_value`` equals the
    directional value of ``d`` and ``theta = D_value / 2``.
    """

    d: np.ndarray
    lam: np.ndarray
    theta: float
    D_value: float
    kind: str
    mu: Optional[float] = None
    nu: Optional[float] = None
    gap: float = 0.0


@dataclass
class IterateMemory:
    """What an iteration hands to the next one."""

    s: np.ndarray
    Y: np.ndarray
    prev_grads: np.ndarray
    prev_lambda: np.ndarray
    prev_alpha_bar: np.ndarray
    prev_direction: Optional[np.ndarray] = None
    prev_step: float = 0.0
    prev_D_value: float = 0.0


def bb_direction(grads, alpha, tol=DEFAULT_FW_TOL, max_iter=None) -> DirectionResult:
    """Barzilai-Borwein descent direction.

    Minimizes ``max_i <grad_i, v> / alpha_i + 1/2 ||v||^2``; ``v = 0`` exactly
    at Pareto critical points.
    """
    inst = MinMaxInstance(grads / alpha[:, None])
    sol = dual_solve(inst, tol=tol, max_iter=max_iter)
    vv = float(sol.w @ sol.w)
    return DirectionResult(d=sol.w, lam=sol.lam, theta=-0.5 * vv, D_value=-vv,
                           kind="bb", gap=sol.gap)


def aggregate_y(grads_k, grads_km1, lambda_prev, alpha_bar_prev):
    """``sum_i lam_i / alpha_i (grad_i(x^k) - grad_i(x^{k-1}))``."""
    w = np.asarray(lambda_prev) / np.asarray(alpha_bar_prev)
    return w @ (grads_k - grads_km1)


def aggregate_yv(problem, x_k, v_k, grads_k, lambda_prev, alpha_bar_prev, counters=None):
    """Finite-difference curvature along ``v_k``; costs one gradient bundle at ``x_k - v_k``."""
    back = gradients(problem, x_k - v_k, counters)
    return aggregate_y(grads_k, back, lambda_prev, alpha_bar_prev)


def rho2(s, y, D_prev_value, grads_km1, lambda_prev, alpha_bar_prev):
    """Curvature along the last step, kept positive by the Wolfe conditions.

    ``D_prev_value`` is the scaled directional value of ``s`` at the current
    point under the previous scales.  It is only used when ``<s, y> <= 0``.

    Raises
    ------
    WolfeGuaranteeBroken
        If the fallback value is not positive.
    """
    sy = float(s @ y)
    if sy > 0:
        return sy
    weights = np.asarray(lambda_prev) / np.asarray(alpha_bar_prev)
    value = D_prev_value - float(weights @ (grads_km1 @ s))
    if not value > 0:
        raise WolfeGuaranteeBroken(value)
    return value


def rho1(v, y_v):
    """``<v, y_v>`` if positive, else ``||v|| ||y_v||``."""
    vy = float(v @ y_v)
    if vy > 0:
        return vy
    return float(np.linalg.norm(v) * np.linalg.norm(y_v))


@dataclass
class SubspaceModel:
    """Data of the two-dimensional subproblem on ``span{v, s}``.

    Attributes
    ----------
    a : ndarray, shape (m, 2)
        Rows ``(<g_i / abar_i, v>, <g_i / abar_i, s>)``.
    H : ndarray, shape (2, 2)
        Curvature model (repaired or not, see :func:`modified_cholesky`).
    D : ndarray, shape (2,)
        Diagonal scaling ``(||v||, ||s||)``.
    """

    a: np.ndarray
    H: np.ndarray
    D: np.ndarray
    rho1: float
    rho2: float


def model_matrix(v, y, rho1_value, rho2_value):
    vy = float(v @ y)
    return np.array([[rho1_value, vy], [vy, rho2_value]])


def assemble_model(grads_k, alpha_bar, v, s, y, rho1_value, rho2_value) -> SubspaceModel:
    """Build the unrepaired 2x2 model on ``span{v, s}``."""
    nv = float(np.linalg.norm(v))
    ns = float(np.linalg.norm(s))
    if not (nv > 0 and ns > 0):
        raise DegenerateSubspace(f"||v||={nv}, ||s||={ns}")
    if not rho2_value > 0:
        raise ValueError(f"rho2 must be positive, got {rho2_value}")
    scaled = grads_k / alpha_bar[:, None]
    a = np.column_stack([scaled @ v, scaled @ s])
    return SubspaceModel(a=a, H=model_matrix(v, y, rho1_value, rho2_value),
                         D=np.array([nv, ns]), rho1=rho1_value, rho2=rho2_value)


def modified_cholesky(H, D, c1=1e-6, c2=1e6):
    """Repair a symmetric 2x2 ``H`` into a positive definite matrix.

    Works on ``Hs = D^{-1} H D^{-1}``: pivots of its Cholesky factor that do
    not exceed ``c1`` are replaced by ``sqrt(c2)``, and ``D L L^T D`` is
    returned.  ``D`` may be a length-2 vector or a diagonal matrix.

    Note the first pivot test compares ``sqrt(Hs_11)`` with ``c1`` while the
    second compares ``Hs_22 - L_21^2`` itself.
    """
    H = np.asarray(H, dtype=float)
    D = np.asarray(D, dtype=float)
    if D.ndim == 2:
        D = np.diag(D)
    if not np.all(D > 0):
        raise ValueError("scaling must be strictly positive")
    Hs = H / np.outer(D, D)
    l11 = np.sqrt(Hs[0, 0]) if Hs[0, 0] > 0 and np.sqrt(Hs[0, 0]) > c1 else np.sqrt(c2)
    l21 = Hs[1, 0] / l11
    r = Hs[1, 1] - l21 * l21
    l22 = np.sqrt(r) if r > c1 else np.sqrt(c2)
    L = np.array([[l11, 0.0], [l21, l22]])
    return (L @ L.T) * np.outer(D, D)


def subspace_direction(model: SubspaceModel, v, s, tol=DEFAULT_FW_TOL,
                       max_iter=None) -> DirectionResult:
    """Solve the subspace subproblem and lift ``(mu, nu)`` back to ``R^n``.

    ``model.H`` must already be positive definite.
    """
    sol = dual_solve(MinMaxInstance(model.a, model.H), tol=tol, max_iter=max_iter)
    mu, nu = float(sol.w[0]), float(sol.w[1])
    d = mu * v + nu * s
    return DirectionResult(d=d, lam=sol.lam, theta=sol.theta, D_value=2.0 * sol.theta,
                           kind="subspace", mu=mu, nu=nu, gap=sol.gap)
