"""Min-max quadratic subproblems solved through their simplex dual.

The primal problem is

    min_w  max_i <a_i, w> + 1/2 w^T M w

with ``M`` symmetric positive definite.  Its dual is

    min_{lam in simplex}  phi(lam) = 1/2 a(lam)^T M^{-1} a(lam),
    a(lam) = sum_i lam_i a_i,

and the primal solution is recovered as ``w = -M^{-1} a(lam)``.  The dual is
a small quadratic over the unit simplex, solved here by Frank-Wolfe with an
exact line search.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import MatrixError

__all__ = [
    "MinMaxInstance",
    "DualSolution",
    "dual_solve",
    "closed_form_m2",
    "primal_value",
    "dual_value",
    "DEFAULT_FW_TOL",
]

DEFAULT_FW_TOL = 1e-10


@dataclass(frozen=True)
class MinMaxInstance:
    """Coefficient vectors ``a`` (shape ``(m, p)``) and metric ``M`` (``(p, p)``).

    ``M=None`` stands for the identity and skips all factorizations.
    """

    a: np.ndarray
    M: Optional[np.ndarray] = None

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        object.__setattr__(self, "a", a)
        if self.M is None:
            return
        M = np.atleast_2d(np.asarray(self.M, dtype=float))
        if M.shape != (a.shape[1], a.shape[1]):
            raise ValueError(f"M has shape {M.shape}, expected {(a.shape[1],) * 2}")
        if np.max(np.abs(M - M.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(M))):
            raise MatrixError("M is not symmetric")
        object.__setattr__(self, "M", M)

    @property
    def metric(self):
        return np.eye(self.p) if self.M is None else self.M

    def norm2(self, w):
        """``w^T M w``."""
        return float(w @ w) if self.M is None else float(w @ self.M @ w)

    @property
    def m(self):
        return self.a.shape[0]

    @property
    def p(self):
        return self.a.shape[1]


@dataclass(frozen=True)
class DualSolution:
    """Result of a dual solve.

    Attributes
    ----------
    lam : ndarray
        Simplex weights.
    w : ndarray
        Primal minimizer ``-M^{-1} a(lam)``.
    theta : float
        Optimal value, ``-1/2 w^T M w``.
    gap : float
        Final Frank-Wolfe duality gap.  It also equals
        ``primal_value(w) - theta``.
    converged : bool
        Whether ``gap <= tol`` was reached.
    iters : int
    """

    lam: np.ndarray
    w: np.ndarray
    theta: float
    gap: float
    converged: bool = True
    iters: int = 0


def _factor(M):
    try:
        return cho_factor(M, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise MatrixError(f"M is not positive definite: {exc}") from exc


def _gram(inst):
    """``(G, Minv_aT)`` with ``G = a M^{-1} a^T``."""
    if inst.M is None:
        z = inst.a.T.copy()
    else:
        z = cho_solve(_factor(inst.M), inst.a.T)
    G = inst.a @ z
    return 0.5 * (G + G.T), z


def _finish(inst, z, lam, gap, converged, iters):
    w = -(z @ lam)
    theta = -0.5 * inst.norm2(w)
    return DualSolution(lam=lam, w=w, theta=theta, gap=float(gap),
                        converged=converged, iters=iters)


def dual_solve(inst: MinMaxInstance, tol=DEFAULT_FW_TOL, max_iter=None) -> DualSolution:
    """Solve the simplex dual by Frank-Wolfe with exact segment line search.

    Starts from uniform weights.  Stops when the Frank-Wolfe gap drops to
    ``tol``, when an iteration no longer changes the weights, or after
    ``max_iter`` iterations (default ``10 m + 200``).

    Raises
    ------
    MatrixError
        If ``M`` is not positive definite.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    m = inst.m
    if max_iter is None:
        max_iter = 10 * m + 200
    lam = np.full(m, 1.0 / m)
    if not np.any(inst.a):
        if inst.M is not None:
            _factor(inst.M)
        return DualSolution(lam=lam, w=np.zeros(inst.p), theta=0.0, gap=0.0)

    G, z = _gram(inst)
    grad = G @ lam
    gap = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        j = int(np.argmin(grad))
        quad = float(lam @ grad)
        gap = quad - grad[j]
        if gap <= tol:
            return _finish(inst, z, lam, gap, True, it - 1)
        # phi along lam + g (e_j - lam): slope -gap, curvature below.
        curv = G[j, j] - 2.0 * grad[j] + quad
        step = 1.0 if curv <= 0 else min(1.0, gap / curv)
        new = (1.0 - step) * lam
        new[j] += step
        new = np.maximum(new, 0.0)
        new /= new.sum()
        assert abs(new.sum() - 1.0) <= 1e-12 and np.all(new >= 0)
        if np.array_equal(new, lam):
            break
        lam = new
        grad = G @ lam

    j = int(np.argmin(grad))
    gap = float(lam @ grad - grad[j])
    return _finish(inst, z, lam, gap, gap <= tol, it)


def closed_form_m2(inst: MinMaxInstance) -> DualSolution:
    """Exact dual solution for two objectives.

    Minimizes ``phi(l) = 1/2 ||l a_1 + (1 - l) a_2||^2_{M^{-1}}`` over
    ``[0, 1]``.  When ``phi`` is constant (``a_1 = a_2``) returns ``l = 1/2``.
    """
    if inst.m != 2:
        raise ValueError(f"closed form needs m=2, got m={inst.m}")
    G, z = _gram(inst)
    curv = G[0, 0] - 2.0 * G[0, 1] + G[1, 1]
    if curv <= 1e-15 * max(G[0, 0], G[1, 1], np.finfo(float).tiny):
        l1 = 0.5
    else:
        l1 = float(np.clip((G[1, 1] - G[0, 1]) / curv, 0.0, 1.0))
    lam = np.array([l1, 1.0 - l1])
    grad = G @ lam
    gap = float(lam @ grad - grad.min())
    return _finish(inst, z, lam, max(gap, 0.0), True, 0)


def primal_value(inst: MinMaxInstance, w) -> float:
    """``max_i <a_i, w> + 1/2 w^T M w``."""
    w = np.asarray(w, dtype=float)
    return float(np.max(inst.a @ w) + 0.5 * inst.norm2(w))


def dual_value(inst: MinMaxInstance, lam) -> float:
    """``phi(lam) = 1/2 a(lam)^T M^{-1} a(lam)``; the dual optimum is ``-theta``."""
    G, _ = _gram(inst)
    lam = np.asarray(lam, dtype=float)
    return 0.5 * float(lam @ G @ lam)
