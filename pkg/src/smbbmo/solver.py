"""Outer loops: subspace minimization BB method (SMBBMO) and plain BB descent (BBDMO).

Both share the scaled Wolfe line search and the stopping rule
``-1/2 ||v(x)||^2 >= -stop_tol``, where ``v`` is the BB direction.
"""

import time
from dataclasses import dataclass, field, fields
from typing import List, Optional

import numpy as np

from . import direction as dirmod
from .direction import (
    aggregate_y,
    aggregate_yv,
    bb_direction,
    bb_scales,
    directional_value,
    model_matrix,
    modified_cholesky,
    subspace_scales,
)
from .errors import (
    DegenerateSubspace,
    EvaluationFault,
    LineSearchFailure,
    MatrixError,
    WolfeGuaranteeBroken,
)
from .linesearch import LineSearchConfig, check_wolfe, wolfe_search
from .problems import EvalCounters, evaluate, gradients
from .simplex_qp import DEFAULT_FW_TOL

__all__ = [
    "SolverConfig",
    "RunRecord",
    "IterationSnapshot",
    "Violation",
    "smbbmo_solve",
    "bbdmo_solve",
    "audit_iteration",
    "solve",
    "STOP_TOL",
]

EPS = 2.0 ** -52
STOP_TOL = 5.0 * np.sqrt(EPS)
DEGENERATE_NORM = 1e-14


@dataclass(frozen=True)
class SolverConfig:
    """Parameters shared by both solvers.

    ``c1``/``c2`` bound the modified Cholesky repair, ``x_prev_delta`` sets
    the artificial previous point ``x0 - delta (1 + ||x0||_inf) * ones``.
    ``audit`` runs :func:`audit_iteration` on every step and ``trace`` keeps
    the per-iteration snapshots on the returned record.
    """

    alpha_min: float = 1e-3
    alpha_max: float = 1e3
    c1: float = 1e-6
    c2: float = 1e6
    sigma1: float = 1e-4
    sigma2: float = 0.1
    t_init: float = 1.0
    expand: float = 2.0
    ls_max_evals: int = 50
    t_max: float = 1e10
    fw_tol: float = DEFAULT_FW_TOL
    fw_max_iter: Optional[int] = None
    max_iters: int = 500
    stop_tol: float = STOP_TOL
    x_prev_delta: float = 1e-4
    audit: bool = False
    audit_kkt_tol: float = 1e-7
    trace: bool = False

    def __post_init__(self):
        if not 0 < self.alpha_min <= self.alpha_max:
            raise ValueError("need 0 < alpha_min <= alpha_max")
        if not 0 < self.c1 <= self.c2:
            raise ValueError("need 0 < c1 <= c2")
        if not 0 < self.sigma1 <= self.sigma2 < 1:
            raise ValueError("need 0 < sigma1 <= sigma2 < 1")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if not self.stop_tol > 0 or not self.fw_tol > 0:
            raise ValueError("tolerances must be positive")

    @property
    def bounds(self):
        return (self.alpha_min, self.alpha_max)

    def linesearch(self):
        return LineSearchConfig(sigma1=self.sigma1, sigma2=self.sigma2, t_init=self.t_init,
                                expand=self.expand, max_evals=self.ls_max_evals, t_max=self.t_max)

    @classmethod
    def field_types(cls):
        return {f.name: f.type for f in fields(cls)}


@dataclass
class IterationSnapshot:
    """Everything needed to re-check one iteration after the fact."""

    k: int
    kind: str
    v: np.ndarray
    d: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray
    F_x: np.ndarray
    D0: float
    theta_bb: float
    theta: float
    D_value: float
    t: float = np.nan
    F_new: Optional[np.ndarray] = None
    D_exit: float = np.nan
    w: Optional[np.ndarray] = None
    H: Optional[np.ndarray] = None
    scaling: Optional[np.ndarray] = None
    rho2: float = np.nan
    note: str = ""

    def summary(self):
        return {"k": self.k, "kind": self.kind, "norm_v": float(np.linalg.norm(self.v)),
                "theta": self.theta, "D": self.D0, "t": self.t}


@dataclass
class Violation:
    k: int
    name: str
    residual: float


@dataclass
class RunRecord:
    """Outcome of one solve.

    ``theta_bb`` and ``alpha`` are the BB subproblem value and scales at the
    final iterate ``x``.
    """

    algo: str
    problem: str
    status: str
    iters: int
    fevals: int
    gevals: int
    wall_time: float
    x0: np.ndarray
    x: np.ndarray
    F: np.ndarray
    theta_bb: float
    alpha: Optional[np.ndarray] = None
    trace: List[IterationSnapshot] = field(default_factory=list)
    violations: List[Violation] = field(default_factory=list)

    @property
    def converged(self):
        return self.status == "converged"


def audit_iteration(snap: IterationSnapshot, cfg: SolverConfig) -> List[Violation]:
    """Check one finished iteration against the method's guarantees.

    BB steps are checked for the Wolfe conditions, monotone decrease and the
    identity ``D = -||v||^2`` (relative to ``1 + ||v||^2``).  Subspace steps
    additionally get ``rho2 > 0``, positive definiteness of the repaired
    model, the KKT identities, sufficient descent and, when the repaired model
    satisfies the eigenvalue bounds ``[c1, c2]``, the norm sandwich between
    ``d`` and ``v``.
    """
    out = []
    k = snap.k

    def flag(name, residual):
        out.append(Violation(k, name, float(residual)))

    if snap.F_new is not None:
        w1, w2 = check_wolfe(snap.F_x, snap.F_new, snap.t, snap.D0, snap.D_exit,
                             snap.alpha_bar, cfg.sigma1, cfg.sigma2)
        if not w1:
            flag("wolfe1", np.max((snap.F_new - snap.F_x) / snap.alpha_bar
                                  - cfg.sigma1 * snap.t * snap.D0))
        if not w2:
            flag("wolfe2", cfg.sigma2 * snap.D0 - snap.D_exit)
        rise = np.max(snap.F_new - snap.F_x)
        if rise > 1e-12:
            flag("monotone", rise)
    if not snap.D0 < 0:
        flag("descent", snap.D0)

    if snap.kind != "subspace":
        vv = float(snap.v @ snap.v)
        # relative: |D0| reaches 1e8 on the first steps of QPf-size problems
        resid = abs(snap.D0 + vv) / (1.0 + vv)
        if resid > cfg.audit_kkt_tol:
            flag("bb-identity", resid)
        return out

    if not snap.rho2 > 0:
        flag("rho2", snap.rho2)
    try:
        np.linalg.cholesky(snap.H)
    except np.linalg.LinAlgError:
        flag("H-not-pd", np.min(np.linalg.eigvalsh(snap.H)))
    resid = abs(snap.theta - 0.5 * snap.D0)
    if resid > cfg.audit_kkt_tol:
        flag("kkt-theta", resid)
    resid = abs(snap.D0 + float(snap.w @ snap.H @ snap.w))
    if resid > cfg.audit_kkt_tol:
        flag("kkt-D", resid)
    dd = float(snap.d @ snap.d)
    excess = snap.D0 + 0.5 * cfg.c1 * dd - 1e-10 * (1.0 + dd)
    if excess > 0:
        flag("sufficient-descent", excess)

    Hs = snap.H / np.outer(snap.scaling, snap.scaling)
    eig = np.linalg.eigvalsh(Hs)
    if cfg.c1 <= eig[0] and eig[-1] <= cfg.c2:
        r = snap.alpha / snap.alpha_bar
        nv = float(np.linalg.norm(snap.v))
        nd = float(np.sqrt(dd))
        lo = np.min(r) ** 2 / (cfg.c2 * np.max(r)) * nv
        hi = 2.0 * np.max(r) / cfg.c1 * nv
        if nd < lo * (1 - 1e-8):
            flag("norm-lower", lo - nd)
        if nd > hi * (1 + 1e-8):
            flag("norm-upper", nd - hi)
        bound = -np.min(r) ** 2 * nv * nv / cfg.c2
        if snap.D0 > bound + 1e-8 * abs(bound) + 1e-10:
            flag("descent-vs-v", snap.D0 - bound)
    return out


def _prepare(problem, x0, cfg, counters):
    x = np.array(x0, dtype=float)
    F = evaluate(problem, x, counters)
    G = gradients(problem, x, counters)
    delta = cfg.x_prev_delta * (1.0 + np.max(np.abs(x), initial=0.0))
    x_prev = x - delta
    G_prev = gradients(problem, x_prev, counters)
    return x, F, G, x - x_prev, G - G_prev, G_prev


def _subspace_step(problem, x, G, v, alpha, s, Y, G_prev, mem, cfg, counters):
    """Direction from the 2D model; returns ``(DirectionResult, alpha_bar, H, scaling, rho2)``."""
    lam_prev, abar_prev, t_prev, D_exit_prev = mem
    y = aggregate_y(G, G_prev, lam_prev, abar_prev)
    y_v = aggregate_yv(problem, x, v, G, lam_prev, abar_prev, counters)
    r2 = dirmod.rho2(s, y, t_prev * D_exit_prev, G_prev, lam_prev, abar_prev)
    r1 = dirmod.rho1(v, y_v)
    scaling = np.array([np.linalg.norm(v), np.linalg.norm(s)])
    H = modified_cholesky(model_matrix(v, y, r1, r2), scaling, cfg.c1, cfg.c2)
    alpha_bar = subspace_scales(s, Y, r2, y, cfg.bounds)
    model = dirmod.assemble_model(G, alpha_bar, v, s, y, r1, r2)
    model.H = H
    res = dirmod.subspace_direction(model, v, s, tol=cfg.fw_tol, max_iter=cfg.fw_max_iter)
    return res, alpha_bar, H, scaling, r2


def solve(problem, x0, cfg=None, algo="smbbmo") -> RunRecord:
    """Run ``algo`` (``"smbbmo"`` or ``"bbdmo"``) from ``x0``.

    Numerical trouble never escapes as an exception: evaluation faults end
    the run with status ``"fault"`` and line-search failures with
    ``"ls-fail"``.
    """
    if algo not in ("smbbmo", "bbdmo"):
        raise ValueError(f"unknown algorithm {algo!r}")
    cfg = cfg or SolverConfig()
    ls_cfg = cfg.linesearch()
    counters = EvalCounters()
    trace, violations = [], []
    x0 = np.array(x0, dtype=float)
    x, F = x0.copy(), None
    theta_bb = -np.inf
    alpha = None
    k = 0
    status = "max-iters"
    start = time.perf_counter()
    try:
        x, F, G, s, Y, G_prev = _prepare(problem, x0, cfg, counters)
        mem = None
        while True:
            alpha = bb_scales(s, Y, cfg.bounds)
            bb = bb_direction(G, alpha, tol=cfg.fw_tol, max_iter=cfg.fw_max_iter)
            v = bb.d
            theta_bb = bb.theta
            if theta_bb >= -cfg.stop_tol:
                status = "converged"
                break
            if k >= cfg.max_iters:
                break

            res, alpha_bar, H, scaling, r2, note = bb, alpha, None, None, np.nan, ""
            D0 = None
            if algo == "smbbmo" and mem is not None:
                if np.linalg.norm(s) <= DEGENERATE_NORM or np.linalg.norm(v) <= DEGENERATE_NORM:
                    note = "degenerate-subspace"
                else:
                    try:
                        sub = _subspace_step(problem, x, G, v, alpha, s, Y, G_prev, mem, cfg,
                                             counters)
                    except WolfeGuaranteeBroken as exc:
                        note = "rho2"
                        r2 = exc.value
                    except (DegenerateSubspace, MatrixError) as exc:
                        note = type(exc).__name__
                    else:
                        cand, cand_abar = sub[0], sub[1]
                        D_sub = directional_value(G, cand_abar, cand.d)
                        if D_sub < 0:
                            res, alpha_bar, H, scaling, r2 = sub
                            D0 = D_sub
                        else:
                            note = "not-descent"
                            r2 = sub[4]
            if D0 is None:
                D0 = directional_value(G, alpha_bar, res.d)
            d = res.d

            snap = IterationSnapshot(
                k=k, kind=res.kind, v=v, d=d, alpha=alpha, alpha_bar=alpha_bar, F_x=F, D0=D0,
                theta_bb=theta_bb, theta=res.theta, D_value=res.D_value,
                w=None if res.mu is None else np.array([res.mu, res.nu]),
                H=H, scaling=scaling, rho2=r2, note=note)
            if cfg.audit and note in ("rho2", "not-descent"):
                violations.append(Violation(k, note, r2 if note == "rho2" else np.nan))
            if cfg.trace:
                trace.append(snap)

            if not D0 < 0:
                status = "ls-fail"
                break
            try:
                ls = wolfe_search(problem, x, F, d, alpha_bar, D0, ls_cfg, counters)
            except LineSearchFailure:
                status = "ls-fail"
                break
            snap.t, snap.F_new, snap.D_exit = ls.t, ls.F_new, ls.D_exit
            if cfg.audit:
                violations.extend(audit_iteration(snap, cfg))

            mem = (res.lam, alpha_bar, ls.t, ls.D_exit)
            s = ls.x_new - x
            Y = ls.grads_new - G
            G_prev = G
            x, F, G = ls.x_new, ls.F_new, ls.grads_new
            k += 1
    except EvaluationFault:
        status = "fault"
    wall = time.perf_counter() - start
    return RunRecord(algo=algo, problem=problem.name, status=status, iters=k,
                     fevals=counters.fevals, gevals=counters.gevals, wall_time=wall,
                     x0=x0, x=np.array(x), F=None if F is None else np.array(F),
                     theta_bb=float(theta_bb), alpha=alpha, trace=trace,
                     violations=violations)


def smbbmo_solve(problem, x0, cfg=None) -> RunRecord:
    """Subspace minimization Barzilai-Borwein method.

    Each iteration computes the BB direction ``v``; from the second
    iteration on it then minimizes a scaled min-max quadratic model over
    ``span{v, s}`` (``s`` the previous step) whose curvature comes from
    gradient differences, repaired to be positive definite.
    """
    return solve(problem, x0, cfg, "smbbmo")


def bbdmo_solve(problem, x0, cfg=None) -> RunRecord:
    """Barzilai-Borwein descent: step along ``v`` with the plain BB scales."""
    return solve(problem, x0, cfg, "bbdmo")
