"""Multiobjective test problems, evaluation counters and the quadratic generator.

A :class:`Problem` bundles ``m`` differentiable objectives on ``R^n`` together
with a sampling box.  Objective values come back as a length-``m`` vector and
gradients as an ``(m, n)`` array whose rows are the individual gradients.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import EvaluationFault

__all__ = [
    "Problem",
    "QuadraticProblem",
    "EvalCounters",
    "QuadraticSpec",
    "evaluate",
    "gradients",
    "make_quadratic",
    "sample_start",
    "registry_lookup",
    "available_problems",
    "QP_TABLE",
]


@dataclass
class EvalCounters:
    """Bundle evaluation counts for a single solve.

    One objective call evaluates all ``m`` components and counts once; the
    same holds for gradients.
    """

    fevals: int = 0
    gevals: int = 0

    def reset(self):
        self.fevals = 0
        self.gevals = 0


@dataclass(frozen=True, eq=False)
class Problem:
    """An ``m``-objective problem on ``R^n``.

    Parameters
    ----------
    name : str
        Identifier used by the registry and in benchmark output.
    n, m : int
        Variable and objective dimensions.
    lower, upper : ndarray
        Box used only to sample starting points.
    f : callable
        ``x -> F(x)``, a length-``m`` array.
    jac : callable
        ``x -> J(x)``, an ``(m, n)`` array of gradients.
    """

    name: str
    n: int
    m: int
    lower: np.ndarray
    upper: np.ndarray
    f: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    jac: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")
        lower = _as_bound(self.lower, self.n, "lower")
        upper = _as_bound(self.upper, self.n, "upper")
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)


@dataclass(frozen=True, eq=False)
class QuadraticProblem(Problem):
    """``F_i(x) = 1/2 <x, A_i x> + <b_i, x>`` with the matrices kept around.

    ``A`` has shape ``(m, n, n)`` and ``b`` has shape ``(m, n)``.
    """

    A: np.ndarray = field(default=None, repr=False)
    b: np.ndarray = field(default=None, repr=False)


def _as_bound(value, n, label):
    arr = np.array(np.broadcast_to(np.asarray(value, dtype=float), (n,)), dtype=float)
    arr.setflags(write=False)
    if arr.shape != (n,):
        raise ValueError(f"{label} bound has shape {arr.shape}, expected ({n},)")
    return arr


def _check_point(problem, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({problem.n},)")
    return x


def evaluate(problem: Problem, x, counters: Optional[EvalCounters] = None) -> np.ndarray:
    """Return ``F(x)`` and count one objective-bundle evaluation."""
    x = _check_point(problem, x)
    if counters is not None:
        counters.fevals += 1
    values = np.asarray(problem.f(x), dtype=float).reshape(problem.m)
    if not np.all(np.isfinite(values)):
        raise EvaluationFault(x, "objective")
    return values


def gradients(problem: Problem, x, counters: Optional[EvalCounters] = None) -> np.ndarray:
    """Return the ``(m, n)`` gradient bundle at ``x`` and count one evaluation."""
    x = _check_point(problem, x)
    if counters is not None:
        counters.gevals += 1
    grads = np.asarray(problem.jac(x), dtype=float).reshape(problem.m, problem.n)
    if not np.all(np.isfinite(grads)):
        raise EvaluationFault(x, "gradient")
    return grads


def sample_start(problem: Problem, rng) -> np.ndarray:
    """Draw a starting point uniformly from the problem's box."""
    rng = np.random.default_rng(rng)
    if not (np.all(np.isfinite(problem.lower)) and np.all(np.isfinite(problem.upper))):
        raise ValueError("sampling needs finite bounds")
    u = rng.random(problem.n)
    # Written so that lower == upper returns the bound exactly.
    return problem.lower + u * (problem.upper - problem.lower)


# ---------------------------------------------------------------------------
# Random ill-conditioned quadratics


@dataclass(frozen=True)
class QuadraticSpec:
    """Recipe for a random bi-objective convex quadratic.

    Parameters
    ----------
    n : int
        Dimension.
    kappa : tuple of float
        Target condition number of each Hessian.
    seed : int
        Seed of the generator stream; the instance is a pure function of
        the spec.
    bound : float, optional
        Half-width of the sampling box ``[-bound, bound]^n``.  Defaults to
        ``n``, the convention of the QP family.
    eig_max : float
        Largest Hessian eigenvalue.  The smallest is ``eig_max / kappa``.
    name : str, optional
    """

    n: int
    kappa: Sequence[float]
    seed: int = 0
    bound: Optional[float] = None
    eig_max: float = 1.0
    name: Optional[str] = None

    def __post_init__(self):
        kappa = tuple(float(k) for k in self.kappa)
        object.__setattr__(self, "kappa", kappa)
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if len(kappa) < 1:
            raise ValueError("need at least one condition number")
        if any(not np.isfinite(k) or k < 1 for k in kappa):
            raise ValueError(f"condition numbers must be >= 1, got {kappa}")
        if self.n == 1 and any(k != 1 for k in kappa):
            raise ValueError("a 1x1 matrix has condition number 1")
        if not self.eig_max > 0:
            raise ValueError("eig_max must be positive")
        if self.bound is not None and not self.bound >= 0:
            raise ValueError("bound must be nonnegative")


def random_orthogonal(n, rng):
    """Haar-distributed orthogonal matrix (QR of a Gaussian, signs fixed)."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def spectrum(n, kappa, eig_max, rng):
    """Log-uniformly spaced eigenvalues with max/min equal to ``kappa``."""
    if n == 1:
        return np.array([eig_max])
    d = np.geomspace(eig_max / kappa, eig_max, n)
    # geomspace may round the endpoints; pin them so the ratio is exact.
    d[0] = eig_max / kappa
    d[-1] = eig_max
    return rng.permutation(d)


def make_quadratic(spec: QuadraticSpec) -> QuadraticProblem:
    """Build ``F_i(x) = 1/2 <x, A_i x> + <b_i, x>`` with ``A_i = H_i D_i H_i^T``.

    Each ``H_i`` is a random orthogonal matrix and ``D_i`` a diagonal matrix
    with condition number ``kappa[i]``; ``b_i`` is uniform on ``[-1, 1]^n``.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    mats, lins = [], []
    for kappa in spec.kappa:
        h = random_orthogonal(n, rng)
        d = spectrum(n, kappa, spec.eig_max, rng)
        a = (h * d) @ h.T
        mats.append(0.5 * (a + a.T))
        lins.append(rng.uniform(-1.0, 1.0, n))
    A = np.stack(mats)
    b = np.stack(lins)
    A.setflags(write=False)
    b.setflags(write=False)
    bound = float(n if spec.bound is None else spec.bound)
    name = spec.name or _qp_label(spec)
    return quadratic_problem(name, A, b, -bound, bound)


def _qp_label(spec):
    kap = ",".join(f"{k:g}" for k in spec.kappa)
    return f"qp:{spec.n},{kap}"


def quadratic_problem(name, A, b, lower, upper) -> QuadraticProblem:
    """Wrap explicit Hessians ``A`` (m, n, n) and linear terms ``b`` (m, n)."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n, _ = A.shape

    def f(x):
        Ax = A @ x
        return 0.5 * (Ax @ x) + b @ x

    def jac(x):
        return A @ x + b

    return QuadraticProblem(name=name, n=n, m=m, lower=lower, upper=upper,
                            f=f, jac=jac, A=A, b=b)


# ---------------------------------------------------------------------------
# Registry

# name: (n, (kappa1, kappa2), instance seed)
QP_TABLE = {
    "QPa": (10, (1e1, 1e1), 1001),
    "QPb": (10, (1e2, 1e2), 1002),
    "QPc": (100, (1e2, 1e2), 1003),
    "QPd": (100, (1e3, 1e3), 1004),
    "QPe": (500, (1e3, 1e3), 1005),
    "QPf": (500, (1e4, 1e4), 1006),
    "QPg": (1000, (1e4, 1e4), 1007),
    "QPh": (1000, (1e5, 1e5), 1008),
}

LARGE_PROBLEMS = frozenset({"QPg", "QPh"})


def _jos1_like(n=2):
    """``F_1 = 1/2 ||x||^2``, ``F_2 = 1/2 ||x - 2||^2``.

    The Pareto set is the segment between ``0`` and ``2 * ones(n)``.
    """
    A = np.stack([np.eye(n), np.eye(n)])
    b = np.stack([np.zeros(n), -2.0 * np.ones(n)])
    shift = np.array([0.0, 2.0 * n])

    def f(x):
        return np.array([0.5 * (x @ x), 0.5 * (x @ x) - 2.0 * x.sum()]) + shift

    def jac(x):
        return np.stack([x, x - 2.0])

    return QuadraticProblem(name="JOS1-like", n=n, m=2, lower=-5.0, upper=5.0,
                            f=f, jac=jac, A=A, b=b)


def _imbalance_like(n=2):
    # Same geometry as JOS1-like with the second objective scaled by 1e3.
    scale = 1e3
    A = np.stack([np.eye(n), scale * np.eye(n)])
    b = np.stack([np.zeros(n), -scale * np.ones(n)])

    def f(x):
        return np.array([0.5 * (x @ x), 0.5 * scale * ((x - 1.0) @ (x - 1.0))])

    def jac(x):
        return np.stack([x, scale * (x - 1.0)])

    return QuadraticProblem(name="Imbalance-like", n=n, m=2, lower=-2.0, upper=2.0,
                            f=f, jac=jac, A=A, b=b)


_BUILDERS = {
    "JOS1-like": _jos1_like,
    "Imbalance-like": _imbalance_like,
}

_cache = {}


def available_problems():
    """Names accepted by :func:`registry_lookup`."""
    return list(QP_TABLE) + list(_BUILDERS)


def registry_lookup(name: str) -> Problem:
    """Return a registered problem by name.

    The QP family is generated from fixed seeds, so every lookup of the same
    name yields the same instance.
    """
    if name in _cache:
        return _cache[name]
    if name in QP_TABLE:
        n, kappa, seed = QP_TABLE[name]
        problem = make_quadratic(QuadraticSpec(n=n, kappa=kappa, seed=seed, name=name))
    elif name in _BUILDERS:
        problem = _BUILDERS[name]()
    else:
        raise KeyError(f"unknown problem {name!r}; available: {', '.join(available_problems())}")
    _cache[name] = problem
    return problem
