"""Exception types raised by the solver stack."""

import numpy as np


class EvaluationFault(ArithmeticError):
    """An objective or gradient evaluation returned NaN or Inf."""

    def __init__(self, x, what="objective"):
        self.x = np.array(x, dtype=float, copy=True)
        self.what = what
        super().__init__(f"non-finite {what} value at x={np.array2string(self.x, threshold=8)}")


class MatrixError(np.linalg.LinAlgError):
    """A matrix expected to be symmetric positive definite is not."""


class DegenerateSubspace(ValueError):
    """The two vectors spanning the search subspace are not both nonzero."""


class WolfeGuaranteeBroken(RuntimeError):
    """The curvature surrogate of the previous step is not positive.

    Under a step accepted by the Wolfe conditions this cannot happen, so the
    error signals either a broken line search or severe round-off.
    """

    def __init__(self, value):
        self.value = value
        super().__init__(f"Wolfe guarantee broken: rho2={value!r} <= 0")


class LineSearchFailure(RuntimeError):
    """The line search exhausted its evaluation budget.

    Attributes
    ----------
    best_t : float or None
        Largest trial step found that satisfied the sufficient decrease
        condition, or ``None`` if no such step was seen.
    """

    def __init__(self, best_t, message="line search failed"):
        self.best_t = best_t
        super().__init__(f"{message} (best Armijo-feasible t={best_t!r})")
