"""One linearized ADMM iteration: y update, metric-linearized x update, dual update.

The x update minimizes the linearization of the augmented Lagrangian around
x_k under the metric G = r*I - beta*eta*A^T A, which reduces to the closed
form  x_{k+1} = x_k - (eta/r) * (v - A^T lam + beta * A^T (A x_k + B y_{k+1} - c)),
so no linear solve is required.  Choosing r >= beta*eta*||A^T A|| + 1 keeps
the smallest eigenvalue of G at least 1.
"""

from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedProblemError
from .linalg import power_opnorm
from .problems import ProblemInstance, full_gradient, penalty_value, prox_g

__all__ = [
    "AdmmParams",
    "SolverState",
    "StationarityReport",
    "make_admm_params",
    "alf_eval",
    "y_step",
    "x_step",
    "dual_step",
    "metric_apply",
    "stationarity",
]


@dataclass(frozen=True)
class AdmmParams:
    """Penalty beta, step size eta, and metric constant r."""

    beta: float
    eta: float
    r: float

    def __post_init__(self):
        for name in ("beta", "eta", "r"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass
class SolverState:
    """Mutable iterate carried by the solver drivers."""

    x: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    x_prev: np.ndarray
    k: int = 0
    tally: object = None


@dataclass(frozen=True)
class StationarityReport:
    """Squared residuals of the three stationarity conditions, and their sum."""

    grad_term: float
    subgrad_term: float
    feas_term: float
    total: float


def make_admm_params(constraint, beta: float, eta: float, r=None) -> AdmmParams:
    """Build AdmmParams, defaulting r to beta*eta*||A^T A|| + 1.

    An explicit r below that threshold (metric not positive definite enough)
    is rejected.
    """
    A = constraint.A
    opnorm = power_opnorm(A.T @ A)
    floor = beta * eta * opnorm + 1.0
    if r is None:
        r = floor
    elif r < floor * (1.0 - 1e-9):
        raise ValueError(f"r={r} below beta*eta*||A^T A||+1 = {floor}")
    return AdmmParams(beta=beta, eta=eta, r=float(r))


def _residual(p: ProblemInstance, x, y):
    cs = p.constraint
    return cs.A @ x + cs.B @ y - cs.c


def alf_eval(p: ProblemInstance, params: AdmmParams, w: SolverState, full_f_value: float) -> float:
    """Augmented Lagrangian value at w, given f(x) precomputed by the caller."""
    res = _residual(p, w.x, w.y)
    return (
        full_f_value
        + penalty_value(p.g, w.y)
        - float(w.lam @ res)
        + 0.5 * params.beta * float(res @ res)
    )


def y_step(p: ProblemInstance, params: AdmmParams, x, lam):
    """Exact y update: prox of g/beta at Ax - lam/beta (needs B = -I, c = 0)."""
    if not p.canonical_split:
        raise UnsupportedProblemError("y step requires the split form B = -I, c = 0")
    return prox_g(p.constraint.A @ x - lam / params.beta, 1.0 / params.beta, p.g)


def x_step(p: ProblemInstance, params: AdmmParams, x, y_new, lam, v):
    """Linearized x update given gradient estimate v."""
    cs = p.constraint
    res = cs.A @ x + cs.B @ y_new - cs.c
    step = v - cs.A.T @ lam + params.beta * (cs.A.T @ res)
    return x - (params.eta / params.r) * step


def dual_step(p: ProblemInstance, params: AdmmParams, x_new, y_new, lam):
    """Dual update lam - beta * (A x_{k+1} + B y_{k+1} - c)."""
    return lam - params.beta * _residual(p, x_new, y_new)


def metric_apply(p: ProblemInstance, params: AdmmParams, dx):
    """(G/eta) dx with G = r*I - beta*eta*A^T A."""
    A = p.constraint.A
    return (params.r / params.eta) * dx - params.beta * (A.T @ (A @ dx))


def stationarity(p: ProblemInstance, w: SolverState) -> StationarityReport:
    """Squared stationarity residuals at w.

    grad_term    ||grad f(x) - A^T lam||^2
    subgrad_term dist(B^T lam, subdiff g(y))^2 for the weighted L1 penalty
    feas_term    ||Ax + By - c||^2

    Uses one exact full gradient; callers account for its oracle cost.
    """
    if not p.canonical_split:
        raise UnsupportedProblemError("stationarity requires the split form B = -I, c = 0")
    cs = p.constraint
    grad = full_gradient(p, w.x)
    gt = grad - cs.A.T @ w.lam
    grad_term = float(gt @ gt)
    u = -w.lam  # B^T lam with B = -I
    wgt = p.g.weight
    on = w.y != 0.0
    sub = np.where(on, u - wgt * np.sign(w.y), np.maximum(np.abs(u) - wgt, 0.0))
    subgrad_term = float(sub @ sub)
    res = _residual(p, w.x, w.y)
    feas_term = float(res @ res)
    return StationarityReport(
        grad_term=grad_term,
        subgrad_term=subgrad_term,
        feas_term=feas_term,
        total=grad_term + subgrad_term + feas_term,
    )
