"""Stochastic gradient estimators and oracle-call accounting.

All estimators reduce over their batch in sorted index order, so identical
index multisets give bitwise-identical results regardless of draw order.
"""

from dataclasses import dataclass

import numpy as np

from .problems import ProblemInstance, batch_mean_grad, full_gradient, _loss_slopes

__all__ = [
    "OracleTally",
    "EstimatorState",
    "sample_indices",
    "minibatch_grad",
    "svrg_grad",
    "spider_grad",
    "estimate_sigma2",
]


@dataclass
class OracleTally:
    """Cumulative component-gradient evaluations.

    solver_calls counts work charged to the algorithm; eval_calls counts the
    full gradients spent on stationarity diagnostics, kept separate so traces
    report pure solver cost.
    """

    solver_calls: int = 0
    eval_calls: int = 0


@dataclass
class EstimatorState:
    """State carried by variance-reduced estimators.

    kind         "svrg" or "spider"
    snapshot_x   anchor point x~ (svrg)
    anchor_grad  full/anchor gradient at the snapshot (svrg) or v_{k-1} (spider)
    prev_x       previous iterate x_{k-1} (spider)
    rng          generator driving the inner mini-batch draws
    """

    kind: str
    snapshot_x: np.ndarray = None
    anchor_grad: np.ndarray = None
    prev_x: np.ndarray = None
    rng: np.random.Generator = None


def sample_indices(n: int, size: int, mode: str, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` indices from range(n), with or without replacement."""
    if size < 1:
        raise ValueError("batch size must be at least 1")
    if mode == "with_replacement":
        return rng.integers(0, n, size=size)
    if mode == "without_replacement":
        if size > n:
            raise ValueError(f"cannot draw {size} of {n} without replacement")
        return rng.permutation(n)[:size]
    raise ValueError(f"unknown sampling mode {mode!r}")


def minibatch_grad(p: ProblemInstance, x, batch, tally: OracleTally):
    """Plain mini-batch gradient: mean of grad_component over ``batch``."""
    idx = np.sort(np.asarray(batch, dtype=np.intp))
    tally.solver_calls += idx.shape[0]
    return batch_mean_grad(p, x, idx)


def svrg_grad(p: ProblemInstance, x, state: EstimatorState, batch, tally: OracleTally):
    """Variance-reduced gradient against a snapshot anchor.

    v = grad_I(x) - grad_I(snapshot_x) + anchor_grad, with the same batch I in
    both terms.  Charges 2|batch| component gradients.
    """
    if state.snapshot_x is None or state.anchor_grad is None:
        raise ValueError("svrg estimator used before its anchor was set")
    idx = np.sort(np.asarray(batch, dtype=np.intp))
    tally.solver_calls += 2 * idx.shape[0]
    return (
        batch_mean_grad(p, x, idx)
        - batch_mean_grad(p, state.snapshot_x, idx)
        + state.anchor_grad
    )


def spider_grad(p: ProblemInstance, x, state: EstimatorState, batch, tally: OracleTally):
    """Recursive gradient estimate against the previous iterate.

    v = grad_I(x) - grad_I(prev_x) + v_prev, then the state rolls forward:
    prev_x <- x, anchor_grad <- v.  Charges 2|batch| component gradients.
    """
    if state.prev_x is None or state.anchor_grad is None:
        raise ValueError("spider estimator used before its reference point was set")
    idx = np.sort(np.asarray(batch, dtype=np.intp))
    tally.solver_calls += 2 * idx.shape[0]
    v = (
        batch_mean_grad(p, x, idx)
        - batch_mean_grad(p, state.prev_x, idx)
        + state.anchor_grad
    )
    state.prev_x = x
    state.anchor_grad = v
    return v


def estimate_sigma2(p: ProblemInstance, x0, m: int, rng: np.random.Generator) -> float:
    """Mean of ||grad_component(i, x0) - grad f(x0)||^2 over m uniform draws.

    With m >= n every component is used once, giving the exact population
    value of the gradient-variance bound.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    n = p.n
    idx = np.arange(n) if m >= n else rng.integers(0, n, size=m)
    g_full = full_gradient(p, x0)
    feats = p.dataset.features[idx]
    labs = p.dataset.labels[idx]
    z = labs * (feats @ x0)
    coef = _loss_slopes(p.loss, z) * labs
    grads = feats * coef[:, None]
    if p.ridge:
        grads = grads + p.ridge * x0
    dev = grads - g_full
    return float(np.mean(np.sum(dev * dev, axis=1)))
