"""Solver drivers for the six method variants.

Three loop shapes, each in a static- and an adaptive-batch flavor:

  sadmm          one fresh mini-batch gradient per iteration
  svrg_admm      epochs of length T anchored at a snapshot gradient
  spider_admm    recursive gradient with a full re-anchor every q steps

Every iteration applies the same kernel updates in the fixed order
y -> x -> dual.  Anchor and outer batches are drawn without replacement from
one stream; inner variance-reduction batches are drawn with replacement from
an independent stream, so static and adaptive runs with the same seed see
the same inner randomness.
"""

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DivergenceError
from .estimators import (
    EstimatorState,
    OracleTally,
    minibatch_grad,
    sample_indices,
    spider_grad,
    svrg_grad,
)
from .kernel import AdmmParams, SolverState, dual_step, stationarity, x_step, y_step
from .problems import ProblemInstance, objective
from .schedulers import (
    SchedulerParams,
    TauAccumulator,
    abs_sadmm_batch,
    abs_vr_batch,
    static_batch,
    tau_update,
)

__all__ = [
    "METHODS",
    "SolverConfig",
    "TraceRecord",
    "RunResult",
    "run",
    "run_sadmm",
    "run_svrg_admm",
    "run_spider_admm",
]

METHODS = (
    "sadmm",
    "sadmm_adaptive",
    "svrg_admm",
    "svrg_admm_adaptive",
    "spider_admm",
    "spider_admm_adaptive",
)


@dataclass(frozen=True)
class SolverConfig:
    """Everything a single solver run needs besides the problem itself.

    max_iters bounds the iteration count; oracle_budget (solver component
    gradients) and target_epsilon (stationarity total) stop a run early when
    set.  eval_stride controls how often stationarity is measured: every that
    many iterations, or once per data pass when None.
    """

    method: str
    admm: AdmmParams
    sched: SchedulerParams
    max_iters: int
    b: int = 1
    T: int = 1
    q: int = 1
    seed: int = 0
    oracle_budget: Optional[int] = None
    target_epsilon: Optional[float] = None
    eval_stride: Optional[int] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        for name in ("b", "T", "q"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.oracle_budget is not None and self.oracle_budget < 1:
            raise ValueError("oracle_budget must be positive when set")
        if self.target_epsilon is not None and not self.target_epsilon > 0.0:
            raise ValueError("target_epsilon must be positive when set")
        if self.eval_stride is not None and self.eval_stride < 1:
            raise ValueError("eval_stride must be at least 1 when set")


@dataclass(frozen=True)
class TraceRecord:
    """One completed iteration.

    iter is 1-based; epoch is the anchor-window ordinal (0 for sadmm);
    batch_size is the scheduled draw of the step (anchor size on epoch-head
    and refresh rows); oracle_calls is cumulative solver cost; stationarity
    is present only on evaluation rows, test_objective only when a held-out
    evaluator was attached.
    """

    iter: int
    epoch: int
    batch_size: int
    oracle_calls: int
    objective: float
    stationarity: Optional[float]
    time_ms: float
    test_objective: Optional[float] = None


@dataclass
class RunResult:
    trace: list
    state: SolverState


@dataclass
class StepInfo:
    """Snapshot of one update handed to an optional step monitor."""

    k: int
    v: np.ndarray
    x_old: np.ndarray
    y_new: np.ndarray
    x_new: np.ndarray
    lam_new: np.ndarray


class _EvalClock:
    """Decides on which rows stationarity gets measured."""

    def __init__(self, stride, n):
        self.stride = stride
        self.n = n
        self.next_calls = n

    def due(self, row: int, solver_calls: int, last: bool) -> bool:
        if last:
            return True
        if self.stride is not None:
            return row % self.stride == 0
        if solver_calls >= self.next_calls:
            self.next_calls = (solver_calls // self.n + 1) * self.n
            return True
        return False


def _init_state(p: ProblemInstance) -> SolverState:
    x0 = np.zeros(p.constraint.d1)
    y0 = np.zeros(p.constraint.d2)
    lam0 = np.zeros(p.constraint.m)
    return SolverState(x=x0, y=y0, lam=lam0, x_prev=x0.copy(), tally=OracleTally())


def _streams(seed):
    anchor_ss, inner_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(anchor_ss), np.random.default_rng(inner_ss)


class _Loop:
    """Shared per-iteration bookkeeping for the three drivers."""

    def __init__(self, p, cfg, test_objective, step_monitor):
        self.p = p
        self.cfg = cfg
        self.test_objective = test_objective
        self.monitor = step_monitor
        self.state = _init_state(p)
        self.trace = []
        self.clock = _EvalClock(cfg.eval_stride, p.n)
        self.t0 = time.perf_counter()
        self.stop = False

    def step(self, v, batch_col: int, epoch_col: int) -> float:
        """Apply one y/x/dual update, record the row, return ||dx||^2."""
        p, cfg, state = self.p, self.cfg, self.state
        y_new = y_step(p, cfg.admm, state.x, state.lam)
        x_new = x_step(p, cfg.admm, state.x, y_new, state.lam, v)
        lam_new = dual_step(p, cfg.admm, x_new, y_new, state.lam)
        if not (
            np.isfinite(x_new).all()
            and np.isfinite(y_new).all()
            and np.isfinite(lam_new).all()
        ):
            raise DivergenceError(
                f"non-finite iterate at iteration {state.k + 1}", trace=self.trace
            )
        if self.monitor is not None:
            self.monitor(
                StepInfo(
                    k=state.k,
                    v=v,
                    x_old=state.x,
                    y_new=y_new,
                    x_new=x_new,
                    lam_new=lam_new,
                )
            )
        dx = x_new - state.x
        state.x_prev = state.x
        state.x, state.y, state.lam = x_new, y_new, lam_new
        state.k += 1

        row = state.k
        last = row >= cfg.max_iters
        stat_total = None
        if self.clock.due(row, state.tally.solver_calls, last):
            report = stationarity(p, state)
            state.tally.eval_calls += p.n
            stat_total = report.total
        test_val = None
        if self.test_objective is not None and stat_total is not None:
            test_val = self.test_objective(state.x)
        self.trace.append(
            TraceRecord(
                iter=row,
                epoch=epoch_col,
                batch_size=batch_col,
                oracle_calls=state.tally.solver_calls,
                objective=objective(p, state.x),
                stationarity=stat_total,
                time_ms=(time.perf_counter() - self.t0) * 1e3,
                test_objective=test_val,
            )
        )
        if cfg.oracle_budget is not None and state.tally.solver_calls >= cfg.oracle_budget:
            self.stop = True
        if (
            cfg.target_epsilon is not None
            and stat_total is not None
            and stat_total <= cfg.target_epsilon
        ):
            self.stop = True
        return float(dx @ dx)

    def result(self) -> RunResult:
        return RunResult(trace=self.trace, state=self.state)


def run_sadmm(
    p: ProblemInstance,
    cfg: SolverConfig,
    adaptive: bool,
    test_objective: Optional[Callable] = None,
    step_monitor: Optional[Callable] = None,
) -> RunResult:
    """Mini-batch ADMM; the adaptive flavor sizes each batch from the last step."""
    loop = _Loop(p, cfg, test_objective, step_monitor)
    rng_anchor, _ = _streams(cfg.seed)
    sp = cfg.sched
    state = loop.state
    for _ in range(cfg.max_iters):
        if adaptive:
            diff = state.x - state.x_prev
            M = abs_sadmm_batch(sp, float(diff @ diff))
        else:
            M = static_batch(sp)
        batch = sample_indices(p.n, M, "without_replacement", rng_anchor)
        v = minibatch_grad(p, state.x, batch, state.tally)
        loop.step(v, batch_col=M, epoch_col=0)
        if loop.stop:
            break
    return loop.result()


def run_svrg_admm(
    p: ProblemInstance,
    cfg: SolverConfig,
    adaptive: bool,
    test_objective: Optional[Callable] = None,
    step_monitor: Optional[Callable] = None,
) -> RunResult:
    """Snapshot-anchored ADMM: epochs of T inner steps against anchor gradients."""
    loop = _Loop(p, cfg, test_objective, step_monitor)
    rng_anchor, rng_inner = _streams(cfg.seed)
    sp = cfg.sched
    state = loop.state
    est = EstimatorState(kind="svrg", rng=rng_inner)
    acc = TauAccumulator(divisor=cfg.T, value_for_next_epoch=sp.tau_init)
    epochs = math.ceil(cfg.max_iters / cfg.T)
    for s in range(1, epochs + 1):
        if adaptive:
            N = abs_vr_batch(sp, acc.value_for_next_epoch)
        else:
            N = static_batch(sp)
        anchor_batch = sample_indices(p.n, N, "without_replacement", rng_anchor)
        est.snapshot_x = state.x.copy()
        est.anchor_grad = minibatch_grad(p, est.snapshot_x, anchor_batch, state.tally)
        for t in range(cfg.T):
            if state.k >= cfg.max_iters:
                break
            batch = sample_indices(p.n, cfg.b, "with_replacement", est.rng)
            v = svrg_grad(p, state.x, est, batch, state.tally)
            diff_sq = loop.step(v, batch_col=N if t == 0 else cfg.b, epoch_col=s)
            tau_update(acc, diff_sq)
            if loop.stop:
                break
        acc.roll_epoch()
        if loop.stop or state.k >= cfg.max_iters:
            break
    return loop.result()


def run_spider_admm(
    p: ProblemInstance,
    cfg: SolverConfig,
    adaptive: bool,
    test_objective: Optional[Callable] = None,
    step_monitor: Optional[Callable] = None,
) -> RunResult:
    """Recursive-gradient ADMM with a full (or scheduled) re-anchor every q steps."""
    loop = _Loop(p, cfg, test_objective, step_monitor)
    rng_anchor, rng_inner = _streams(cfg.seed)
    sp = cfg.sched
    state = loop.state
    est = EstimatorState(kind="spider", rng=rng_inner)
    acc = TauAccumulator(divisor=cfg.q, value_for_next_epoch=sp.tau_init)
    for k in range(cfg.max_iters):
        if k % cfg.q == 0:
            if adaptive:
                N = abs_vr_batch(sp, acc.value_for_next_epoch)
            else:
                N = static_batch(sp)
            batch = sample_indices(p.n, N, "without_replacement", rng_anchor)
            v = minibatch_grad(p, state.x, batch, state.tally)
            est.prev_x = state.x
            est.anchor_grad = v
            batch_col = N
        else:
            batch = sample_indices(p.n, cfg.b, "with_replacement", est.rng)
            v = spider_grad(p, state.x, est, batch, state.tally)
            batch_col = cfg.b
        diff_sq = loop.step(v, batch_col=batch_col, epoch_col=k // cfg.q + 1)
        tau_update(acc, diff_sq)
        if (k + 1) % cfg.q == 0:
            acc.roll_epoch()
        if loop.stop:
            break
    return loop.result()


_DISPATCH = {
    "sadmm": (run_sadmm, False),
    "sadmm_adaptive": (run_sadmm, True),
    "svrg_admm": (run_svrg_admm, False),
    "svrg_admm_adaptive": (run_svrg_admm, True),
    "spider_admm": (run_spider_admm, False),
    "spider_admm_adaptive": (run_spider_admm, True),
}


def run(
    p: ProblemInstance,
    cfg: SolverConfig,
    test_objective: Optional[Callable] = None,
    step_monitor: Optional[Callable] = None,
) -> RunResult:
    """Dispatch to the driver named by cfg.method."""
    runner, adaptive = _DISPATCH[cfg.method]
    return runner(p, cfg, adaptive, test_objective=test_objective, step_monitor=step_monitor)
