"""Experiment harness: a config file in, per-run trace CSVs and a summary out.

The grid is methods x repeats.  One base seed fixes everything: the split,
the variance estimate, and one solver seed per repeat (shared across methods
so static/adaptive pairs see the same randomness).  Given the same config and
seed, every output byte is reproducible except wall-clock fields.
"""

import concurrent.futures
import dataclasses
import os
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
import yaml

from . import __version__
from .advisor import estimate_L, spectral_bounds
from .datasets import load_libsvm, scale_max_abs, split_half
from .errors import ConfigError, DivergenceError
from .estimators import estimate_sigma2
from .kernel import make_admm_params, stationarity
from .problems import build_fused_logistic, build_graph_guided, objective
from .schedulers import SchedulerParams
from .solvers import METHODS, SolverConfig, TraceRecord, run

__all__ = [
    "MethodSpec",
    "ExperimentConfig",
    "RunRow",
    "RunSummary",
    "load_config",
    "run_experiment",
    "emit_trace_csv",
    "parse_trace_csv",
]

_CSV_FIELDS = ("iter", "epoch", "batch_size", "oracle_calls", "objective", "stationarity", "time_ms")


@dataclass(frozen=True)
class MethodSpec:
    """One method entry of the experiment grid."""

    name: str
    beta: float
    eta: float
    r: Optional[float] = None
    c_tau: float = 1.0
    c_eps: float = 1.0
    epsilon: float = 1e-3
    tau_init: float = 0.0
    b: int = 1
    T: int = 1
    q: int = 1


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_path: str
    problem_kind: str  # "fused_logistic" or "graph_guided"
    l1: float
    methods: tuple
    seed: int = 0
    repeats: int = 5
    workers: int = 1
    d_hint: Optional[int] = None
    normalize: bool = False
    split: bool = True
    l2: float = 0.0
    corr_threshold: float = 0.7
    max_iters: int = 100
    oracle_budget: Optional[int] = None
    target_epsilon: Optional[float] = None
    eval_stride: Optional[int] = None
    sigma2: Optional[float] = None


@dataclass
class RunRow:
    """Outcome of one (method, repeat) cell."""

    method: str
    repeat: int
    seed: int
    iterations: int
    solver_calls: int
    eval_calls: int
    final_objective: float
    final_stationarity: float
    batch_cap_hits: int
    diverged: bool
    wall_ms: float
    trace_path: str


@dataclass
class RunSummary:
    version: str
    sigma2: float
    L: float
    varsigma: float
    opnorm: float
    n_train: int
    n_test: int
    rows: list
    aggregates: dict


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.17g}"


def emit_trace_csv(trace, path) -> None:
    """Write a trace with a fixed header and 17-significant-digit floats.

    A test_objective column is appended only when some row carries one, so
    the same config always produces the same set of columns.
    """
    with_test = any(rec.test_objective is not None for rec in trace)
    fields = _CSV_FIELDS + (("test_objective",) if with_test else ())
    lines = [",".join(fields)]
    for rec in trace:
        lines.append(",".join(_fmt(getattr(rec, f)) for f in fields))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_trace_csv(path):
    """Read back a trace CSV written by ``emit_trace_csv``."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln]
    header = lines[0].split(",")
    if list(header[: len(_CSV_FIELDS)]) != list(_CSV_FIELDS):
        raise ValueError(f"unexpected trace header in {path}")
    out = []
    for ln in lines[1:]:
        parts = ln.split(",")
        row = dict(zip(header, parts))
        out.append(
            TraceRecord(
                iter=int(row["iter"]),
                epoch=int(row["epoch"]),
                batch_size=int(row["batch_size"]),
                oracle_calls=int(row["oracle_calls"]),
                objective=float(row["objective"]),
                stationarity=float(row["stationarity"]) if row["stationarity"] else None,
                time_ms=float(row["time_ms"]),
                test_objective=(
                    float(row["test_objective"])
                    if row.get("test_objective")
                    else None
                ),
            )
        )
    return out


def _need(mapping, key, path):
    if key not in mapping or mapping[key] is None:
        raise ConfigError(f"missing required config key {path}.{key}")
    return mapping[key]


def _section(doc, key):
    val = doc.get(key, {})
    if val is None:
        val = {}
    if not isinstance(val, dict):
        raise ConfigError(f"config section {key!r} must be a mapping")
    return val


def load_config(path) -> ExperimentConfig:
    """Parse and validate a YAML experiment config."""
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")

    ds = _section(doc, "dataset")
    prob = _section(doc, "problem")
    budget = _section(doc, "budget")
    split = _section(doc, "split")

    kind = _need(prob, "kind", "problem")
    if kind not in ("fused_logistic", "graph_guided"):
        raise ConfigError(f"unknown problem.kind {kind!r}")

    raw_methods = doc.get("methods")
    if not raw_methods or not isinstance(raw_methods, list):
        raise ConfigError("config must list at least one method under 'methods'")
    allowed = {f.name for f in dataclasses.fields(MethodSpec)}
    methods = []
    for i, entry in enumerate(raw_methods):
        if not isinstance(entry, dict):
            raise ConfigError(f"methods[{i}] must be a mapping")
        unknown = set(entry) - allowed
        if unknown:
            raise ConfigError(f"methods[{i}] has unknown keys {sorted(unknown)}")
        name = _need(entry, "name", f"methods[{i}]")
        if name not in METHODS:
            raise ConfigError(f"methods[{i}].name {name!r} not one of {METHODS}")
        try:
            methods.append(
                MethodSpec(
                    name=name,
                    beta=float(_need(entry, "beta", f"methods[{i}]")),
                    eta=float(_need(entry, "eta", f"methods[{i}]")),
                    r=None if entry.get("r") is None else float(entry["r"]),
                    c_tau=float(entry.get("c_tau", 1.0)),
                    c_eps=float(entry.get("c_eps", 1.0)),
                    epsilon=float(entry.get("epsilon", 1e-3)),
                    tau_init=float(entry.get("tau_init", 0.0)),
                    b=int(entry.get("b", 1)),
                    T=int(entry.get("T", 1)),
                    q=int(entry.get("q", 1)),
                )
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"methods[{i}]: {exc}") from exc

    try:
        return ExperimentConfig(
            dataset_path=str(_need(ds, "path", "dataset")),
            d_hint=None if ds.get("d_hint") is None else int(ds["d_hint"]),
            normalize=bool(ds.get("normalize", False)),
            split=bool(split.get("enabled", True)),
            problem_kind=kind,
            l1=float(_need(prob, "l1", "problem")),
            l2=float(prob.get("l2", 0.0)),
            corr_threshold=float(prob.get("corr_threshold", 0.7)),
            methods=tuple(methods),
            seed=int(doc.get("seed", 0)),
            repeats=int(doc.get("repeats", 5)),
            workers=int(doc.get("workers", 1)),
            max_iters=int(_need(budget, "max_iters", "budget")),
            oracle_budget=(
                None if budget.get("oracle_budget") is None else int(budget["oracle_budget"])
            ),
            target_epsilon=(
                None if budget.get("target_epsilon") is None else float(budget["target_epsilon"])
            ),
            eval_stride=None if doc.get("eval_stride") is None else int(doc["eval_stride"]),
            sigma2=None if doc.get("sigma2") is None else float(doc["sigma2"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _validate(cfg: ExperimentConfig):
    if cfg.repeats < 1:
        raise ConfigError("repeats must be at least 1")
    if cfg.workers < 1:
        raise ConfigError("workers must be at least 1")
    if cfg.max_iters < 0:
        raise ConfigError("budget.max_iters must be nonnegative")
    if not cfg.l1 >= 0.0:
        raise ConfigError("problem.l1 must be nonnegative")
    if not cfg.l2 >= 0.0:
        raise ConfigError("problem.l2 must be nonnegative")


def _derive_seed(base: int, *tags) -> int:
    return int(np.random.SeedSequence((base,) + tags).generate_state(1, dtype=np.uint64)[0])


def _build_problem(cfg: ExperimentConfig, ds):
    if cfg.problem_kind == "fused_logistic":
        return build_fused_logistic(ds, cfg.l1)
    return build_graph_guided(ds, cfg.l1, cfg.l2, cfg.corr_threshold)


def _run_cell(problem, test_problem, method: MethodSpec, cfg, rep: int, seed: int, trace_path: str):
    """Execute one grid cell and write its trace; returns a RunRow."""
    params = make_admm_params(problem.constraint, method.beta, method.eta, r=method.r)
    sched = SchedulerParams(
        c_tau=method.c_tau,
        c_eps=method.c_eps,
        epsilon=method.epsilon,
        sigma2=cfg["sigma2"],
        n=problem.n,
        tau_init=method.tau_init,
    )
    solver_cfg = SolverConfig(
        method=method.name,
        admm=params,
        sched=sched,
        max_iters=cfg["max_iters"],
        b=method.b,
        T=method.T,
        q=method.q,
        seed=seed,
        oracle_budget=cfg["oracle_budget"],
        target_epsilon=cfg["target_epsilon"],
        eval_stride=cfg["eval_stride"],
    )
    test_fn = None
    if test_problem is not None:
        test_fn = lambda x: objective(test_problem, x)  # noqa: E731
    t0 = time.perf_counter()
    diverged = False
    try:
        result = run(problem, solver_cfg, test_objective=test_fn)
        trace, state = result.trace, result.state
    except DivergenceError as exc:
        trace, state = exc.trace, None
        diverged = True
    wall_ms = (time.perf_counter() - t0) * 1e3
    emit_trace_csv(trace, trace_path)
    if diverged:
        final_obj = float("nan")
        final_stat = float("nan")
        solver_calls = trace[-1].oracle_calls if trace else 0
        eval_calls = 0
        iterations = len(trace)
    else:
        if trace and trace[-1].stationarity is not None:
            final_stat = trace[-1].stationarity
        else:
            report = stationarity(problem, state)
            state.tally.eval_calls += problem.n
            final_stat = report.total
        final_obj = trace[-1].objective if trace else objective(problem, state.x)
        solver_calls = state.tally.solver_calls
        eval_calls = state.tally.eval_calls
        iterations = state.k
    cap_hits = sum(1 for rec in trace if rec.batch_size >= problem.n)
    return RunRow(
        method=method.name,
        repeat=rep,
        seed=seed,
        iterations=iterations,
        solver_calls=solver_calls,
        eval_calls=eval_calls,
        final_objective=final_obj,
        final_stationarity=final_stat,
        batch_cap_hits=cap_hits,
        diverged=diverged,
        wall_ms=wall_ms,
        trace_path=trace_path,
    )


def run_experiment(cfg: ExperimentConfig, out_dir) -> RunSummary:
    """Run the methods x repeats grid and write traces plus summary.yaml."""
    _validate(cfg)
    os.makedirs(out_dir, exist_ok=True)

    ds = load_libsvm(cfg.dataset_path, d_hint=cfg.d_hint)
    if cfg.normalize:
        ds = scale_max_abs(ds)
    if cfg.split:
        pair = split_half(ds, _derive_seed(cfg.seed, 0))
        train, test = pair.train, pair.test
    else:
        train, test = ds, None
    problem = _build_problem(cfg, train)
    test_problem = None
    if test is not None:
        test_problem = dataclasses.replace(problem, dataset=test)

    if cfg.sigma2 is not None:
        sigma2 = cfg.sigma2
    else:
        rng = np.random.default_rng(_derive_seed(cfg.seed, 2))
        x0 = np.zeros(train.d)
        sigma2 = estimate_sigma2(problem, x0, min(problem.n, 1024), rng)
    L = estimate_L(problem)
    varsigma, opnorm = spectral_bounds(problem.constraint.A)

    # surface bad method parameters as config errors before any cell runs
    for i, method in enumerate(cfg.methods):
        try:
            params = make_admm_params(problem.constraint, method.beta, method.eta, r=method.r)
            sched = SchedulerParams(
                c_tau=method.c_tau,
                c_eps=method.c_eps,
                epsilon=method.epsilon,
                sigma2=sigma2,
                n=problem.n,
                tau_init=method.tau_init,
            )
            SolverConfig(
                method=method.name,
                admm=params,
                sched=sched,
                max_iters=cfg.max_iters,
                b=method.b,
                T=method.T,
                q=method.q,
                seed=0,
                oracle_budget=cfg.oracle_budget,
                target_epsilon=cfg.target_epsilon,
                eval_stride=cfg.eval_stride,
            )
        except ValueError as exc:
            raise ConfigError(f"methods[{i}] ({method.name}): {exc}") from exc

    shared = {
        "sigma2": sigma2,
        "max_iters": cfg.max_iters,
        "oracle_budget": cfg.oracle_budget,
        "target_epsilon": cfg.target_epsilon,
        "eval_stride": cfg.eval_stride,
    }
    cells = []
    for method in cfg.methods:
        for rep in range(cfg.repeats):
            seed = _derive_seed(cfg.seed, 1, rep)
            trace_path = os.path.join(out_dir, f"trace_{method.name}_rep{rep}.csv")
            cells.append((problem, test_problem, method, shared, rep, seed, trace_path))

    if cfg.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_run_cell_star, cells))
    else:
        rows = [_run_cell(*cell) for cell in cells]

    aggregates = {}
    for method in cfg.methods:
        done = [r for r in rows if r.method == method.name and not r.diverged]
        if done:
            aggregates[method.name] = {
                "runs": len(done),
                "diverged": cfg.repeats - len(done),
                "final_objective_mean": float(np.mean([r.final_objective for r in done])),
                "final_objective_std": float(np.std([r.final_objective for r in done])),
                "final_stationarity_mean": float(np.mean([r.final_stationarity for r in done])),
                "solver_calls_mean": float(np.mean([r.solver_calls for r in done])),
            }
        else:
            aggregates[method.name] = {"runs": 0, "diverged": cfg.repeats}

    summary = RunSummary(
        version=__version__,
        sigma2=float(sigma2),
        L=float(L),
        varsigma=float(varsigma),
        opnorm=float(opnorm),
        n_train=train.n,
        n_test=0 if test is None else test.n,
        rows=rows,
        aggregates=aggregates,
    )
    payload = {
        "version": summary.version,
        "sigma2": summary.sigma2,
        "L": summary.L,
        "varsigma": summary.varsigma,
        "opnorm": summary.opnorm,
        "n_train": summary.n_train,
        "n_test": summary.n_test,
        "runs": [dataclasses.asdict(r) for r in rows],
        "aggregates": aggregates,
    }
    with open(os.path.join(out_dir, "summary.yaml"), "w") as fh:
        yaml.safe_dump(payload, fh, sort_keys=False)
    return summary


def _run_cell_star(cell):
    return _run_cell(*cell)
