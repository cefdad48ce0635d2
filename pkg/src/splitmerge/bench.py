"""Multi-trial benchmark harness with trace emission and speed-up reports.

Protocol: every trial draws a fresh synthetic matrix (base seed + trial
index) or reuses the one Matrix Market operator; all solvers in a trial
start from the same x0; ground truth is the generator's exact spectrum for
synthetic sources and the Jacobi oracle (or a residual-certified power
reference above the dense limit) for files. Timing wraps the solver loop
only. Trials may run on worker threads; results merge deterministically by
(solver, trial), so parallelism never changes anything but the time
columns.

Config files are plain ``key = value`` text with ``#`` comments::

    source = synthetic            # synthetic | matrix_market
    n = 256
    gap = 1e-2
    # matrix = path/to/file.mtx   # required for matrix_market
    solvers = power, split_merge, gd_difference(alpha=0.9)
    baseline = power
    trials = 50
    eps = 1e-5
    max_iter = 20000
    seed = 0
    stop_mode = oracle            # oracle | residual
    residual_tol = 1e-10
    out = bench_out
    workers = 1
    dense_limit = 4096

Solver entries take per-solver parameters in parentheses: alpha for
gd_difference, beta (a number or ``auto`` = ideal lambda2^2/4) for
power_momentum, rho_policy (named policy or a constant) for split_merge.
"""

from __future__ import annotations

import csv
import json
import math
import re
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, SplitMergeError
from .linop import LinearOperator, load_matrix_market
from .matgen import SyntheticSpec, generate
from .solvers import METHODS, SolveResult, SolverConfig, init_vector, solve
from .theory import Spectrum, dense_eigendecomposition, reference_dominant_eigenpair


@dataclass
class SolverSetting:
    """One benchmarked solver: method name plus its parameter overrides."""

    method: str
    params: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        if not self.params:
            return self.method
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.method}({inner})"


@dataclass
class ExperimentConfig:
    source: str = "synthetic"               # synthetic | matrix_market
    n: int = 256
    gap: float = 1e-2
    matrix_path: str | None = None
    solvers: list[SolverSetting] = field(
        default_factory=lambda: [SolverSetting("power"), SolverSetting("split_merge")]
    )
    baseline: str = "power"
    trials: int = 50
    eps: float = 1e-5
    max_iter: int = 20000
    seed: int = 0
    out_dir: str = "bench_out"
    stop_mode: str = "oracle"                # oracle | residual
    residual_tol: float = 1e-10
    workers: int = 1
    dense_limit: int = 4096

    def validate(self) -> None:
        if self.source not in ("synthetic", "matrix_market"):
            raise ConfigError(f"unknown source {self.source!r}")
        if self.source == "matrix_market" and not self.matrix_path:
            raise ConfigError("matrix_market source needs a matrix path")
        if self.source == "synthetic" and not 0.0 < self.gap < 1.0:
            raise ConfigError(f"gap must lie in (0,1), got {self.gap}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.solvers:
            raise ConfigError("at least one solver is required")
        if self.stop_mode not in ("oracle", "residual"):
            raise ConfigError(f"unknown stop_mode {self.stop_mode!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for setting in self.solvers:
            if setting.method not in METHODS:
                raise ConfigError(f"unknown solver {setting.method!r}")
        labels = [s.label for s in self.solvers]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"duplicate solver entries: {labels}")
        if self.baseline not in [s.label for s in self.solvers] and self.baseline not in [
            s.method for s in self.solvers
        ]:
            raise ConfigError(f"baseline {self.baseline!r} is not among the solvers")


@dataclass
class TrialRecord:
    solver: str
    trial: int
    converged: bool
    iterations: int
    matvecs: int
    seconds: float
    error: str | None = None
    result: SolveResult | None = None
    f_star: float = math.nan


@dataclass
class SolverStats:
    solver: str
    trials: int
    breakdowns: int
    non_converged: int
    mean_seconds: float
    median_seconds: float
    std_seconds: float
    mean_iterations: float
    median_iterations: float
    std_iterations: float
    mean_matvecs: float
    median_matvecs: float
    std_matvecs: float
    speedup_time: float
    speedup_matvecs: float


@dataclass
class RunReport:
    baseline: str
    stats: list[SolverStats]
    records: list[TrialRecord]
    trace_paths: list[str]

    def to_dict(self) -> dict:
        return {
            "baseline": self.baseline,
            "solvers": [vars(s) for s in self.stats],
            "trials": [
                {
                    "solver": r.solver,
                    "trial": r.trial,
                    "converged": r.converged,
                    "iterations": r.iterations,
                    "matvecs": r.matvecs,
                    "seconds": r.seconds,
                    "error": r.error,
                }
                for r in self.records
            ],
        }


def _ground_truth_for(config: ExperimentConfig, op: LinearOperator):
    """Oracle ground truth for a Matrix Market operator, or None in residual mode."""
    if config.stop_mode != "oracle":
        return None
    if op.n <= config.dense_limit:
        return dense_eigendecomposition(op, dense_limit=config.dense_limit)
    return reference_dominant_eigenpair(op)


def _solver_config(setting: SolverSetting, config: ExperimentConfig, ground_truth) -> SolverConfig:
    params = dict(setting.params)
    beta = params.pop("beta", 0.0)
    alpha = params.pop("alpha", 0.5)
    rho_policy = params.pop("rho_policy", "fixed_one_with_safeguard")
    if params:
        raise ConfigError(f"unknown parameters for {setting.method}: {sorted(params)}")
    if beta == "auto":
        lam2 = _lambda2_of(ground_truth)
        if lam2 is None:
            raise ConfigError("beta=auto needs a full ground-truth spectrum")
        beta = lam2**2 / 4.0
    try:
        return SolverConfig(
            method=setting.method,
            alpha=float(alpha),
            beta=float(beta),
            eps=config.eps,
            max_iter=config.max_iter,
            rho_policy=rho_policy,
            stop_mode="oracle_angle" if config.stop_mode == "oracle" else "residual",
            residual_tol=config.residual_tol,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _lambda2_of(ground_truth) -> float | None:
    if isinstance(ground_truth, Spectrum) and ground_truth.eigenvalues.size > 1:
        return float(ground_truth.eigenvalues[1])
    return None


def _lambda1_of(ground_truth) -> float:
    if ground_truth is None:
        return math.nan
    return float(ground_truth.lambda1)


def _run_trial(config: ExperimentConfig, trial: int, shared) -> list[TrialRecord]:
    if config.source == "synthetic":
        op, truth = generate(SyntheticSpec(n=config.n, gap=config.gap, seed=config.seed + trial))
    else:
        op, truth = shared

    x0 = init_vector(op.n, np.random.SeedSequence((config.seed, trial, 1)), op)
    f_star = -_lambda1_of(truth) / 4.0

    records = []
    for setting in config.solvers:
        run_op = op.share()
        solver_config = _solver_config(setting, config, truth)
        try:
            result = solve(run_op, solver_config, ground_truth=truth, x0=x0)
        except SplitMergeError as exc:
            records.append(
                TrialRecord(
                    solver=setting.label, trial=trial, converged=False,
                    iterations=0, matvecs=run_op.matvec_count, seconds=0.0,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
            continue
        records.append(
            TrialRecord(
                solver=setting.label, trial=trial, converged=result.converged,
                iterations=result.iterations, matvecs=result.trace.matvecs[-1],
                seconds=result.trace.seconds[-1], result=result, f_star=f_star,
            )
        )
    return records


def run_experiment(config: ExperimentConfig) -> RunReport:
    """Execute all (solver x trial) runs, write traces and the report."""
    config.validate()
    out_dir = Path(config.out_dir)
    trace_dir = out_dir / "traces"
    trace_dir.mkdir(parents=True, exist_ok=True)

    shared = None
    if config.source == "matrix_market":
        op = load_matrix_market(config.matrix_path)
        shared = (op, _ground_truth_for(config, op))

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(lambda t: _run_trial(config, t, shared), range(config.trials)))
    else:
        chunks = [_run_trial(config, t, shared) for t in range(config.trials)]

    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda r: (r.solver, r.trial))

    trace_paths = emit_traces(records, trace_dir)
    stats = _aggregate(config, records)
    report = RunReport(
        baseline=_baseline_label(config), stats=stats, records=records,
        trace_paths=[str(p) for p in trace_paths],
    )
    with open(out_dir / "report.json", "w", encoding="ascii") as fh:
        json.dump(report.to_dict(), fh, indent=2)
    return report


def _baseline_label(config: ExperimentConfig) -> str:
    for s in config.solvers:
        if s.label == config.baseline or s.method == config.baseline:
            return s.label
    return config.solvers[0].label


def _aggregate(config: ExperimentConfig, records: list[TrialRecord]) -> list[SolverStats]:
    baseline = _baseline_label(config)
    by_solver: dict[str, list[TrialRecord]] = {}
    for rec in records:
        by_solver.setdefault(rec.solver, []).append(rec)

    def ok(recs):
        return [r for r in recs if r.error is None]

    base_ok = ok(by_solver[baseline])
    base_time = statistics.fmean(r.seconds for r in base_ok) if base_ok else math.nan
    base_mv = statistics.fmean(r.matvecs for r in base_ok) if base_ok else math.nan

    stats = []
    for setting in config.solvers:
        recs = by_solver[setting.label]
        good = ok(recs)
        secs = [r.seconds for r in good]
        its = [float(r.iterations) for r in good]
        mvs = [float(r.matvecs) for r in good]
        stats.append(
            SolverStats(
                solver=setting.label,
                trials=len(recs),
                breakdowns=sum(1 for r in recs if r.error is not None),
                non_converged=sum(1 for r in good if not r.converged),
                mean_seconds=_mean(secs), median_seconds=_median(secs), std_seconds=_std(secs),
                mean_iterations=_mean(its), median_iterations=_median(its), std_iterations=_std(its),
                mean_matvecs=_mean(mvs), median_matvecs=_median(mvs), std_matvecs=_std(mvs),
                speedup_time=base_time / _mean(secs) if secs else math.nan,
                speedup_matvecs=base_mv / _mean(mvs) if mvs else math.nan,
            )
        )
    return stats


def _mean(xs):
    return statistics.fmean(xs) if xs else math.nan


def _median(xs):
    return statistics.median(xs) if xs else math.nan


def _std(xs):
    return statistics.pstdev(xs) if len(xs) > 1 else 0.0


TRACE_HEADER = "k,sin_theta,f_minus_fstar,rayleigh,residual,matvecs,seconds,neg_zeta_over_omega"


def emit_traces(records: list[TrialRecord], out_dir) -> list[Path]:
    """One CSV per completed run; unavailable columns are left empty."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for rec in records:
        if rec.result is None:
            continue
        path = out_dir / f"{_slug(rec.solver)}__trial{rec.trial:03d}.csv"
        trace = rec.result.trace
        with open(path, "w", newline="", encoding="ascii") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_HEADER.split(","))
            for i, k in enumerate(trace.k):
                sin_t = trace.sin_theta[i]
                f_gap = trace.f_value[i] - rec.f_star
                coeff = trace.coeffs[i] if trace.coeffs else None
                nzo = coeff.neg_zeta_over_omega if coeff is not None else math.nan
                writer.writerow(
                    [
                        k,
                        _fmt(sin_t),
                        _fmt(f_gap),
                        _fmt(trace.rayleigh[i]),
                        _fmt(trace.residual[i]),
                        trace.matvecs[i],
                        _fmt(trace.seconds[i]),
                        _fmt(nzo),
                    ]
                )
        paths.append(path)
    return paths


def _fmt(value: float) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{value:.17g}"


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", label)


# -- config file parsing -------------------------------------------------------

_SOLVER_RE = re.compile(r"^([a-z_]+)(?:\((.*)\))?$")


def parse_solver_list(text: str) -> list[SolverSetting]:
    """Parse 'power, split_merge, gd_difference(alpha=0.9)' into settings."""
    settings = []
    for chunk in _split_solvers(text):
        match = _SOLVER_RE.match(chunk.strip())
        if not match:
            raise ConfigError(f"cannot parse solver entry {chunk!r}")
        name, argtext = match.group(1), match.group(2)
        params = {}
        if argtext:
            for pair in argtext.split(","):
                if "=" not in pair:
                    raise ConfigError(f"solver parameter needs key=value: {pair!r}")
                key, value = (t.strip() for t in pair.split("=", 1))
                params[key] = _coerce(value)
        settings.append(SolverSetting(method=name, params=params))
    return settings


def _split_solvers(text: str) -> list[str]:
    # split on commas that are not inside parentheses
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [p for p in (s.strip() for s in parts) if p]


def _coerce(value: str):
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        pass
    return value


_CONFIG_KEYS = {
    "source": str,
    "n": int,
    "gap": float,
    "matrix": str,
    "solvers": parse_solver_list,
    "baseline": str,
    "trials": int,
    "eps": float,
    "max_iter": int,
    "seed": int,
    "out": str,
    "stop_mode": str,
    "residual_tol": float,
    "workers": int,
    "dense_limit": int,
}

_KEY_TO_FIELD = {"matrix": "matrix_path", "out": "out_dir"}


def load_config(path) -> ExperimentConfig:
    """Read the key=value config format documented in the module docstring."""
    config = ExperimentConfig()
    text = Path(path).read_text(encoding="ascii")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (t.strip() for t in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            parsed = _CONFIG_KEYS[key](value)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
        setattr(config, _KEY_TO_FIELD.get(key, key), parsed)
    return config
