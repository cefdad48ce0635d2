"""Iterative dominant-eigenvector solvers sharing one driver.

Methods: classical power iteration, gradient descent on the difference
objective with step alpha in (0,1), power iteration with momentum, and the
split-merge update x+ = zeta*Ax + omega*A^2x whose scalars are recomputed
each iteration from two matvecs and a handful of dot products.

None of split_merge / gd_difference normalize their iterates: the update
dynamics keep ||x|| near sqrt(lambda1)/2 and the curvature scalar sigma is
not scale-invariant, so normalizing would change the trajectory. Overflow
guards stand in for normalization.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BreakdownError,
    InitializationError,
    NonDifferentiablePointError,
    OverflowGuardError,
    SigmaNotPositiveError,
)
from .linop import LinearOperator

METHODS = ("power", "gd_difference", "power_momentum", "split_merge")
RHO_POLICIES = ("fixed_one_with_safeguard", "convergence_guaranteed")
STOP_MODES = ("oracle_angle", "residual")

# D <= factor * ||A^2 x||^2 triggers the DCA fallback. The factor sits at the
# float64 noise floor of the cancellation in D so the guard catches exact
# eigenvectors (D = 0) and noise-negative D without amputating the adaptive
# phase on small-gap problems.
DEGENERATE_FACTOR = 1e-16
SAFEGUARD_SCALE = 1.2        # rho = 1.2 * gamma/mu when gamma/mu >= 1
NORM_GUARD = (1e-150, 1e150)


@dataclass
class SolverConfig:
    """Run parameters for :func:`solve`.

    rho_policy is one of the named policies or a float, meaning a constant
    rho (which must keep sigma > 0, otherwise the step raises).
    """

    method: str
    alpha: float = 0.5
    beta: float = 0.0
    eps: float = 1e-5
    max_iter: int = 20000
    rho_policy: str | float = "fixed_one_with_safeguard"
    stop_mode: str = "oracle_angle"
    residual_tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if self.stop_mode not in STOP_MODES:
            raise ValueError(f"unknown stop_mode {self.stop_mode!r}")
        if isinstance(self.rho_policy, str) and self.rho_policy not in RHO_POLICIES:
            raise ValueError(f"unknown rho_policy {self.rho_policy!r}")
        if self.method == "gd_difference" and not 0.0 < self.alpha < 1.0:
            # alpha*L+ in (0,2) with L+ = 2 restricts the step to (0,1)
            raise ValueError(f"gd_difference needs alpha in (0,1), got {self.alpha}")
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.beta < 0.0:
            raise ValueError("beta must be >= 0")
        if self.residual_tol <= 0.0:
            raise ValueError("residual_tol must be positive")


@dataclass
class SplitMergeCoefficients:
    """Per-iteration scalars of the split-merge update, plus cached products.

    ``w`` and ``z`` are the Ax and A^2x computed while forming the scalars;
    the step consumes them so each iteration costs exactly two matvecs.
    ``degenerate`` marks an iterate that is numerically an eigenvector, in
    which case the coefficients describe the pure DCA step (omega = 0).
    """

    mu: float
    gamma: float
    sigma: float
    zeta: float
    omega: float
    rho: float
    degenerate: bool
    w: np.ndarray | None = None
    z: np.ndarray | None = None

    @property
    def neg_zeta_over_omega(self) -> float:
        if self.omega == 0.0:
            return math.nan
        return -self.zeta / self.omega


@dataclass
class IterationTrace:
    """Per-iteration history of a solver run.

    Record k describes iterate x_k. ``matvecs`` is cumulative from the start
    of the loop and includes the products used to measure x_k itself, so the
    per-record delta is exactly 1 for the one-matvec methods and 2 for
    split_merge. ``coeffs[k]`` (split_merge only) holds the scalars computed
    at x_k; the ones at the final record were never applied.
    """

    method: str
    k: list[int] = field(default_factory=list)
    sin_theta: list[float] = field(default_factory=list)
    f_value: list[float] = field(default_factory=list)
    rayleigh: list[float] = field(default_factory=list)
    lambda_of_x: list[float] = field(default_factory=list)
    residual: list[float] = field(default_factory=list)
    matvecs: list[int] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)
    coeffs: list[SplitMergeCoefficients] | None = None

    def applied_coeffs(self) -> list[SplitMergeCoefficients]:
        """Coefficients that actually produced a step (drops the final record's)."""
        if not self.coeffs:
            return []
        return self.coeffs[: max(len(self.k) - 1, 0)]


@dataclass
class SolveResult:
    x: np.ndarray
    x_unit: np.ndarray
    lambda_estimate: float      # lambda(x_K) = 2*sqrt(x'Ax)
    rayleigh_estimate: float
    iterations: int
    converged: bool
    trace: IterationTrace


def init_vector(n: int, seed, op: LinearOperator) -> np.ndarray:
    """Unit-norm standard-normal start with x'Ax bounded away from zero.

    Redraws up to 100 times until x'Ax > 1e-12 * ||A||_F, which keeps the
    first iterate inside the differentiable set.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    rng = np.random.default_rng(seed)
    floor = 1e-12 * op.frobenius_norm
    for _ in range(100):
        x = rng.standard_normal(n)
        norm = np.linalg.norm(x)
        if norm == 0.0:
            continue
        x /= norm
        if float(x @ op.apply(x)) > floor:
            return x
    raise InitializationError(
        "could not draw a starting vector with x'Ax > 1e-12*||A||_F in 100 tries"
    )


# -- single steps (public contract: each does its own matvecs) ---------------


def power_step(op: LinearOperator, x: np.ndarray) -> np.ndarray:
    """Ax / ||Ax||. One matvec."""
    return _power_dir(op.apply(np.asarray(x, dtype=float)))


def gd_step(op: LinearOperator, x: np.ndarray, alpha: float) -> np.ndarray:
    """(1 - 2*alpha)*x + alpha*Ax/sqrt(x'Ax), unnormalized. One matvec."""
    x = np.asarray(x, dtype=float)
    return _gd_next(x, op.apply(x), alpha)


def power_momentum_step(
    op: LinearOperator, x_curr: np.ndarray, x_prev: np.ndarray, beta: float
) -> tuple[np.ndarray, np.ndarray]:
    """y = A x_curr - beta x_prev; returns (y/||y||, x_curr/||y||).

    Scaling the previous iterate by the same 1/||y|| keeps the momentum
    recursion equivalent to the unnormalized scheme, so beta retains its
    meaning across iterations.
    """
    x_curr = np.asarray(x_curr, dtype=float)
    return _momentum_next(op.apply(x_curr), x_curr, np.asarray(x_prev, dtype=float), beta)


def split_merge_coeffs(
    op: LinearOperator, x: np.ndarray, rho_policy: str | float = "fixed_one_with_safeguard"
) -> SplitMergeCoefficients:
    """Split-merge scalars at x. Two matvecs; products cached on the result."""
    x = np.asarray(x, dtype=float)
    w = op.apply(x)
    z = op.apply(w)
    return _coeffs_from_products(op, x, w, z, rho_policy)


def split_merge_step(
    op: LinearOperator, x: np.ndarray, coeffs: SplitMergeCoefficients
) -> np.ndarray:
    """zeta*Ax + omega*A^2x using the products cached in ``coeffs``. No matvecs."""
    if coeffs.w is None or (coeffs.z is None and not coeffs.degenerate):
        raise ValueError("coefficients carry no cached products; compute them at this x")
    if coeffs.degenerate:
        nxt = coeffs.zeta * coeffs.w
    else:
        nxt = coeffs.zeta * coeffs.w + coeffs.omega * coeffs.z
    norm = float(np.linalg.norm(nxt))
    if not NORM_GUARD[0] <= norm <= NORM_GUARD[1]:
        raise OverflowGuardError(f"iterate norm {norm:.3e} outside {NORM_GUARD}")
    return nxt


# -- cached-product step kernels (shared by the public steps and the driver) --


def _power_dir(w: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(w))
    if norm < 1e-300:
        raise BreakdownError("power step broke down: ||Ax|| ~ 0")
    return w / norm


def _gd_next(x: np.ndarray, w: np.ndarray, alpha: float) -> np.ndarray:
    quad = float(x @ w)
    if quad <= 0.0:
        raise NonDifferentiablePointError("gd step at a point with x'Ax <= 0")
    return (1.0 - 2.0 * alpha) * x + (alpha / np.sqrt(quad)) * w


def _momentum_next(
    w: np.ndarray, x_curr: np.ndarray, x_prev: np.ndarray, beta: float
) -> tuple[np.ndarray, np.ndarray]:
    y = w - beta * x_prev
    norm = float(np.linalg.norm(y))
    if norm < 1e-300:
        raise BreakdownError("momentum step broke down: ||Ax - beta*x_prev|| ~ 0")
    return y / norm, x_curr / norm


def _coeffs_from_products(
    op: LinearOperator,
    x: np.ndarray,
    w: np.ndarray,
    z: np.ndarray,
    rho_policy: str | float,
) -> SplitMergeCoefficients:
    xtw = float(x @ w)           # x'Ax
    if xtw <= 0.0:
        raise NonDifferentiablePointError("split-merge coefficients need x'Ax > 0")
    wtw = float(w @ w)           # x'A^2x by symmetry
    mu = 2.0 * math.sqrt(xtw)

    c = wtw / xtw
    g = z - c * w                # orthogonal residual of A^2x against Ax
    num = float(g @ g)           # ||A^2x - c*Ax||^2
    den = float(g @ w)           # x'A^3x - (x'A^2x)^2 / x'Ax

    if den <= DEGENERATE_FACTOR * float(z @ z):
        # x is numerically an eigenvector: gamma is 0/0, fall back to the
        # DCA step Ax / (2*sqrt(x'Ax)), i.e. the v = 0 member of the family.
        return SplitMergeCoefficients(
            mu=mu, gamma=0.0, sigma=1.0, zeta=1.0 / mu, omega=0.0, rho=1.0,
            degenerate=True, w=w, z=z,
        )

    gamma = num / den
    ratio = gamma / mu
    if isinstance(rho_policy, str):
        if rho_policy == "fixed_one_with_safeguard":
            rho = SAFEGUARD_SCALE * ratio if ratio >= 1.0 else 1.0
        elif rho_policy == "convergence_guaranteed":
            # rho >= gamma/mu + x'A^2x / (2*(x'Ax)^{3/2}) forces zeta >= 0,
            # which pins every rate ratio into [0, 1].
            rho = max(1.0, ratio + wtw / (2.0 * xtw**1.5)) + 1e-12
        else:
            raise ValueError(f"unknown rho policy {rho_policy!r}")
    else:
        rho = float(rho_policy)

    sigma = 1.0 - gamma / (rho * mu)
    if sigma <= 0.0:
        raise SigmaNotPositiveError(
            f"sigma = {sigma:.6e} <= 0 under rho = {rho:.6g}: surrogate not positive definite"
        )
    zeta = 1.0 / mu - 4.0 * wtw / (mu**4 * sigma * rho)
    omega = 1.0 / (mu**2 * sigma * rho)
    return SplitMergeCoefficients(
        mu=mu, gamma=gamma, sigma=sigma, zeta=zeta, omega=omega, rho=rho,
        degenerate=False, w=w, z=z,
    )


# -- driver -------------------------------------------------------------------


def solve(
    op: LinearOperator,
    config: SolverConfig,
    ground_truth=None,
    x0: np.ndarray | None = None,
) -> SolveResult:
    """Run the configured method with per-iteration trace recording.

    ``ground_truth`` needs a unit ``u1`` attribute (a Spectrum or dominant
    reference) and is required in oracle_angle stop mode. Hitting the
    iteration cap is not an error; the result just has converged=False.
    Diagnostics reuse the step's own matvecs, so the cumulative matvec count
    advances by exactly the method's per-iteration cost.
    """
    u1 = None
    if ground_truth is not None:
        u1 = np.asarray(ground_truth.u1, dtype=float)
        u1 = u1 / np.linalg.norm(u1)
    if config.stop_mode == "oracle_angle" and u1 is None:
        raise ValueError("oracle_angle stop mode requires ground truth")

    if x0 is None:
        x = init_vector(op.n, config.seed, op)
    else:
        x = np.asarray(x0, dtype=float).copy()

    is_sm = config.method == "split_merge"
    trace = IterationTrace(method=config.method, coeffs=[] if is_sm else None)
    x_prev = np.zeros_like(x)  # momentum state; zero start makes step 0 a power step

    mv0 = op.matvec_count
    t0 = time.perf_counter()
    converged = False
    iterations = 0

    for k in range(config.max_iter + 1):
        w = op.apply(x)
        z = op.apply(w) if is_sm else None

        xtx = float(x @ x)
        quad = float(x @ w)
        if quad <= 0.0:
            raise NonDifferentiablePointError(f"x'Ax = {quad:.3e} at iteration {k}")
        s = math.sqrt(quad)
        r = quad / xtx
        resid = float(np.linalg.norm(w - r * x)) / math.sqrt(xtx)

        sin_t = math.nan
        if u1 is not None:
            cos_t = abs(float(u1 @ x)) / math.sqrt(xtx)
            sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))

        coeffs = None
        if is_sm:
            coeffs = _coeffs_from_products(op, x, w, z, config.rho_policy)
            trace.coeffs.append(coeffs)

        trace.k.append(k)
        trace.sin_theta.append(sin_t)
        trace.f_value.append(xtx - s)
        trace.rayleigh.append(r)
        trace.lambda_of_x.append(2.0 * s)
        trace.residual.append(resid)
        trace.matvecs.append(op.matvec_count - mv0)
        trace.seconds.append(time.perf_counter() - t0)

        iterations = k
        if config.stop_mode == "oracle_angle":
            stop = sin_t <= config.eps
        else:
            stop = resid / r <= config.residual_tol
        if stop:
            converged = True
            break
        if k == config.max_iter:
            break

        if config.method == "power":
            x = _power_dir(w)
        elif config.method == "gd_difference":
            x = _gd_next(x, w, config.alpha)
        elif config.method == "power_momentum":
            x, x_prev = _momentum_next(w, x, x_prev, config.beta)
        else:
            x = split_merge_step(op, x, coeffs)

    norm_x = float(np.linalg.norm(x))
    return SolveResult(
        x=x,
        x_unit=x / norm_x,
        lambda_estimate=trace.lambda_of_x[-1],
        rayleigh_estimate=trace.rayleigh[-1],
        iterations=iterations,
        converged=converged,
        trace=trace,
    )
