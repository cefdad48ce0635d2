"""Ground-truth oracle and executable checks of the convergence theory.

The dense oracle is a cyclic Jacobi eigendecomposition: slow but
unconditionally robust for symmetric input, which is all a test fixture
needs. Everything else here consumes its output: square-root factors
F'F = A, angle errors against the true dominant eigenvector, the rate
constant delta, per-iteration convergence bounds, and the two surrogate
verifications (dominance sampling and the closed-form direction
cross-validation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    NonDifferentiablePointError,
    OracleConvergenceError,
    UndefinedRatioError,
)
from .linop import LinearOperator
from .objective import hessian_vec
from .solvers import IterationTrace, _coeffs_from_products, split_merge_step

DENSE_LIMIT_DEFAULT = 4096
JACOBI_MAX_SWEEPS = 50
JACOBI_OFF_TOL = 1e-13
PSD_EIG_CLAMP = 1e-10
RANK_TOL = 1e-12


@dataclass
class Spectrum:
    """Full eigendecomposition, eigenvalues descending, eigenvectors in columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float)
        self.eigenvectors = np.asarray(self.eigenvectors, dtype=float)
        if np.any(np.diff(self.eigenvalues) > 0):
            raise ValueError("eigenvalues must be sorted descending")

    @property
    def lambda1(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def u1(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    @property
    def gap(self) -> float:
        return float(self.eigenvalues[0] - self.eigenvalues[1])


@dataclass
class DominantReference:
    """Residual-certified dominant eigenpair for matrices too large to decompose."""

    lambda1: float
    u1: np.ndarray
    residual: float


@dataclass
class AngleError:
    """sin/cos of the angle between an iterate and the dominant eigenvector."""

    sin_theta: float
    cos_theta: float

    @property
    def tan_theta(self) -> float:
        if self.cos_theta == 0.0:
            return math.inf
        return self.sin_theta / self.cos_theta


def dense_eigendecomposition(
    op: LinearOperator, dense_limit: int = DENSE_LIMIT_DEFAULT, clamp_psd: bool = True
) -> Spectrum:
    """Cyclic Jacobi eigendecomposition of a symmetric operator.

    Sweeps until the off-diagonal Frobenius mass drops below
    1e-13 * ||A||_F, then sorts eigenpairs descending. Eigenvalues in
    (-1e-10 * lambda_max, 0) are clamped to 0 when clamp_psd is set, since
    they are roundoff artifacts for PSD input.
    """
    if op.n > dense_limit:
        raise ValueError(f"n = {op.n} exceeds the dense oracle limit {dense_limit}")
    a = op.to_dense()
    n = a.shape[0]
    v = np.eye(n)
    fro = float(np.linalg.norm(a))
    if n == 1 or fro == 0.0:
        eigs = np.diag(a).astype(float).copy()
        order = np.argsort(eigs)[::-1]
        return Spectrum(eigs[order], v[:, order])

    converged = False
    for sweep in range(JACOBI_MAX_SWEEPS + 1):
        # summed directly off the matrix: the ||A||_F^2 - sum(diag^2) shortcut
        # cancels catastrophically once the off-diagonal mass is tiny
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= JACOBI_OFF_TOL * fro:
            converged = True
            break
        if sweep == JACOBI_MAX_SWEEPS:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                app, aqq = a[p, p], a[q, q]
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    if not converged:
        raise OracleConvergenceError(
            f"Jacobi sweeps did not reduce off-diagonal mass in {JACOBI_MAX_SWEEPS} sweeps"
        )

    eigs = np.diag(a).copy()
    order = np.argsort(eigs)[::-1]
    eigs = eigs[order]
    vecs = v[:, order]
    if clamp_psd and eigs.size:
        top = abs(eigs[0])
        tiny = (eigs < 0.0) & (eigs > -PSD_EIG_CLAMP * top)
        eigs[tiny] = 0.0
    return Spectrum(eigs, vecs)


def reference_dominant_eigenpair(
    op: LinearOperator, tol: float = 1e-12, certify: float = 1e-10, max_iter: int = 1_000_000
) -> DominantReference:
    """Dominant eigenpair by power iteration with a residual certificate.

    Ground-truth path for operators beyond the dense oracle limit. Runs on
    an isolated counter so callers' matvec accounting is unaffected.
    """
    view = op.share()
    rng = np.random.default_rng(0)
    x = rng.standard_normal(view.n)
    x /= np.linalg.norm(x)
    r = 0.0
    for _ in range(max_iter):
        w = view.apply(x)
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            raise OracleConvergenceError("power reference broke down on a nullspace vector")
        r = float(x @ w)
        resid = float(np.linalg.norm(w - r * x))
        if r > 0 and resid <= tol * r:
            break
        x = w / norm_w
    resid = float(np.linalg.norm(view.apply(x) - r * x))
    if not (r > 0 and resid <= certify * r):
        raise OracleConvergenceError(
            f"power reference residual {resid:.3e} not certified below {certify:.0e}*r"
        )
    return DominantReference(lambda1=r, u1=x, residual=resid)


@dataclass
class SquareRootFactor:
    """F with F'F = A, built as sqrt(L+) U' over the positive eigenvalues."""

    factor: np.ndarray  # (r, n)

    @staticmethod
    def from_spectrum(spectrum: Spectrum, rank_tol: float = RANK_TOL) -> "SquareRootFactor":
        lam = spectrum.eigenvalues
        keep = lam > rank_tol * max(lam[0], 0.0) if lam[0] > 0 else lam > 0
        f = np.sqrt(lam[keep])[:, None] * spectrum.eigenvectors[:, keep].T
        return SquareRootFactor(factor=f)

    def __matmul__(self, x: np.ndarray) -> np.ndarray:
        return self.factor @ x

    @property
    def rank(self) -> int:
        return self.factor.shape[0]


def sin_theta(x: np.ndarray, u1: np.ndarray) -> AngleError:
    """Angle between x and the unit dominant eigenvector u1."""
    x = np.asarray(x, dtype=float)
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        raise ValueError("angle undefined for the zero vector")
    cos = abs(float(np.asarray(u1, dtype=float) @ x)) / norm
    cos = min(cos, 1.0)
    return AngleError(sin_theta=math.sqrt(max(0.0, 1.0 - cos * cos)), cos_theta=cos)


def compute_delta(spectrum: Spectrum, zeta: float, omega: float) -> float:
    """max_{j>=2} |(zeta + omega*lambda_j) / (zeta + omega*lambda_1)|."""
    lam = spectrum.eigenvalues
    denom = zeta + omega * lam[0]
    if denom == 0.0:
        raise UndefinedRatioError("zeta + omega*lambda1 = 0: rate ratio undefined")
    if lam.size == 1:
        return 0.0
    return float(np.max(np.abs((zeta + omega * lam[1:]) / denom)))


@dataclass
class Theorem51Bounds:
    """Per-iteration angle and Rayleigh bounds, with the certified delta."""

    delta: float
    applicable: bool            # False when delta > 1 at some iteration
    bound_sin: np.ndarray
    bound_rayleigh: np.ndarray
    delta_per_iteration: np.ndarray


def theorem51_bounds(
    spectrum: Spectrum, trace: IterationTrace, theta0: AngleError
) -> Theorem51Bounds:
    """Convergence-rate envelopes from the recorded split-merge coefficients.

    bound_sin[k]      = tan(theta0) * (lambda2/lambda1)^k * delta^k
    bound_rayleigh[k] = (lambda1 - lambda_n) * tan(theta0)^2
                        * (lambda2/lambda1)^{2k} * delta^{2k}

    with delta the max of the per-step ratios over the coefficients that
    actually produced iterates. delta > 1 only flags the bounds as not
    applicable; it is not an error.
    """
    lam = spectrum.eigenvalues
    coeffs = trace.applied_coeffs()
    deltas = np.array([compute_delta(spectrum, c.zeta, c.omega) for c in coeffs])
    delta = float(deltas.max()) if deltas.size else 0.0
    ks = np.asarray(trace.k, dtype=float)
    ratio = (lam[1] / lam[0]) * delta
    tan0 = theta0.tan_theta
    with np.errstate(over="ignore"):  # delta > 1 envelopes blow up to inf, harmlessly
        bound_sin = tan0 * ratio**ks
        bound_rq = (lam[0] - lam[-1]) * tan0**2 * ratio ** (2.0 * ks)
    return Theorem51Bounds(
        delta=delta,
        applicable=bool(delta <= 1.0),
        bound_sin=bound_sin,
        bound_rayleigh=bound_rq,
        delta_per_iteration=deltas,
    )


# -- surrogate machinery ------------------------------------------------------


def _factor_and_products(op: LinearOperator, x: np.ndarray):
    x = np.asarray(x, dtype=float)
    w = op.apply(x)
    quad = float(x @ w)
    if quad <= 0.0 or float(np.linalg.norm(w)) <= 1e-14 * op.frobenius_norm * float(
        np.linalg.norm(x)
    ):
        raise NonDifferentiablePointError("surrogate checks need x with Ax != 0")
    spectrum = dense_eigendecomposition(op)
    factor = SquareRootFactor.from_spectrum(spectrum)
    return factor, spectrum, w, quad


def project_direction(v: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Project v orthogonal to unit u and rescale into the unit ball."""
    v = np.asarray(v, dtype=float) - (float(v @ u)) * u
    norm = float(np.linalg.norm(v))
    if norm > 1.0:
        v = v / norm
    return v


def surrogate_quadratic_form(
    factor: SquareRootFactor, quad: float, w: np.ndarray, u: np.ndarray, v: np.ndarray,
    d: np.ndarray,
) -> float:
    """d' H d for H = 2I - F'(uu' + vv')F / s + (Ax)(Ax)' / s^3, s = sqrt(x'Ax)."""
    s = math.sqrt(quad)
    fd = factor @ d
    return (
        2.0 * float(d @ d)
        - (float(u @ fd) ** 2 + float(v @ fd) ** 2) / s
        + float(w @ d) ** 2 / s**3
    )


def surrogate_matrix(
    factor: SquareRootFactor, quad: float, w: np.ndarray, u: np.ndarray, v: np.ndarray
) -> np.ndarray:
    """Dense H for small-n verification."""
    s = math.sqrt(quad)
    n = factor.factor.shape[1]
    fu = factor.factor.T @ u
    fv = factor.factor.T @ v
    return (
        2.0 * np.eye(n)
        - (np.outer(fu, fu) + np.outer(fv, fv)) / s
        + np.outer(w, w) / s**3
    )


def hessian_matrix(op: LinearOperator, x: np.ndarray) -> np.ndarray:
    """Dense objective Hessian for small-n verification (via hessian_vec)."""
    n = op.n
    cols = [hessian_vec(op, x, e) for e in np.eye(n)]
    return np.column_stack(cols)


def verify_surrogate_dominance(
    op: LinearOperator, x: np.ndarray, v: np.ndarray, samples: int, rng=None
) -> bool:
    """Sampled check of 2||d||^2 >= d'Hd >= d'(hess f)d at x.

    u is fixed to Fx/||Fx||; v is projected orthogonal to u and rescaled into
    the unit ball before the check, matching the surrogate's admissible set.
    """
    factor, _, w, quad = _factor_and_products(op, x)
    fx = factor @ x
    u = fx / np.linalg.norm(fx)
    v = project_direction(np.asarray(v, dtype=float), u)
    rng = np.random.default_rng(rng)
    for _ in range(samples):
        d = rng.standard_normal(op.n)
        d /= np.linalg.norm(d)
        quad_h = surrogate_quadratic_form(factor, quad, w, u, v, d)
        quad_hess = float(d @ hessian_vec(op, x, d))
        if quad_h < quad_hess - 1e-9:
            return False
        if 2.0 * float(d @ d) < quad_h - 1e-9:
            return False
    return True


@dataclass
class VhatCheck:
    passed: bool
    skipped: bool
    vhat: np.ndarray | None = None
    explicit_next: np.ndarray | None = None
    merged_next: np.ndarray | None = None


def verify_vhat_formula(op: LinearOperator, x: np.ndarray, rho: float) -> VhatCheck:
    """Cross-validate the merged update against the explicit-factor form.

    Builds F, forms the optimal direction
    vhat = (FF'Fx - c*Fx) / (sqrt(rho) * ||FF'Fx - c*Fx||), c = x'A^2x / x'Ax,
    checks vhat ' Fx ~ 0 and ||vhat||^2 = 1/rho, then compares
    x - H^{-1} grad f (explicit rank-1 inverse) with the two-matvec merged
    step. Degenerate x (no orthogonal component) is skipped, not failed.
    """
    factor, _, w, quad = _factor_and_products(op, x)
    x = np.asarray(x, dtype=float)
    fx = factor @ x
    z = op.apply(w)
    c = float(w @ w) / quad
    g_split = factor.factor @ (factor.factor.T @ fx) - c * fx   # FF'Fx - c*Fx
    norm_g = float(np.linalg.norm(g_split))
    den = float((z - c * w) @ w)
    if den <= 1e-14 * float(z @ z):
        return VhatCheck(passed=True, skipped=True)

    vhat = g_split / (math.sqrt(rho) * norm_g)
    s = math.sqrt(quad)
    if abs(float(vhat @ fx)) > 1e-10:
        return VhatCheck(passed=False, skipped=False, vhat=vhat)
    if abs(float(vhat @ vhat) - 1.0 / rho) > 1e-10:
        return VhatCheck(passed=False, skipped=False, vhat=vhat)

    # explicit update: Ax/(2s) + ((F'v)'Ax / (4*sigma*quad)) * F'v
    fv = factor.factor.T @ vhat
    sigma = 1.0 - float(fv @ fv) / (2.0 * s)
    explicit = w / (2.0 * s) + (float(fv @ w) / (4.0 * sigma * quad)) * fv

    coeffs = _coeffs_from_products(op, x, w, z, rho)
    merged = split_merge_step(op, x, coeffs)
    rel = float(np.linalg.norm(explicit - merged)) / float(np.linalg.norm(merged))
    return VhatCheck(
        passed=rel <= 1e-8,
        skipped=False,
        vhat=vhat,
        explicit_next=explicit,
        merged_next=merged,
    )
