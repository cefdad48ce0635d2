"""Matrix-free symmetric PSD linear operators.

Dense and sparse-CSR backends behind one ``apply`` interface with exact
matvec accounting, Matrix Market ingestion, and a Gershgorin-based shift
that makes an indefinite symmetric operator PSD.
"""

from __future__ import annotations

import threading

import numpy as np
import scipy.sparse as sp

from .errors import (
    AsymmetricMatrixError,
    DimensionMismatchError,
    IndexOutOfRangeError,
    MatrixMarketError,
    MatrixMarketHeaderError,
    NonSquareMatrixError,
)

SYMMETRY_PROBE_TOL = 1e-10
PSD_PROBE_TOL = 1e-10


class LinearOperator:
    """Symmetric linear operator exposing ``y = A @ x`` and a matvec counter.

    Subclasses implement ``_apply`` plus the entry-level queries needed by
    the Gershgorin shift. Operators are immutable after construction; the
    matvec counter is the only mutable state and is lock-protected so
    concurrent benchmark trials can share an operator (or take an isolated
    counter via :meth:`share`).
    """

    def __init__(self, n: int):
        if n < 1:
            raise DimensionMismatchError(f"operator dimension must be >= 1, got {n}")
        self.n = int(n)
        self.symmetry_checked = False
        self._matvec_count = 0
        self._count_lock = threading.Lock()

    # -- backend interface -------------------------------------------------

    def _apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_dense(self) -> np.ndarray:
        raise NotImplementedError

    def diagonal(self) -> np.ndarray:
        raise NotImplementedError

    def abs_row_sums(self) -> np.ndarray:
        """Row sums of |a_ij|, diagonal included."""
        raise NotImplementedError

    @property
    def frobenius_norm(self) -> float:
        raise NotImplementedError

    # -- shared behavior ----------------------------------------------------

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Return A @ x, counting exactly one matvec."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionMismatchError(
                f"expected vector of length {self.n}, got shape {x.shape}"
            )
        with self._count_lock:
            self._matvec_count += 1
        return self._apply(x)

    @property
    def matvec_count(self) -> int:
        with self._count_lock:
            return self._matvec_count

    def share(self) -> "LinearOperator":
        """Shallow copy sharing storage but with a fresh matvec counter.

        Used by the benchmark so each solver run owns its tally even when
        trials execute concurrently over one matrix.
        """
        clone = object.__new__(type(self))
        clone.__dict__.update(self.__dict__)
        clone._matvec_count = 0
        clone._count_lock = threading.Lock()
        return clone

    def check_symmetry(self, probes: int = 8, rng=None) -> bool:
        """Probe |u'(Aw) - w'(Au)| <= tol * ||A||_F ||u|| ||w|| on random pairs."""
        rng = np.random.default_rng(rng)
        scale = self.frobenius_norm
        for _ in range(probes):
            u = rng.standard_normal(self.n)
            w = rng.standard_normal(self.n)
            lhs = abs(u @ self._apply(w) - w @ self._apply(u))
            if lhs > SYMMETRY_PROBE_TOL * scale * np.linalg.norm(u) * np.linalg.norm(w):
                return False
        self.symmetry_checked = True
        return True

    def check_psd(self, probes: int = 16, rng=None) -> bool:
        """Probe x'Ax >= -tol * ||A||_F ||x||^2 on random vectors."""
        rng = np.random.default_rng(rng)
        scale = self.frobenius_norm
        for _ in range(probes):
            x = rng.standard_normal(self.n)
            if x @ self._apply(x) < -PSD_PROBE_TOL * scale * (x @ x):
                return False
        return True


class DenseOperator(LinearOperator):
    """Dense symmetric backend over an n x n float array."""

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchError(f"expected a square matrix, got {matrix.shape}")
        super().__init__(matrix.shape[0])
        self._a = matrix
        self._fro = float(np.linalg.norm(matrix))

    def _apply(self, x):
        return self._a @ x

    def to_dense(self):
        return self._a.copy()

    def diagonal(self):
        return np.diag(self._a).copy()

    def abs_row_sums(self):
        return np.abs(self._a).sum(axis=1)

    @property
    def frobenius_norm(self):
        return self._fro


class CsrOperator(LinearOperator):
    """Sparse CSR backend storing the full symmetric pattern (both triangles)."""

    def __init__(self, matrix: sp.spmatrix):
        matrix = sp.csr_matrix(matrix).astype(float)
        if matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchError(f"expected a square matrix, got {matrix.shape}")
        super().__init__(matrix.shape[0])
        matrix.sum_duplicates()
        self._a = matrix
        self._fro = float(np.sqrt((matrix.data**2).sum()))

    def _apply(self, x):
        return self._a @ x

    def to_dense(self):
        return self._a.toarray()

    def diagonal(self):
        return self._a.diagonal()

    def abs_row_sums(self):
        return np.asarray(abs(self._a).sum(axis=1)).ravel()

    @property
    def frobenius_norm(self):
        return self._fro


class ShiftedOperator(LinearOperator):
    """sign * A + eta * I, i.e. A + eta*I (sign=+1) or -(A - eta*I) (sign=-1).

    Both signs are PSD for a sufficiently large eta; the positive sign is
    what :func:`gershgorin_shift` produces.
    """

    def __init__(self, base: LinearOperator, eta: float, sign: int = 1):
        if sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {sign}")
        super().__init__(base.n)
        self.base = base
        self.eta = float(eta)
        self.sign = int(sign)

    def _apply(self, x):
        return self.sign * self.base._apply(x) + self.eta * x

    def to_dense(self):
        return self.sign * self.base.to_dense() + self.eta * np.eye(self.n)

    def diagonal(self):
        return self.sign * self.base.diagonal() + self.eta

    def abs_row_sums(self):
        off = self.base.abs_row_sums() - np.abs(self.base.diagonal())
        return off + np.abs(self.diagonal())

    @property
    def frobenius_norm(self):
        # sqrt(||A||_F^2 + 2*sign*eta*tr(A) + n*eta^2), exact for sign*A + eta*I
        base_fro = self.base.frobenius_norm
        trace = float(self.base.diagonal().sum())
        val = base_fro**2 + 2.0 * self.sign * self.eta * trace + self.n * self.eta**2
        return float(np.sqrt(max(val, 0.0)))


def apply(op: LinearOperator, x: np.ndarray) -> np.ndarray:
    """Functional alias for ``op.apply(x)``."""
    return op.apply(x)


def gershgorin_shift(op: LinearOperator) -> ShiftedOperator:
    """Shift A to A + eta*I with eta = max(0, -min_i(a_ii - sum_{j!=i}|a_ij|)).

    Gershgorin discs bound every eigenvalue below by that minimum, so the
    shifted operator is PSD.
    """
    diag = op.diagonal()
    off = op.abs_row_sums() - np.abs(diag)
    eta = max(0.0, -float(np.min(diag - off)))
    return ShiftedOperator(op, eta, sign=1)


# -- Matrix Market ingestion -----------------------------------------------
#
# Accepted variants: "coordinate real symmetric", "coordinate real general",
# "array real general" (square). Everything else in the banner is rejected
# explicitly. Comment lines start with %; coordinate indices are 1-based.

_MM_RELATIVE_SYMMETRY_TOL = 1e-12


def _parse_header(line: str, path) -> tuple[str, str]:
    fields = line.strip().lower().split()
    if len(fields) != 5 or fields[0] != "%%matrixmarket" or fields[1] != "matrix":
        raise MatrixMarketHeaderError(f"{path}: malformed Matrix Market banner: {line!r}")
    fmt, field, symmetry = fields[2], fields[3], fields[4]
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketHeaderError(f"{path}: unsupported format {fmt!r}")
    if field != "real":
        raise MatrixMarketHeaderError(f"{path}: only 'real' matrices are supported, got {field!r}")
    if (fmt, symmetry) not in (
        ("coordinate", "symmetric"),
        ("coordinate", "general"),
        ("array", "general"),
    ):
        raise MatrixMarketHeaderError(f"{path}: unsupported variant '{fmt} real {symmetry}'")
    return fmt, symmetry


def load_matrix_market(path) -> LinearOperator:
    """Read a Matrix Market file into an operator with symmetrized storage.

    Coordinate files become CSR operators, array files dense ones. "general"
    variants must be symmetric to 1e-12 relative (max-entry norm) and are
    stored as (A + A')/2.
    """
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline()
        if not header:
            raise MatrixMarketHeaderError(f"{path}: empty file")
        fmt, symmetry = _parse_header(header, path)

        size_line = None
        for line in fh:
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            size_line = stripped
            break
        if size_line is None:
            raise MatrixMarketError(f"{path}: missing size line")

        tokens = size_line.split()
        body = fh.read().split()

    if fmt == "coordinate":
        if len(tokens) != 3:
            raise MatrixMarketError(f"{path}: coordinate size line needs 3 fields: {size_line!r}")
        try:
            rows, cols, nnz = (int(t) for t in tokens)
        except ValueError as exc:
            raise MatrixMarketError(f"{path}: bad size line {size_line!r}") from exc
        if rows != cols:
            raise NonSquareMatrixError(f"{path}: {rows}x{cols} matrix is not square")
        if len(body) != 3 * nnz:
            raise MatrixMarketError(
                f"{path}: expected {nnz} entries ({3 * nnz} fields), found {len(body)} fields"
            )
        ii = np.empty(nnz, dtype=np.int64)
        jj = np.empty(nnz, dtype=np.int64)
        vv = np.empty(nnz, dtype=float)
        try:
            for k in range(nnz):
                ii[k] = int(body[3 * k])
                jj[k] = int(body[3 * k + 1])
                vv[k] = float(body[3 * k + 2])
        except ValueError as exc:
            raise MatrixMarketError(f"{path}: malformed entry near field {3 * k}") from exc
        if nnz and (ii.min() < 1 or jj.min() < 1 or ii.max() > rows or jj.max() > cols):
            raise IndexOutOfRangeError(f"{path}: entry index outside 1..{rows}")
        ii -= 1
        jj -= 1
        mat = sp.coo_matrix((vv, (ii, jj)), shape=(rows, cols)).tocsr()
        if symmetry == "symmetric":
            lower = sp.tril(mat, k=-1)
            mat = mat + lower.T
        else:
            _require_symmetric_sparse(mat, path)
            mat = (mat + mat.T) * 0.5
        return CsrOperator(mat)

    # array real general, column-major dense payload
    if len(tokens) != 2:
        raise MatrixMarketError(f"{path}: array size line needs 2 fields: {size_line!r}")
    try:
        rows, cols = (int(t) for t in tokens)
    except ValueError as exc:
        raise MatrixMarketError(f"{path}: bad size line {size_line!r}") from exc
    if rows != cols:
        raise NonSquareMatrixError(f"{path}: {rows}x{cols} matrix is not square")
    if len(body) != rows * cols:
        raise MatrixMarketError(f"{path}: expected {rows * cols} values, found {len(body)}")
    try:
        values = np.array([float(t) for t in body], dtype=float)
    except ValueError as exc:
        raise MatrixMarketError(f"{path}: non-numeric array value") from exc
    dense = values.reshape((cols, rows)).T  # file stores columns contiguously
    scale = float(np.abs(dense).max()) if dense.size else 0.0
    asym = float(np.abs(dense - dense.T).max())
    if scale > 0.0 and asym > _MM_RELATIVE_SYMMETRY_TOL * scale:
        raise AsymmetricMatrixError(
            f"{path}: 'general' matrix is asymmetric (max |a_ij - a_ji| = {asym:.3e})"
        )
    return DenseOperator((dense + dense.T) * 0.5)


def _require_symmetric_sparse(mat: sp.csr_matrix, path) -> None:
    diff = abs(mat - mat.T)
    asym = float(diff.max()) if diff.nnz else 0.0
    scale = float(abs(mat).max()) if mat.nnz else 0.0
    if scale > 0.0 and asym > _MM_RELATIVE_SYMMETRY_TOL * scale:
        raise AsymmetricMatrixError(
            f"{path}: 'general' matrix is asymmetric (max |a_ij - a_ji| = {asym:.3e})"
        )


def save_matrix_market(op: LinearOperator, path) -> None:
    """Write an operator as 'coordinate real symmetric' (lower triangle)."""
    dense = op.to_dense()
    n = dense.shape[0]
    rows, cols = np.tril_indices(n)
    mask = dense[rows, cols] != 0.0
    rows, cols = rows[mask], cols[mask]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix coordinate real symmetric\n")
        fh.write(f"{n} {n} {len(rows)}\n")
        for i, j in zip(rows, cols):
            fh.write(f"{i + 1} {j + 1} {dense[i, j]:.17g}\n")
