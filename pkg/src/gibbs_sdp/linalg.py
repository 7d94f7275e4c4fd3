"""Dense and sparse Hermitian linear algebra.

Dense Hermitian matrices are plain ``numpy`` arrays (real or complex).
Sparse ones are :class:`SparseHermitian`, a thin validated wrapper around a
CSR matrix. Every routine here is a pure function of its inputs.
"""

import warnings

import numpy as np
import scipy.sparse as sp

from .exceptions import DimensionError, NumericalError

DENSE_LIMIT = 1024
HERMITIAN_ATOL = 1e-12
SYMMETRIZE_WARN = 1e-9


def as_hermitian(a, *, warn_tol=SYMMETRIZE_WARN):
    """Return ``(a + a^H) / 2`` as an ndarray, warning on a large correction."""
    if isinstance(a, SparseHermitian):
        return a.toarray()
    if sp.issparse(a):
        a = a.toarray()
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericalError("matrix has non-finite entries")
    h = (a + a.conj().T) / 2
    err = np.max(np.abs(a - h)) if a.size else 0.0
    if err > warn_tol:
        warnings.warn(f"symmetrized a non-Hermitian input (max correction {err:.3g})",
                      RuntimeWarning, stacklevel=2)
    if np.iscomplexobj(h) and not np.any(h.imag):
        h = h.real.copy()
    return h


def _dense(a):
    if isinstance(a, SparseHermitian):
        return a.toarray()
    if isinstance(a, DensityMatrix):
        return a.matrix
    if sp.issparse(a):
        return a.toarray()
    return np.asarray(a)


def _check_limit(n, limit):
    if n > limit:
        raise DimensionError(f"dimension {n} exceeds the dense limit {limit}")


def _is_diagonal(a):
    off = a.copy()
    np.fill_diagonal(off, 0)
    return not off.any()


def _eigh(a):
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition did not converge: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise NumericalError("eigendecomposition returned non-finite values")
    return w, v


def _eigvalsh(a):
    a = _dense(a)
    if a.shape[0] == 0:
        raise DimensionError("empty matrix")
    if _is_diagonal(a):
        return np.sort(np.real(np.diag(a)))
    try:
        w = np.linalg.eigvalsh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue solver did not converge: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise NumericalError("eigenvalue solver returned non-finite values")
    return w


class SparseHermitian:
    """Row-compressed Hermitian matrix with the sparse-entry access pattern.

    Column indices are strictly increasing within each row, so the ``l``-th
    stored entry of row ``k`` is the ``l``-th nonzero in column order.
    """

    def __init__(self, matrix, *, check=True):
        csr = sp.csr_matrix(matrix)
        if csr.shape[0] != csr.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {csr.shape}")
        csr.eliminate_zeros()
        csr.sum_duplicates()
        csr.sort_indices()
        self._csr = csr
        if check:
            self._check()

    def _check(self):
        csr = self._csr
        if csr.nnz and not np.all(np.isfinite(csr.data)):
            raise NumericalError("matrix has non-finite entries")
        diff = csr - csr.conj().T
        if diff.nnz and np.max(np.abs(diff.data)) > HERMITIAN_ATOL:
            raise ValueError("matrix is not Hermitian (structural or value mismatch)")

    @classmethod
    def from_dense(cls, a):
        return cls(as_hermitian(a))

    @classmethod
    def from_triplets(cls, n, triplets):
        """Build from upper-triangle ``(row, col, re, im)`` entries, 0-based."""
        rows, cols, vals = [], [], []
        for row, col, re, im in triplets:
            row, col = int(row), int(col)
            if not (0 <= row < n and 0 <= col < n):
                raise DimensionError(f"entry ({row}, {col}) outside a {n}x{n} matrix")
            if row > col:
                raise ValueError(f"entry ({row}, {col}) is below the diagonal")
            v = complex(re, im)
            if row == col:
                if abs(v.imag) > SYMMETRIZE_WARN:
                    warnings.warn(f"dropping imaginary part {v.imag:.3g} of a diagonal entry",
                                  RuntimeWarning, stacklevel=2)
                v = complex(v.real, 0.0)
                rows.append(row); cols.append(col); vals.append(v)
            else:
                rows += [row, col]; cols += [col, row]; vals += [v, v.conjugate()]
        vals = np.array(vals, dtype=complex)
        if vals.size and not np.any(vals.imag):
            vals = vals.real
        m = sp.coo_matrix((vals, (rows, cols)), shape=(n, n))
        return cls(m)

    @classmethod
    def identity(cls, n):
        return cls(sp.identity(n, format="csr"), check=False)

    @classmethod
    def zeros(cls, n):
        return cls(sp.csr_matrix((n, n)), check=False)

    @property
    def csr(self):
        return self._csr

    @property
    def n(self):
        return self._csr.shape[0]

    @property
    def shape(self):
        return self._csr.shape

    @property
    def row_offsets(self):
        return self._csr.indptr

    @property
    def col_indices(self):
        return self._csr.indices

    @property
    def values(self):
        return self._csr.data

    @property
    def nnz(self):
        return self._csr.nnz

    @property
    def s(self):
        """Maximum number of stored nonzeros in any row."""
        return int(np.max(np.diff(self._csr.indptr))) if self.n else 0

    def row_entry(self, k, l):
        """The ``l``-th nonzero of row ``k`` (both 0-based) or ``None``."""
        start, stop = self._csr.indptr[k], self._csr.indptr[k + 1]
        if l >= stop - start:
            return None
        return int(self._csr.indices[start + l]), self._csr.data[start + l]

    def is_diagonal(self):
        coo = self._csr.tocoo()
        return bool(np.all(coo.row == coo.col))

    def diagonal(self):
        return np.real(self._csr.diagonal())

    def upper_triplets(self):
        coo = sp.triu(self._csr).tocoo()
        order = np.lexsort((coo.col, coo.row))
        out = []
        for idx in order:
            v = complex(coo.data[idx])
            out.append([int(coo.row[idx]), int(coo.col[idx]), v.real, v.imag])
        return out

    def toarray(self):
        return self._csr.toarray()

    def __array__(self, dtype=None, copy=None):
        a = self.toarray()
        return a if dtype is None else a.astype(dtype)

    def __repr__(self):
        return f"SparseHermitian(n={self.n}, nnz={self.nnz}, s={self.s})"


class DensityMatrix:
    """A trace-one positive semidefinite matrix with cached spectral data."""

    TRACE_TOL = 1e-10
    PSD_TOL = 1e-10

    def __init__(self, matrix, *, eigenvalues=None, check=True):
        matrix = np.asarray(matrix)
        self.matrix = matrix
        self.trace = float(np.real(np.trace(matrix)))
        if eigenvalues is None:
            eigenvalues = _eigvalsh(matrix)
        self.min_eigenvalue = float(np.min(eigenvalues))
        if check:
            if abs(self.trace - 1.0) > self.TRACE_TOL:
                raise ValueError(f"density matrix has trace {self.trace!r}")
            if self.min_eigenvalue < -self.PSD_TOL:
                raise ValueError(f"density matrix has eigenvalue {self.min_eigenvalue!r}")

    @classmethod
    def maximally_mixed(cls, n):
        return cls(np.eye(n) / n, eigenvalues=np.full(n, 1.0 / n))

    @classmethod
    def from_diagonal(cls, p):
        p = np.asarray(p, dtype=float)
        return cls(np.diag(p), eigenvalues=p)

    @property
    def n(self):
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __repr__(self):
        return f"DensityMatrix(n={self.n}, min_eigenvalue={self.min_eigenvalue:.3g})"


def hermitian_exp(h, *, limit=DENSE_LIMIT):
    """Matrix exponential of a Hermitian matrix through its eigendecomposition."""
    h = as_hermitian(h)
    _check_limit(h.shape[0], limit)
    if _is_diagonal(h):
        return np.diag(np.exp(np.real(np.diag(h))))
    w, v = _eigh(h)
    return (v * np.exp(w)) @ v.conj().T


def gibbs_state(h, *, limit=DENSE_LIMIT):
    """``e^H / tr(e^H)``, exact up to rounding; the spectrum is shifted first."""
    h = as_hermitian(h)
    _check_limit(h.shape[0], limit)
    if _is_diagonal(h):
        p = gibbs_distribution(np.real(np.diag(h)))
        return DensityMatrix(np.diag(p), eigenvalues=p)
    w, v = _eigh(h)
    p = gibbs_distribution(w)
    rho = (v * p) @ v.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho, eigenvalues=p)


def gibbs_distribution(energies):
    """Normalized ``exp(x_i)`` over a real vector, max-shifted."""
    x = np.asarray(energies, dtype=float)
    w = np.exp(x - np.max(x))
    return w / w.sum()


def min_eigenvalue(h):
    return float(_eigvalsh(h)[0])


def max_eigenvalue(h):
    return float(_eigvalsh(h)[-1])


def operator_norm(a):
    w = _eigvalsh(a)
    return float(max(abs(w[0]), abs(w[-1])))


def trace_inner(a, rho):
    """``tr(A rho)`` as a real number."""
    r = _dense(rho)
    if isinstance(a, SparseHermitian):
        if a.shape != r.shape:
            raise DimensionError(f"shape mismatch {a.shape} vs {r.shape}")
        val = a.csr.multiply(r.T).sum()
    else:
        a = _dense(a)
        if a.shape != r.shape:
            raise DimensionError(f"shape mismatch {a.shape} vs {r.shape}")
        val = np.sum(a * r.T)
    val = complex(val)
    scale = max(1.0, abs(val.real))
    if abs(val.imag) > 1e-10 * scale:
        raise NumericalError(f"tr(A rho) has imaginary part {val.imag:.3g}")
    return val.real


def trace_distance(rho, sigma):
    """``||rho - sigma||_1``, the sum of absolute eigenvalues of the difference."""
    a, b = _dense(rho), _dense(sigma)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.sum(np.abs(_eigvalsh(a - b))))
