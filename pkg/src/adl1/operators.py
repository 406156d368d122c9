"""Matrix-free sensing operators.

Every operator maps C^n -> C^m through ``apply`` and C^m -> C^n through
``adjoint``. Solvers never form matrices; they only call these two methods.
Operators with orthonormal rows (A A* = I) advertise it through the
``orthonormal_rows`` flag, which the dual solver requires for its exact
update steps.

All vectors are 1-D complex128 arrays. Real data is embedded with zero
imaginary parts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import DimensionMismatchError

__all__ = [
    "SensingOperator",
    "DenseOperator",
    "PartialWalshHadamardOperator",
    "PartialDCTOperator",
    "AugmentedOperator",
    "SpectralEstimate",
    "as_complex_vector",
    "estimate_lambda_max",
    "fwht",
    "make_partial_wht",
    "make_partial_dct",
    "orthonormal_gaussian_operator",
]


def as_complex_vector(x, length=None):
    """Validate and convert ``x`` to a 1-D complex128 vector.

    Parameters
    ----------
    x : array_like
        Input data, real or complex.
    length : int, optional
        Required number of entries.

    Returns
    -------
    numpy.ndarray
        1-D complex128 array.

    Raises
    ------
    DimensionMismatchError
        If ``x`` is not 1-D or has the wrong length.
    ValueError
        If any entry is nonfinite.
    """
    v = np.asarray(x)
    if v.ndim != 1:
        raise DimensionMismatchError(f"expected a 1-D vector, got shape {v.shape}")
    if length is not None and v.shape[0] != length:
        raise DimensionMismatchError(f"expected length {length}, got {v.shape[0]}")
    if v.dtype != np.complex128:
        v = v.astype(np.complex128)
    if not np.all(np.isfinite(v.real)) or not np.all(np.isfinite(v.imag)):
        raise ValueError("vector contains nonfinite entries")
    return v


def _coerce(x, n, what):
    x = np.asarray(x)
    if x.shape != (n,):
        raise DimensionMismatchError(f"{what}: expected shape ({n},), got {x.shape}")
    if x.dtype != np.complex128:
        x = x.astype(np.complex128)
    return x


class SensingOperator:
    """Base class: a linear map C^n -> C^m with an explicit adjoint.

    Subclasses implement ``_apply`` and ``_adjoint`` on validated inputs.
    Instances are immutable after construction and safe to share across
    threads.
    """

    kind = "abstract"

    def __init__(self, m, n, orthonormal_rows):
        if m <= 0 or n <= 0:
            raise ValueError(f"operator dimensions must be positive, got ({m}, {n})")
        self.m = int(m)
        self.n = int(n)
        self.orthonormal_rows = bool(orthonormal_rows)
        self._lambda_max_cache = None

    @property
    def shape(self):
        return (self.m, self.n)

    def apply(self, x):
        """Return A x for a length-n vector x."""
        return self._apply(_coerce(x, self.n, f"{self.kind}.apply"))

    def adjoint(self, y):
        """Return A* y for a length-m vector y."""
        return self._adjoint(_coerce(y, self.m, f"{self.kind}.adjoint"))

    def lambda_max(self, tol=1e-6, max_iter=200):
        """Largest eigenvalue of A*A, memoized.

        Returns 1.0 immediately for orthonormal-rows operators; otherwise
        runs a deterministic power iteration once and caches the result.
        """
        if self.orthonormal_rows:
            return 1.0
        if self._lambda_max_cache is None:
            est = estimate_lambda_max(self, tol=tol, max_iter=max_iter, seed=0)
            self._lambda_max_cache = est.lambda_max
        return self._lambda_max_cache

    def _apply(self, x):
        raise NotImplementedError

    def _adjoint(self, y):
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.m}x{self.n} orthonormal_rows={self.orthonormal_rows}>"


class DenseOperator(SensingOperator):
    """Operator backed by an explicit complex matrix."""

    kind = "dense"

    def __init__(self, matrix, orthonormal_rows=False):
        matrix = np.asarray(matrix)
        if matrix.ndim != 2:
            raise DimensionMismatchError(f"dense operator needs a 2-D matrix, got shape {matrix.shape}")
        if matrix.dtype != np.complex128:
            matrix = matrix.astype(np.complex128)
        if not np.all(np.isfinite(matrix.real)) or not np.all(np.isfinite(matrix.imag)):
            raise ValueError("operator matrix contains nonfinite entries")
        super().__init__(matrix.shape[0], matrix.shape[1], orthonormal_rows)
        self.matrix = matrix
        self._matrix_h = matrix.conj().T.copy()
        if orthonormal_rows:
            # One randomized probe; catches mislabeled operators at construction.
            rng = np.random.default_rng(0)
            y = rng.standard_normal(self.m) + 1j * rng.standard_normal(self.m)
            err = np.linalg.norm(matrix @ (self._matrix_h @ y) - y)
            if err > 1e-8 * np.linalg.norm(y):
                raise ValueError("orthonormal_rows=True but A A* differs from the identity")

    def _apply(self, x):
        return self.matrix @ x

    def _adjoint(self, y):
        return self._matrix_h @ y


def fwht(x):
    """In-order (natural/Hadamard) Walsh-Hadamard transform, unnormalized.

    ``x`` must have power-of-two length. Runs the usual butterfly in
    O(n log n); equals the Sylvester-construction Hadamard matrix times x.
    """
    n = x.shape[0]
    a = np.array(x, copy=True)
    h = 1
    while h < n:
        a = a.reshape(-1, 2 * h)
        top = a[:, :h].copy()
        a[:, :h] += a[:, h:]
        a[:, h:] = top - a[:, h:]
        a = a.reshape(-1)
        h *= 2
    return a


def _check_partial_args(n, rows, signs, need_pow2):
    if need_pow2 and (n <= 0 or n & (n - 1) != 0):
        raise ValueError(f"transform size must be a power of two, got {n}")
    rows = np.asarray(rows, dtype=np.intp)
    if rows.ndim != 1 or rows.size == 0:
        raise ValueError("rows must be a nonempty 1-D index list")
    if rows.size > n or np.unique(rows).size != rows.size:
        raise ValueError("row indices must be distinct")
    if rows.min() < 0 or rows.max() >= n:
        raise ValueError(f"row indices must lie in [0, {n})")
    signs = np.asarray(signs, dtype=np.float64)
    if signs.shape != (n,) or not np.all(np.abs(signs) == 1.0):
        raise ValueError("signs must be a length-n vector of +/-1")
    return rows, signs


class PartialWalshHadamardOperator(SensingOperator):
    """Randomized partial Walsh-Hadamard sensing operator.

    A = (1/sqrt(n)) * R H D where D is a +/-1 diagonal, H the natural-ordered
    Hadamard matrix, and R selects ``rows``. Rows are orthonormal by
    construction. ``n`` must be a power of two.
    """

    kind = "partial-walsh-hadamard"

    def __init__(self, n, rows, signs):
        rows, signs = _check_partial_args(n, rows, signs, need_pow2=True)
        super().__init__(rows.size, n, orthonormal_rows=True)
        self.rows = rows
        self.signs = signs
        self._scale = 1.0 / np.sqrt(n)

    def _apply(self, x):
        return fwht(self.signs * x)[self.rows] * self._scale

    def _adjoint(self, y):
        full = np.zeros(self.n, dtype=np.complex128)
        full[self.rows] = y
        return self.signs * fwht(full) * self._scale


class PartialDCTOperator(SensingOperator):
    """Randomized partial DCT sensing operator.

    A = R C D with C the orthonormal DCT-II (any n, no power-of-two
    restriction), D a +/-1 diagonal, R a row selector. Rows are orthonormal.
    """

    kind = "partial-dct"

    def __init__(self, n, rows, signs):
        rows, signs = _check_partial_args(n, rows, signs, need_pow2=False)
        super().__init__(rows.size, n, orthonormal_rows=True)
        self.rows = rows
        self.signs = signs

    def _apply(self, x):
        return scipy.fft.dct(self.signs * x, type=2, norm="ortho")[self.rows]

    def _adjoint(self, y):
        full = np.zeros(self.n, dtype=np.complex128)
        full[self.rows] = y
        return self.signs * scipy.fft.idct(full, type=2, norm="ortho")


class AugmentedOperator(SensingOperator):
    """[A, nu I] / sqrt(1 + nu^2): the base operator extended by a scaled identity.

    Maps C^(n+m) -> C^m. Inherits orthonormal rows from the base operator,
    since A_hat A_hat* = (A A* + nu^2 I) / (1 + nu^2).
    """

    kind = "augmented"

    def __init__(self, base, nu):
        if not isinstance(base, SensingOperator):
            raise TypeError("base must be a SensingOperator")
        if not (nu > 0):
            raise ValueError(f"nu must be positive, got {nu}")
        super().__init__(base.m, base.n + base.m, orthonormal_rows=base.orthonormal_rows)
        self.base = base
        self.nu = float(nu)
        self._scale = 1.0 / np.sqrt(1.0 + nu * nu)

    def _apply(self, x):
        head = x[: self.base.n]
        tail = x[self.base.n :]
        return (self.base.apply(head) + self.nu * tail) * self._scale

    def _adjoint(self, y):
        return np.concatenate([self.base.adjoint(y), self.nu * y]) * self._scale


def build_augmented(op, nu):
    """Functional constructor for [A, nu I] / sqrt(1 + nu^2)."""
    return AugmentedOperator(op, nu)


@dataclass(frozen=True)
class SpectralEstimate:
    """Result of a power-iteration estimate of lambda_max(A*A)."""

    lambda_max: float
    tol: float
    iterations: int


def estimate_lambda_max(op, tol=1e-6, max_iter=200, seed=None):
    """Estimate the largest eigenvalue of A*A by power iteration.

    Parameters
    ----------
    op : SensingOperator
    tol : float
        Stop when the Rayleigh quotient changes by at most ``tol`` relative.
    max_iter : int
        Iteration cap; the estimate so far is returned when it is hit.
    seed : int, optional
        Seed for the random start vector. Defaults to 0 for reproducibility.

    Returns
    -------
    SpectralEstimate
    """
    rng = np.random.default_rng(0 if seed is None else seed)
    v = rng.standard_normal(op.n) + 1j * rng.standard_normal(op.n)
    v /= np.linalg.norm(v)
    lam = 0.0
    k = 0
    for k in range(1, max_iter + 1):
        w = op.adjoint(op.apply(v))
        lam_new = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # v is in the null space of A; for a nonzero operator this has
            # probability zero from a random start.
            lam = 0.0
            break
        v = w / nw
        if abs(lam_new - lam) <= tol * max(abs(lam_new), np.finfo(float).tiny):
            lam = lam_new
            break
        lam = lam_new
    return SpectralEstimate(lambda_max=lam, tol=tol, iterations=k)


def make_partial_wht(n, m, rng):
    """Draw a random partial Walsh-Hadamard operator: m distinct rows, +/-1 column signs."""
    signs = rng.choice([-1.0, 1.0], size=n)
    rows = rng.choice(n, size=m, replace=False)
    return PartialWalshHadamardOperator(n, rows, signs)


def make_partial_dct(n, m, rng):
    """Draw a random partial DCT operator: m distinct rows, +/-1 column signs."""
    signs = rng.choice([-1.0, 1.0], size=n)
    rows = rng.choice(n, size=m, replace=False)
    return PartialDCTOperator(n, rows, signs)


def orthonormal_gaussian_operator(m, n, rng):
    """Dense operator with orthonormalized Gaussian rows (A A* = I).

    Used when n is not a power of two and the dual solver still needs exact
    steps. Rows span the row space of an m x n standard Gaussian draw.
    """
    if m > n:
        raise ValueError(f"need m <= n to orthonormalize rows, got m={m}, n={n}")
    g = rng.standard_normal((m, n))
    q, _ = np.linalg.qr(g.T)  # q: n x m, orthonormal columns
    return DenseOperator(q.T, orthonormal_rows=True)
