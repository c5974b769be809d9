"""Banded storage, unpivoted banded LU and directional Kronecker solves.

Coefficient tensors are numpy arrays of shape ``(n, m[, l])`` indexed by
``[ix, iy, iz]``.  Flattening is x-fastest (Fortran order), so the dense
matrix of ``A_x (x) A_y (x) A_z`` acting on ``t.ravel(order="F")`` is
``np.kron(A_z, np.kron(A_y, A_x))``; see :func:`dense_kron`.
"""
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse
from scipy.linalg.lapack import dgbtrs

PIVOT_RTOL = 1e-14
ORACLE_MAX_SIZE = 4096


class SingularMatrixError(ArithmeticError):
    """A pivot of the unpivoted band LU fell below the singularity guard."""


class BandedMatrix:
    """Square matrix with half-bandwidth p, stored as ``data[i, p + j - i] = A[i, j]``."""

    def __init__(self, data, p):
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[1] != 2 * p + 1:
            raise ValueError(f"band storage must have shape (n, {2 * p + 1}), got {data.shape}")
        self.data = data
        self.p = int(p)

    @classmethod
    def zeros(cls, n, p):
        return cls(np.zeros((n, 2 * p + 1)), p)

    @classmethod
    def identity(cls, n, p=0, scale=1.0):
        band = cls.zeros(n, p)
        band.data[:, p] = scale
        return band

    @classmethod
    def from_dense(cls, A, p):
        A = np.asarray(A, dtype=float)
        n = A.shape[0]
        band = cls.zeros(n, p)
        for d in range(-p, p + 1):
            lo, hi = max(0, -d), n - max(0, d)
            band.data[lo:hi, p + d] = A[np.arange(lo, hi), np.arange(lo, hi) + d]
        return band

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def shape(self):
        return (self.n, self.n)

    def __getitem__(self, ij):
        i, j = ij
        d = j - i
        if abs(d) > self.p:
            return 0.0
        return self.data[i, self.p + d]

    def add_to(self, i, j, value):
        self.data[i, self.p + j - i] += value

    def to_dense(self):
        n, p = self.n, self.p
        A = np.zeros((n, n))
        for d in range(-p, p + 1):
            lo, hi = max(0, -d), n - max(0, d)
            A[np.arange(lo, hi), np.arange(lo, hi) + d] = self.data[lo:hi, p + d]
        return A

    def transpose(self):
        n, p = self.n, self.p
        out = BandedMatrix.zeros(n, p)
        for d in range(-p, p + 1):
            lo, hi = max(0, -d), n - max(0, d)
            # A^T[j, i] = A[i, j] with j = i + d
            out.data[lo + d:hi + d, p - d] = self.data[lo:hi, p + d]
        return out

    @property
    def T(self):
        return self.transpose()

    def combine(self, other, a=1.0, b=1.0):
        """Return a*self + b*other (bands widened to the larger of the two)."""
        p = max(self.p, other.p)
        out = BandedMatrix.zeros(self.n, p)
        out.data[:, p - self.p:p + self.p + 1] += a * self.data
        out.data[:, p - other.p:p + other.p + 1] += b * other.data
        return out

    def scaled(self, c):
        return BandedMatrix(c * self.data, self.p)

    def to_sparse(self):
        """CSR copy of the band, cached; rebuilt if the band data object is replaced."""
        cached = getattr(self, "_csr", None)
        if cached is None or cached[0] is not self.data:
            n, p = self.n, self.p
            offsets = np.arange(-p, p + 1)
            # dia_matrix stores column j of diagonal d at data[d, j]
            dia = np.zeros((2 * p + 1, n))
            for k, d in enumerate(offsets):
                lo, hi = max(0, -d), n - max(0, d)
                dia[k, lo + d:hi + d] = self.data[lo:hi, p + d]
            csr = scipy.sparse.dia_matrix((dia, offsets), shape=(n, n)).tocsr()
            self._csr = (self.data, csr)
        return self._csr[1]

    def matmul_axis(self, x, axis=0):
        """Apply the matrix along one axis of an array (O(p) work per entry)."""
        if x.shape[axis] != self.n:
            raise ValueError(f"axis {axis} has length {x.shape[axis]}, matrix is {self.n}x{self.n}")
        front, back = _axis_perms(x.ndim, axis)
        moved = x.transpose(front)
        out = self.to_sparse() @ moved.reshape(self.n, -1)
        return out.reshape(moved.shape).transpose(back)

    def __matmul__(self, x):
        return self.matmul_axis(np.asarray(x, dtype=float), 0)

    def max_abs(self):
        return float(np.abs(self.data).max(initial=0.0))

    def __repr__(self):
        return f"BandedMatrix(n={self.n}, p={self.p})"


@dataclass
class FactoredBanded:
    """Unpivoted LU factors in LAPACK general-band layout (kl = ku = p)."""
    lu: np.ndarray
    p: int
    source: BandedMatrix

    @property
    def n(self):
        return self.lu.shape[1]

    def unpack(self):
        """Dense unit-lower L and upper U."""
        n, p = self.n, self.p
        L, U = np.eye(n), np.zeros((n, n))
        for j in range(n):
            for i in range(max(0, j - p), min(n, j + p + 1)):
                v = self.lu[2 * p + i - j, j]
                if i > j:
                    L[i, j] = v
                else:
                    U[i, j] = v
        return L, U


def factorize_banded(A):
    """LU-factorize a banded matrix without pivoting, keeping the band.

    Raises SingularMatrixError when a pivot drops below 1e-14 times the
    largest band entry.  Cost is O(n p^2).
    """
    n, p = A.n, A.p
    d = 2 * p  # row of the diagonal in LAPACK layout
    lu = np.zeros((3 * p + 1, n))
    for k in range(-p, p + 1):
        lo, hi = max(0, -k), n - max(0, k)
        lu[d - k, lo + k:hi + k] = A.data[lo:hi, p + k]
    guard = PIVOT_RTOL * A.max_abs()
    for k in range(n):
        piv = lu[d, k]
        if not abs(piv) > guard:
            raise SingularMatrixError(f"pivot {piv:.3e} at row {k} below guard {guard:.3e}")
        last = min(n, k + p + 1)
        if last == k + 1:
            continue
        # multipliers of column k, then rank-1 update of the trailing band block
        lu[d + 1:d + last - k, k] /= piv
        mult = lu[d + 1:d + last - k, k]
        for j in range(k + 1, last):
            rows = slice(d + k + 1 - j, d + last - j)
            lu[rows, j] -= mult * lu[d + k - j, j]
    return FactoredBanded(lu=lu, p=p, source=A)


def solve_multi_rhs(F, rhs, overwrite=False):
    """Solve A X = RHS for an n x k right-hand side with a factored band matrix."""
    rhs = np.asarray(rhs, dtype=float)
    squeeze = rhs.ndim == 1
    B = rhs[:, None] if squeeze else rhs
    if B.shape[0] != F.n:
        raise ValueError(f"right-hand side has {B.shape[0]} rows, matrix is {F.n}x{F.n}")
    if B.shape[1] == 0:
        return rhs.copy()
    B = np.asfortranarray(B) if overwrite else np.array(B, order="F")
    ipiv = np.arange(F.n, dtype=np.int32)
    x, info = dgbtrs(F.lu, F.p, F.p, B, ipiv, overwrite_b=1)
    if info != 0:
        raise ValueError(f"dgbtrs failed with info={info}")
    return x[:, 0] if squeeze else x


@lru_cache(maxsize=None)
def _axis_perms(ndim, axis):
    # transpose bringing `axis` to the front, and its inverse
    front = (axis,) + tuple(i for i in range(ndim) if i != axis)
    return front, tuple(int(i) for i in np.argsort(front))


def _solve_axis(F, t, axis, owned=False):
    # the axis is brought to the front in Fortran order; `t` is only written to when owned
    front, back = _axis_perms(t.ndim, axis)
    buf = np.asfortranarray(t.transpose(front))
    if not owned and np.shares_memory(buf, t):
        buf = buf.copy(order="F")
    flat = buf.reshape(buf.shape[0], -1, order="F")
    out = solve_multi_rhs(F, flat, overwrite=True)
    return out.reshape(buf.shape, order="F").transpose(back)


class KroneckerOperator:
    """Tensor product A_x (x) A_y [(x) A_z] of banded factors with cached LU."""

    def __init__(self, factors, factorize=True):
        self.factors = list(factors)
        if not 1 <= len(self.factors) <= 3:
            raise ValueError("between one and three directional factors are supported")
        self._lu = [factorize_banded(A) for A in self.factors] if factorize else None

    @property
    def dims(self):
        return tuple(A.n for A in self.factors)

    @property
    def size(self):
        return int(np.prod(self.dims))

    @property
    def lu(self):
        if self._lu is None:
            self._lu = [factorize_banded(A) for A in self.factors]
        return self._lu

    def apply(self, x):
        return kron_apply(self.factors, x)

    def solve(self, b):
        return kron_solve(self, b)

    def to_dense(self):
        return dense_kron([A.to_dense() for A in self.factors])


def _check_dims(dims, t):
    if tuple(t.shape) != tuple(dims):
        raise ValueError(f"tensor shape {t.shape} does not match operator dims {tuple(dims)}")


def kron_solve(op, b):
    """Solve (A_x (x) A_y [(x) A_z]) x = b by one multi-RHS band solve per direction."""
    b = np.asarray(b, dtype=float)
    _check_dims(op.dims, b)
    x = b
    for axis, F in enumerate(op.lu):
        x = _solve_axis(F, x, axis, owned=axis > 0)
    return x


def kron_apply(factors, x):
    """Apply A_x (x) A_y [(x) A_z] through directional banded contractions."""
    x = np.asarray(x, dtype=float)
    _check_dims([A.n for A in factors], x)
    for axis, A in enumerate(factors):
        x = A.matmul_axis(x, axis)
    return x


def dense_kron(mats):
    """Dense matrix of mats[0] (x) mats[1] (x) ... acting on x-fastest vectors."""
    out = np.ones((1, 1))
    for A in mats:
        out = np.kron(A, out)
    return out


def dense_oracle_solve(A, b):
    """Dense LU reference solve for cross-checking.

    `A` is either a KroneckerOperator (b is then a tensor of matching shape)
    or a dense square matrix.  Limited to 4096 unknowns.
    """
    import scipy.linalg

    if isinstance(A, KroneckerOperator):
        b = np.asarray(b, dtype=float)
        _check_dims(A.dims, b)
        if A.size > ORACLE_MAX_SIZE:
            raise ValueError(f"oracle limited to {ORACLE_MAX_SIZE} unknowns, got {A.size}")
        x = dense_oracle_solve(A.to_dense(), b.ravel(order="F"))
        return x.reshape(b.shape, order="F")
    A = np.asarray(A, dtype=float)
    if A.shape[0] > ORACLE_MAX_SIZE:
        raise ValueError(f"oracle limited to {ORACLE_MAX_SIZE} unknowns, got {A.shape[0]}")
    with warnings.catch_warnings():
        # an exactly zero pivot is reported through SingularMatrixError below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    diag = np.abs(np.diag(lu))
    if diag.min() <= PIVOT_RTOL * max(np.abs(A).max(), 1e-300):
        raise SingularMatrixError("dense matrix is numerically singular")
    return scipy.linalg.lu_solve((lu, piv), b)
