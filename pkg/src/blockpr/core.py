"""
Index arithmetic, banded Hermitian storage and Fourier primitives.

Conventions used throughout the package
---------------------------------------
Indices are 1-based in docstrings and 0-based in code. All index arithmetic on
signals is circular modulo ``d``.

The DFT is unnormalized in the forward direction and carries ``1/d`` in the
inverse, so it coincides with :func:`numpy.fft.fft` / :func:`numpy.fft.ifft`.

A banded matrix with half-bandwidth ``delta`` has ``K = 2*delta - 1`` circulant
diagonals. Its canonical vectorization has length ``D = d*K`` and is the
row-major flattening of the ``(d, K)`` *diagonal table* ``L`` with::

    L[z, r] = X[z + r, z]                     for 0 <= r < delta
    L[z, r] = X[z + 1 + r - K, z + 1]         for delta <= r < K

so that ``L[z, r] = conj(x[z]) x[z + r]`` when ``X = T_delta(x x^*)``, and
``q - 1 = K*(xi - 1) + (r - 1)`` in 1-based notation. Upper-band entries are
``X[z, z + s] = conj(L[z, s])``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import sparse

__all__ = [
    "ZERO_TOL",
    "as_signal",
    "circular_shift",
    "modulate",
    "dft",
    "idft",
    "circular_convolution",
    "VecIndex",
    "vec_index",
    "vec_position",
    "banded_projection",
    "BandedHermitian",
    "DiagonalSet",
    "extract_diagonals",
    "assemble_diagonals",
    "mirror_diagonal_index",
]

#: Relative tolerance below which a value is treated as an exact zero.
ZERO_TOL = 1e-12


def as_signal(x, d: int | None = None) -> np.ndarray:
    """Validate and return ``x`` as a finite complex128 vector."""
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 1:
        raise ValueError(f"signal must be one-dimensional, got shape {x.shape}")
    if d is not None and x.shape[0] != d:
        raise ValueError(f"signal has length {x.shape[0]}, expected {d}")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains non-finite entries")
    return x


def circular_shift(u, shift: int) -> np.ndarray:
    """Return ``S_shift u`` with ``(S_l u)_j = u_{l + j}`` (circular)."""
    u = np.asarray(u)
    return np.roll(u, -int(shift))


def modulate(u, k: int) -> np.ndarray:
    """Multiply ``u`` entrywise by the phase ramp ``exp(2 pi i (k-1)(j-1)/d)``."""
    u = np.asarray(u, dtype=np.complex128)
    d = u.shape[0]
    j = np.arange(d)
    return u * np.exp(2j * np.pi * ((k - 1) * j % d) / d)


def dft(u) -> np.ndarray:
    """Unnormalized forward DFT, ``sum_n u_n exp(-2 pi i (n-1)(k-1)/d)``."""
    return np.fft.fft(np.asarray(u, dtype=np.complex128))


def idft(u) -> np.ndarray:
    """Inverse of :func:`dft` (carries the ``1/d`` factor)."""
    return np.fft.ifft(np.asarray(u, dtype=np.complex128))


def circular_convolution(u, v) -> np.ndarray:
    """Direct O(d^2) circular convolution ``(u * v)_l = sum_k u_{l-k+1} v_k``."""
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    d = u.shape[0]
    idx = (np.arange(d)[:, None] - np.arange(d)[None, :]) % d
    return (u[idx] * v[None, :]).sum(axis=1)


class VecIndex(NamedTuple):
    """1-based decomposition ``q = K*(xi - 1) + r`` of a vectorization index."""

    q: int
    xi: int
    r: int


def vec_index(q: int, d: int, delta: int) -> VecIndex:
    """Split the 1-based vectorization index ``q`` into ``(xi, r)``."""
    K = 2 * delta - 1
    D = d * K
    if not 1 <= q <= D:
        raise IndexError(f"q={q} outside [1, {D}]")
    xi, r = divmod(q - 1, K)
    return VecIndex(q, xi + 1, r + 1)


def vec_position(xi: int, r: int, delta: int) -> int:
    """Inverse of :func:`vec_index`: 1-based ``q`` for 1-based ``(xi, r)``."""
    return (2 * delta - 1) * (xi - 1) + r


def mirror_diagonal_index(r: int, delta: int) -> int:
    """0-based index of the diagonal conjugate-paired with 0-based ``r``.

    Upper diagonal ``r`` (offset ``r``) pairs with lower diagonal ``K - r``
    (offset ``-r``); the main diagonal pairs with itself.
    """
    K = 2 * delta - 1
    return 0 if r == 0 else K - r


def banded_projection(A, delta: int) -> np.ndarray:
    """Dense ``T_delta``: zero every entry outside the ``2*delta - 1`` circulant diagonals."""
    A = np.asarray(A)
    d = A.shape[0]
    diff = np.abs(np.subtract.outer(np.arange(d), np.arange(d)))
    mask = (diff < delta) | (diff > d - delta)
    return np.where(mask, A, 0)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class BandedHermitian:
    """Hermitian ``d x d`` matrix supported on ``2*delta - 1`` circulant diagonals.

    Only the main diagonal (real) and the ``delta - 1`` upper diagonals are
    stored: ``upper[z, s] = X[z, (z + s) % d]`` for ``0 <= s < delta``. The lower
    band is implicit, so a non-Hermitian band cannot be represented.
    """

    upper: np.ndarray

    def __post_init__(self):
        upper = np.asarray(self.upper, dtype=np.complex128)
        if upper.ndim != 2:
            raise ValueError("upper must be a (d, delta) array")
        d, delta = upper.shape
        if delta < 1 or 2 * delta - 1 > d:
            raise ValueError(f"need 1 <= delta and 2*delta - 1 <= d, got d={d}, delta={delta}")
        upper = upper.copy()
        upper[:, 0] = upper[:, 0].real
        object.__setattr__(self, "upper", _freeze(upper))

    @property
    def d(self) -> int:
        return self.upper.shape[0]

    @property
    def delta(self) -> int:
        return self.upper.shape[1]

    @property
    def K(self) -> int:
        return 2 * self.delta - 1

    # construction -----------------------------------------------------------

    @classmethod
    def zeros(cls, d: int, delta: int) -> "BandedHermitian":
        return cls(np.zeros((d, delta), dtype=np.complex128))

    @classmethod
    def from_signal(cls, x, delta: int) -> "BandedHermitian":
        """``T_delta(x x^*)``."""
        x = as_signal(x)
        d = x.shape[0]
        idx = (np.arange(d)[:, None] + np.arange(delta)[None, :]) % d
        return cls(x[:, None] * np.conj(x[idx]))

    @classmethod
    def from_dense(cls, A, delta: int) -> "BandedHermitian":
        """Band of a dense matrix, Hermitian-symmetrized."""
        A = np.asarray(A, dtype=np.complex128)
        A = 0.5 * (A + A.conj().T)
        d = A.shape[0]
        rows = np.arange(d)[:, None]
        cols = (rows + np.arange(delta)[None, :]) % d
        return cls(A[rows, cols])

    @classmethod
    def from_table(cls, table, symmetrize: bool = True) -> "BandedHermitian":
        """Build from a ``(d, K)`` diagonal table.

        With ``symmetrize`` each upper entry is averaged with the conjugate of
        its lower-band partner; otherwise the lower half of the table is ignored.
        """
        table = np.asarray(table, dtype=np.complex128)
        d, K = table.shape
        if K % 2 == 0:
            raise ValueError("diagonal table must have an odd number of columns")
        delta = (K + 1) // 2
        upper = np.conj(table[:, :delta])
        if symmetrize:
            upper[:, 0] = table[:, 0].real
            z = np.arange(d)
            for s in range(1, delta):
                # L[z, K - s] = X[z + 1 - s, z + 1]  ->  upper[z, s] = L[z + s - 1, K - s]
                mirrored = table[(z + s - 1) % d, K - s]
                upper[:, s] = 0.5 * (upper[:, s] + mirrored)
        return cls(upper)

    @classmethod
    def from_vec(cls, v, d: int, delta: int, symmetrize: bool = True) -> "BandedHermitian":
        v = np.asarray(v, dtype=np.complex128)
        K = 2 * delta - 1
        if v.shape != (d * K,):
            raise ValueError(f"vec has shape {v.shape}, expected ({d * K},)")
        return cls.from_table(v.reshape(d, K), symmetrize=symmetrize)

    # views ------------------------------------------------------------------

    def table(self) -> np.ndarray:
        """The ``(d, K)`` diagonal table ``L[z, r]`` (columns are diagonals ``L^{r+1}``)."""
        d, delta, K = self.d, self.delta, self.K
        out = np.empty((d, K), dtype=np.complex128)
        out[:, :delta] = np.conj(self.upper)
        z = np.arange(d)
        for r in range(delta, K):
            s = K - r
            out[:, r] = self.upper[(z + 1 - s) % d, s]
        return out

    def vec(self) -> np.ndarray:
        return self.table().ravel()

    def to_dense(self) -> np.ndarray:
        d = self.d
        A = np.zeros((d, d), dtype=np.complex128)
        z = np.arange(d)
        for s in range(self.delta - 1, -1, -1):
            A[z, (z + s) % d] = self.upper[:, s]
            A[(z + s) % d, z] = np.conj(self.upper[:, s])
        A[z, z] = self.upper[:, 0].real
        return A

    def entry(self, k: int, j: int) -> complex:
        """0-based entry ``X[k, j]``; zero off the band."""
        d = self.d
        s = (j - k) % d
        if s < self.delta:
            return complex(self.upper[k % d, s])
        s = (k - j) % d
        if s < self.delta:
            return complex(np.conj(self.upper[j % d, s]))
        return 0j

    def diagonal(self) -> np.ndarray:
        return self.upper[:, 0].real.copy()

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        d, delta = self.d, self.delta
        z = np.arange(d)
        out = self.upper[:, 0].real * x
        for s in range(1, delta):
            out = out + self.upper[:, s] * x[(z + s) % d]
            out = out + np.conj(self.upper[(z - s) % d, s]) * x[(z - s) % d]
        return out

    def to_sparse(self):
        """CSR matrix with the same action as :meth:`matvec` (duplicate positions add up)."""
        d, delta = self.d, self.delta
        z = np.arange(d)
        rows, cols, vals = [z], [z], [self.upper[:, 0].real.astype(np.complex128)]
        for s in range(1, delta):
            rows += [z, (z + s) % d]
            cols += [(z + s) % d, z]
            vals += [self.upper[:, s], np.conj(self.upper[:, s])]
        mat = sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(d, d)
        )
        return mat.tocsr()

    # arithmetic -------------------------------------------------------------

    def __add__(self, other: "BandedHermitian") -> "BandedHermitian":
        if not isinstance(other, BandedHermitian):
            return NotImplemented
        return BandedHermitian(self.upper + other.upper)

    def __sub__(self, other: "BandedHermitian") -> "BandedHermitian":
        if not isinstance(other, BandedHermitian):
            return NotImplemented
        return BandedHermitian(self.upper - other.upper)

    def __mul__(self, c: float) -> "BandedHermitian":
        c = float(c)
        return BandedHermitian(self.upper * c)

    __rmul__ = __mul__

    def norm(self) -> float:
        """Frobenius norm of the full (dense) matrix."""
        return float(np.linalg.norm(self.table()))


@dataclass(frozen=True)
class DiagonalSet:
    """The ``2*delta - 1`` circulant diagonals of a banded matrix.

    Attributes
    ----------
    diagonals : ndarray, shape (d, K)
        Column ``r`` is diagonal ``L^{r+1}`` in the space domain.
    fourier_known : ndarray of bool, shape (d, K)
        ``fourier_known[xi, r]`` flags whether DFT coefficient ``xi`` of
        ``L^{r+1}`` is available.
    """

    diagonals: np.ndarray
    fourier_known: np.ndarray

    def __post_init__(self):
        diagonals = np.asarray(self.diagonals, dtype=np.complex128)
        known = np.asarray(self.fourier_known, dtype=bool)
        if diagonals.ndim != 2 or diagonals.shape[1] % 2 == 0:
            raise ValueError("diagonals must be a (d, 2*delta - 1) array")
        if known.shape != diagonals.shape:
            raise ValueError("fourier_known must match diagonals in shape")
        object.__setattr__(self, "diagonals", _freeze(diagonals))
        object.__setattr__(self, "fourier_known", _freeze(known))

    @property
    def d(self) -> int:
        return self.diagonals.shape[0]

    @property
    def delta(self) -> int:
        return (self.diagonals.shape[1] + 1) // 2

    def fourier(self) -> np.ndarray:
        """DFT of each diagonal, shape ``(d, K)``."""
        return np.fft.fft(self.diagonals, axis=0)

    @classmethod
    def from_fourier(cls, coefficients, fourier_known=None) -> "DiagonalSet":
        coefficients = np.asarray(coefficients, dtype=np.complex128)
        if fourier_known is None:
            fourier_known = np.ones(coefficients.shape, dtype=bool)
        return cls(np.fft.ifft(coefficients, axis=0), fourier_known)


def extract_diagonals(X: BandedHermitian) -> DiagonalSet:
    """All diagonals of ``X`` with every Fourier coefficient flagged known."""
    table = X.table()
    return DiagonalSet(table, np.ones(table.shape, dtype=bool))


def assemble_diagonals(diagonals: DiagonalSet) -> BandedHermitian:
    """Banded Hermitian matrix from the main and upper diagonals.

    The lower diagonals are implied by Hermitian symmetry and are not read.
    """
    return BandedHermitian.from_table(diagonals.diagonals, symmetrize=False)
