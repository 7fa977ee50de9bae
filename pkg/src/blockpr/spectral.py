"""
Structured SVD of the lifted measurement matrix and its truncated inverse.

The measurement matrix ``M`` maps ``vec(T_delta(x x^*))`` to the ``d*K``
intensities. It is block circulant with blocks ``M_1..M_delta`` and factors as
``M = U_K J U_K^*`` where ``U_K`` is the unitary block Fourier matrix and each
diagonal block is ``J_k = F_K diag(z_k)``. The singular values of ``M`` are
therefore the ``|z[k, j]|`` and the right singular vectors are the columns of
``U_K``, so every solve reduces to FFTs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ZERO_TOL, BandedHermitian
from .masks import MeasurementGrid, WindowSpec, make_window

__all__ = [
    "build_block",
    "assemble_M",
    "compute_z",
    "compute_z_closed_form",
    "BlockSVD",
    "block_svd",
    "LostIndexSet",
    "lost_indices",
    "block_dft",
    "regularized_inverse_vec",
    "apply_regularized_inverse",
    "regularized_fourier_table",
    "dense_M",
    "block_fourier_matrix",
    "TABLE_EDGES",
    "singular_value_bins",
    "parity_zero_set",
]

DENSE_LIMIT = 2000

#: Bin edges of the singular value histogram; the first bin is the exact-zero set.
TABLE_EDGES = (0.0, 1e-4, 1e-3, 10**-2.5, 1e-2, 1e-1, 10.0)


def _window_head(window) -> np.ndarray:
    if isinstance(window, WindowSpec):
        return make_window(window)[: window.delta]
    return np.asarray(window, dtype=np.complex128)


def build_block(l: int, window) -> np.ndarray:
    """Block ``M_l`` (``1 <= l <= delta``) of the block-circulant measurement matrix.

    Row index is the frequency ``n``, column index the diagonal ``j``.
    """
    w = _window_head(window)
    delta = w.shape[0]
    if not 1 <= l <= delta:
        raise ValueError(f"block index l={l} outside [1, {delta}]")
    K = 2 * delta - 1
    n = np.arange(1, K + 1)[:, None]
    block = np.zeros((K, K), dtype=np.complex128)
    for j in range(1, K + 1):
        if j <= delta - l + 1:
            coef = np.conj(w[l - 1]) * w[j + l - 2]
            phase = np.exp(-2j * np.pi * (n - 1) * (j - 1) / K)
        elif j >= 2 * delta - l and l < delta:
            coef = np.conj(w[l]) * w[l + j - 2 * delta]
            phase = np.exp(-2j * np.pi * (n - 1) * (j - 2 * delta) / K)
        else:
            continue
        block[:, j - 1] = (coef / np.sqrt(K) * phase)[:, 0]
    return block


def assemble_M(window, d: int) -> np.ndarray:
    """Dense block-circulant matrix built from :func:`build_block`."""
    w = _window_head(window)
    delta = w.shape[0]
    K = 2 * delta - 1
    if d * K > DENSE_LIMIT:
        raise ValueError(f"dense matrix of size {d * K} exceeds limit {DENSE_LIMIT}")
    M = np.zeros((d * K, d * K), dtype=np.complex128)
    for l in range(1, delta + 1):
        B = build_block(l, w)
        for i in range(d):
            c = (i + l - 1) % d
            M[i * K : (i + 1) * K, c * K : (c + 1) * K] = B
    return M


def _unitary_dft(K: int) -> np.ndarray:
    n = np.arange(K)
    return np.exp(-2j * np.pi * np.outer(n, n) / K) / np.sqrt(K)


def compute_z(window, d: int) -> np.ndarray:
    """Table ``z[k, j]`` with ``J_k = F_K diag(z[k, :])``; shape ``(d, K)``.

    Computed as the diagonal of ``F_K^* J_k`` with
    ``J_k = sum_l M_l exp(2 pi i (k-1)(l-1)/d)``.
    """
    w = _window_head(window)
    delta = w.shape[0]
    blocks = np.stack([build_block(l, w) for l in range(1, delta + 1)])
    k = np.arange(d)[:, None]
    l = np.arange(delta)[None, :]
    phases = np.exp(2j * np.pi * ((k * l) % d) / d)
    J = np.einsum("kl,lnj->knj", phases, blocks)
    F = _unitary_dft(2 * delta - 1)
    return np.einsum("nj,knj->kj", np.conj(F), J)


def compute_z_closed_form(window, d: int) -> np.ndarray:
    """``z[k, j]`` for the main and upper diagonals (``j < delta``, 0-based) by direct summation."""
    w = _window_head(window)
    delta = w.shape[0]
    z = np.zeros((d, delta), dtype=np.complex128)
    k = np.arange(d)
    for j in range(delta):
        for l in range(delta - j):
            z[:, j] += np.conj(w[l]) * w[j + l] * np.exp(2j * np.pi * ((k * l) % d) / d)
    return z


def _sign(z: np.ndarray) -> np.ndarray:
    mag = np.abs(z)
    out = np.ones_like(z)
    nz = mag > 0
    out[nz] = z[nz] / mag[nz]
    return out


@dataclass(frozen=True)
class BlockSVD:
    """SVD of ``M`` stored through the ``(d, K)`` table of ``z[k, j]``.

    ``kept[k, j]`` marks singular triples with ``|z| > epsilon``; for
    ``epsilon = 0`` the threshold is the relative zero tolerance
    ``ZERO_TOL * max|z|``.
    """

    z: np.ndarray
    epsilon: float
    kept: np.ndarray
    window: WindowSpec | None
    d: int
    delta: int

    @property
    def K(self) -> int:
        return 2 * self.delta - 1

    @property
    def singular_values(self) -> np.ndarray:
        return np.abs(self.z)

    @property
    def sign(self) -> np.ndarray:
        """``sgn(z)`` with ``sgn(0) := 1``."""
        return _sign(self.z)

    @property
    def threshold(self) -> float:
        return _threshold(np.abs(self.z), self.epsilon)

    def with_epsilon(self, epsilon: float) -> "BlockSVD":
        return _make_svd(self.z, epsilon, self.window, self.d, self.delta)

    def untruncated(self) -> "BlockSVD":
        """Copy that inverts every nonzero ``z``, however small (plain ``M^{-1}``)."""
        kept = np.abs(self.z) > 0
        kept.flags.writeable = False
        return BlockSVD(self.z, 0.0, kept, self.window, self.d, self.delta)


def _threshold(mag: np.ndarray, epsilon: float) -> float:
    return float(epsilon) if epsilon > 0 else ZERO_TOL * float(mag.max(initial=0.0))


def _make_svd(z, epsilon, window, d, delta) -> BlockSVD:
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    mag = np.abs(z)
    K = 2 * delta - 1
    # |z[k, j]| and |z[-k, -j]| agree analytically; pairing them keeps the
    # kept set closed under the Hermitian mirror despite rounding.
    mirror = mag[(-np.arange(d)) % d][:, (-np.arange(K)) % K]
    paired = 0.5 * (mag + mirror)
    kept = paired > _threshold(mag, epsilon)
    for a in (z, kept):
        a.flags.writeable = False
    return BlockSVD(z, float(epsilon), kept, window, d, delta)


def block_svd(window: WindowSpec, epsilon: float = 0.0) -> BlockSVD:
    """Structured SVD of the measurement matrix for ``window`` at threshold ``epsilon``."""
    z = compute_z(window, window.d)
    return _make_svd(z, epsilon, window, window.d, window.delta)


class LostIndexSet:
    """Discarded singular triples, as a boolean ``(d, K)`` mask over ``(k, j)``."""

    def __init__(self, mask):
        mask = np.array(mask, dtype=bool, copy=True)
        mask.flags.writeable = False
        self.mask = mask

    @property
    def d(self) -> int:
        return self.mask.shape[0]

    @property
    def K(self) -> int:
        return self.mask.shape[1]

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __contains__(self, pair) -> bool:
        k, j = pair
        return bool(self.mask[k - 1, j - 1])

    def pairs(self) -> list[tuple[int, int]]:
        """1-based ``(k, j)`` pairs in lexicographic order."""
        k, j = np.nonzero(self.mask)
        return [(int(a) + 1, int(b) + 1) for a, b in zip(k, j)]

    def columns(self) -> list[int]:
        """1-based column indices ``q = K*(k-1) + j`` of ``V_2``."""
        return [self.K * (k - 1) + j for k, j in self.pairs()]

    def __repr__(self) -> str:
        return f"LostIndexSet({len(self)} of {self.mask.size})"


def lost_indices(svd: BlockSVD) -> LostIndexSet:
    return LostIndexSet(~svd.kept)


def parity_zero_set(delta: int) -> list[int]:
    """1-based diagonals ``j`` whose ``z[d/2+1, j]`` vanish for symmetric windows and even ``d``."""
    upper = [j for j in range(1, delta + 1) if (delta - j) % 2 == 1]
    lower = [j for j in range(delta + 1, 2 * delta) if (delta - j) % 2 == 0]
    return upper + lower


def block_dft(y, inverse: bool = False, method: str = "fft") -> np.ndarray:
    """DFT along the shift axis (axis 0) of a ``(d, K)`` array.

    ``method="direct"`` evaluates the O(d^2) sum and exists as a cross-check.
    """
    y = np.asarray(y, dtype=np.complex128)
    if method == "fft":
        return np.fft.ifft(y, axis=0) if inverse else np.fft.fft(y, axis=0)
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    d = y.shape[0]
    sign = 1 if inverse else -1
    n = np.arange(d)
    W = np.exp(sign * 2j * np.pi * (np.outer(n, n) % d) / d)
    out = W @ y
    return out / d if inverse else out


def regularized_fourier_table(svd: BlockSVD, y: MeasurementGrid, method: str = "fft") -> np.ndarray:
    """Fourier coefficients of the diagonals recovered by the truncated inverse.

    Entry ``[xi, r]`` equals ``sqrt(d) <vec(X_S), V^(q)>`` for kept triples and
    zero for discarded ones. Equivalent to applying ``U^*``, scaling by
    ``1/|z|`` and reading off ``sqrt(d) V^*``.
    """
    values = np.asarray(y.values if isinstance(y, MeasurementGrid) else y, dtype=float)
    if values.shape != (svd.d, svd.K):
        raise ValueError(f"measurements have shape {values.shape}, expected {(svd.d, svd.K)}")
    # U_K^* y (up to 1/sqrt(d)), then F_K^* per block (up to sqrt(K)).
    A = np.fft.ifft(block_dft(values, method=method), axis=1)
    G = np.zeros_like(A)
    kept = svd.kept
    G[kept] = np.sqrt(svd.K) * A[kept] / svd.z[kept]
    return G


def regularized_inverse_vec(svd: BlockSVD, y, method: str = "fft") -> np.ndarray:
    """``M_S^{-1} y`` as a length-``D`` vector, without Hermitian symmetrization.

    Accepts any real ``(d, K)`` array, so it can be applied column by column
    to build the dense inverse at small sizes.
    """
    G = regularized_fourier_table(svd, y, method=method)
    return block_dft(G, inverse=True, method=method).ravel()


def apply_regularized_inverse(svd: BlockSVD, y: MeasurementGrid, method: str = "fft") -> BandedHermitian:
    """``X_S``: truncated-SVD inverse of ``y``, Hermitian-symmetrized, as a banded matrix."""
    G = regularized_fourier_table(svd, y, method=method)
    table = block_dft(G, inverse=True, method=method)
    return BandedHermitian.from_table(table, symmetrize=True)


def dense_M(window, d: int) -> np.ndarray:
    """Dense ``D x D`` measurement matrix built from the lifted measurement definition.

    Row ``l*K + j`` holds the coefficients of ``vec(T_delta(x x^*))`` in the
    intensity ``|<S_l x, m_j>|^2``. Independent of :func:`build_block`; meant
    for cross-validation at small sizes.
    """
    w = _window_head(window)
    delta = w.shape[0]
    K = 2 * delta - 1
    D = d * K
    if D > DENSE_LIMIT:
        raise ValueError(f"dense matrix of size {D} exceeds limit {DENSE_LIMIT}")
    masks = np.zeros((K, delta), dtype=np.complex128)
    for j in range(K):
        masks[j] = K ** (-0.25) * np.conj(w) * np.exp(2j * np.pi * np.arange(delta) * j / K)
    M = np.zeros((D, D), dtype=np.complex128)
    for l in range(d):
        for j in range(K):
            # |sum_a x_{l+a} conj(m_a)|^2 = sum_{a,b} conj(x_{l+b}) x_{l+a} conj(m_a) m_b
            for a in range(delta):
                for b in range(delta):
                    coef = np.conj(masks[j, a]) * masks[j, b]
                    p, off = (l + b) % d, a - b
                    if off >= 0:
                        q = p * K + off
                    else:
                        q = ((p - 1) % d) * K + off + K
                    M[l * K + j, q] += coef
    return M


def block_fourier_matrix(d: int, delta: int) -> np.ndarray:
    """Unitary block Fourier matrix ``U_K`` (equal to ``V``), shape ``(D, D)``."""
    K = 2 * delta - 1
    if d * K > DENSE_LIMIT:
        raise ValueError(f"dense matrix of size {d * K} exceeds limit {DENSE_LIMIT}")
    n = np.arange(d)
    Fd = np.exp(2j * np.pi * (np.outer(n, n) % d) / d) / np.sqrt(d)
    return np.kron(Fd, np.eye(K))


def singular_value_bins(svd: BlockSVD, edges=TABLE_EDGES) -> list[tuple[float, float, int]]:
    """Histogram of ``|z|``: an exact-zero bin followed by half-open bins ``(lo, hi]``."""
    mag = np.abs(svd.z).ravel()
    zero = mag <= ZERO_TOL * mag.max(initial=0.0)
    rows = [(0.0, 0.0, int(zero.sum()))]
    rest = mag[~zero]
    for lo, hi in zip(edges[:-1], edges[1:]):
        rows.append((lo, hi, int(((rest > lo) & (rest <= hi)).sum())))
    return rows
