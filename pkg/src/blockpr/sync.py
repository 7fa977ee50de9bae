"""Phase normalization, angular synchronization and magnitude estimation."""

from __future__ import annotations

import logging

import numpy as np
from scipy import sparse

from .core import ZERO_TOL, BandedHermitian

log = logging.getLogger(__name__)

__all__ = [
    "NoConvergence",
    "normalize_phases",
    "top_eigenvector",
    "magnitudes_diagonal",
    "magnitudes_block",
    "assemble_signal",
]


class NoConvergence(RuntimeError):
    """Power iteration hit its iteration cap; ``last_iterate`` holds the final vector."""

    def __init__(self, message: str, last_iterate: np.ndarray, iterations: int):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.iterations = iterations


def _phase(u: np.ndarray, tol: float = 0.0) -> np.ndarray:
    mag = np.abs(u)
    out = np.zeros_like(u)
    nz = mag > tol
    out[nz] = u[nz] / mag[nz]
    return out


def normalize_phases(X: BandedHermitian) -> BandedHermitian:
    """Entrywise ``x / |x|`` on the band; entries with ``|x| <= 1e-12`` become 0."""
    return BandedHermitian(_phase(X.upper, ZERO_TOL))


def _start_vector(d: int) -> np.ndarray:
    # fixed perturbation so the start is never orthogonal to the top eigenvector
    v = np.ones(d, dtype=np.complex128) + 1e-3 * np.exp(1j * np.arange(d))
    return v / np.linalg.norm(v)


def top_eigenvector(X: BandedHermitian, tol: float = 1e-10, max_iter: int = 10_000, shift=None) -> np.ndarray:
    """Top eigenvector of a banded Hermitian matrix, scaled to norm ``sqrt(d)``.

    Power iteration on ``X + c I`` with ``c = 2*delta`` (a Gershgorin bound for
    phase matrices), stopped once successive phase-aligned iterates differ by
    less than ``tol``.
    """
    d = X.d
    c = 2 * X.delta if shift is None else float(shift)
    A = X.to_sparse() + c * sparse.identity(d, dtype=np.complex128, format="csr")
    v = _start_vector(d)
    for it in range(1, max_iter + 1):
        w = A @ v
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return np.zeros(d, dtype=np.complex128)
        w /= nrm
        overlap = np.vdot(w, v)
        if overlap != 0:
            w *= overlap / abs(overlap)
        done = np.linalg.norm(w - v) < tol
        v = w
        if done:
            return np.sqrt(d) * v
    raise NoConvergence(
        f"power iteration did not converge in {max_iter} iterations", np.sqrt(d) * v, max_iter
    )


def magnitudes_diagonal(X: BandedHermitian) -> np.ndarray:
    """``sqrt(max(X_jj, 0))``."""
    return np.sqrt(np.maximum(X.diagonal(), 0.0))


def _principal_blocks(X: BandedHermitian, size: int) -> tuple[np.ndarray, np.ndarray]:
    d = X.d
    idx = (np.arange(d)[:, None] + np.arange(size)[None, :]) % d
    offsets = np.arange(size)[None, :] - np.arange(size)[:, None]
    rows = idx[:, :, None] * np.ones(size, dtype=int)
    cols = idx[:, None, :] * np.ones((size, 1), dtype=int)
    up = np.maximum(offsets, 0)
    lo = np.maximum(-offsets, 0)
    upper_vals = X.upper[rows, up[None]]
    lower_vals = np.conj(X.upper[cols, lo[None]])
    blocks = np.where(offsets[None] >= 0, upper_vals, lower_vals)
    return blocks, idx


def magnitudes_block(X: BandedHermitian, block_size: int | None = None) -> np.ndarray:
    """Average of per-block magnitude estimates over circularly sliding principal blocks.

    Each ``b x b`` block yields ``sqrt(max(trace, 0)) * |v|`` with ``v`` its unit
    top eigenvector; every index is covered by ``b`` blocks.
    """
    b = X.delta if block_size is None else int(block_size)
    if not 1 <= b <= X.delta:
        raise ValueError(f"block size must lie in [1, {X.delta}]")
    if b == 1:
        return magnitudes_diagonal(X)
    blocks, idx = _principal_blocks(X, b)
    _, vecs = np.linalg.eigh(blocks)
    top = np.abs(vecs[:, :, -1])
    trace = np.einsum("kii->k", blocks).real
    est = np.sqrt(np.maximum(trace, 0.0))[:, None] * top
    total = np.zeros(X.d)
    np.add.at(total, idx.ravel(), est.ravel())
    return total / b


def assemble_signal(X: BandedHermitian, magnitude_mode: str = "block", strict: bool = True, **eig_kwargs) -> np.ndarray:
    """Signal estimate ``magnitude_j * phase(eigvec_j)`` with ``phase(0) := 1``.

    With ``strict=False`` a :class:`NoConvergence` from the eigensolver is
    logged and its last iterate used instead of raising.
    """
    if magnitude_mode == "block":
        mags = magnitudes_block(X)
    elif magnitude_mode == "diagonal":
        mags = magnitudes_diagonal(X)
    else:
        raise ValueError(f"unknown magnitude mode {magnitude_mode!r}")
    try:
        v = top_eigenvector(normalize_phases(X), **eig_kwargs)
    except NoConvergence as exc:
        if strict:
            raise
        log.warning("%s; using last iterate", exc)
        v = exc.last_iterate
    phases = _phase(v)
    phases[np.abs(v) == 0] = 1.0
    return mags * phases
