"""
Completion of Fourier coefficients lost to discarded singular values.

For a rank-one band ``X_0 = T_delta(x x^*)`` the diagonals satisfy, for all
``r, l`` in ``[1..delta]``::

    L^r o S_{l-1} conj(L^r) = L^l o S_{r-1} conj(L^l)

If ``L^r`` is fully known and ``L^l`` misses a single Fourier coefficient,
taking the DFT of both sides gives equations that are linear in the real and
imaginary parts of the missing coefficient (one 2x2 block per frequency
``j = 2..d``). Their least-squares solution fills the gap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import BandedHermitian, DiagonalSet
from .spectral import BlockSVD, LostIndexSet

__all__ = [
    "RankDeficient",
    "AssumptionViolation",
    "CompletionProblem",
    "LinearCoefficientSystem",
    "CompletionResult",
    "extract_known_coefficients",
    "build_linear_system",
    "solve_missing",
    "choose_reference",
    "complete",
    "mirror_fourier",
]


class RankDeficient(np.linalg.LinAlgError):
    """The 2-column coefficient matrix does not have full column rank."""


class AssumptionViolation(ValueError):
    """The target diagonal misses more than one coefficient."""


@dataclass(frozen=True)
class CompletionProblem:
    """Fourier coefficients of the diagonals with known/missing flags.

    ``coefficients[xi, r]`` is the DFT coefficient ``xi`` of diagonal ``r``
    (both 0-based); unknown entries hold 0. ``singular_values`` (optional,
    same shape) is used to rank candidate reference diagonals.
    """

    coefficients: np.ndarray
    known: np.ndarray
    singular_values: np.ndarray | None = None

    @property
    def d(self) -> int:
        return self.coefficients.shape[0]

    @property
    def delta(self) -> int:
        return (self.coefficients.shape[1] + 1) // 2

    def missing_counts(self) -> np.ndarray:
        """Missing coefficients per main/upper diagonal, length ``delta``."""
        return (~self.known[:, : self.delta]).sum(axis=0)

    def full_diagonals(self) -> list[int]:
        return [int(r) for r in np.nonzero(self.missing_counts() == 0)[0]]

    @property
    def reference_index(self) -> int | None:
        return choose_reference(self)


@dataclass(frozen=True)
class LinearCoefficientSystem:
    """Stacked real system ``Q [Re c, Im c]^T = v`` for one missing coefficient."""

    Q: np.ndarray
    v: np.ndarray
    diagonal: int
    position: int
    reference: int


@dataclass(frozen=True)
class CompletionResult:
    diagonals: DiagonalSet
    assumptions_hold: bool
    residuals: dict = field(default_factory=dict)

    def matrix(self) -> BandedHermitian:
        return BandedHermitian.from_table(self.diagonals.diagonals, symmetrize=False)


def mirror_fourier(coefficients: np.ndarray, r: int) -> np.ndarray:
    """Fourier coefficients of upper diagonal ``r`` implied by its lower partner.

    Uses ``L^r_z = conj(L^{K-r}_{z+r-1})`` (0-based ``r``). For ``r = 0`` the
    main diagonal is real and is mirrored onto itself.
    """
    d, K = coefficients.shape
    xi = np.arange(d)
    flip = (-xi) % d
    if r == 0:
        return np.conj(coefficients[flip, 0])
    partner = coefficients[flip, K - r]
    return np.exp(2j * np.pi * ((r - 1) * xi % d) / d) * np.conj(partner)


def extract_known_coefficients(
    X_S: BandedHermitian, lost: LostIndexSet, svd: BlockSVD | None = None
) -> CompletionProblem:
    """DFT of every diagonal of ``X_S``, with lost positions flagged and zeroed."""
    coefficients = np.fft.fft(X_S.table(), axis=0)
    if lost.mask.shape != coefficients.shape:
        raise ValueError(
            f"lost set has shape {lost.mask.shape}, diagonals have {coefficients.shape}"
        )
    known = ~lost.mask
    coefficients[~known] = 0
    sv = None if svd is None else np.abs(svd.z)
    return CompletionProblem(coefficients, known, sv)


def build_linear_system(
    problem: CompletionProblem,
    reference: int,
    diagonal: int,
    position: int,
    coefficients: np.ndarray | None = None,
    known: np.ndarray | None = None,
    zero_fill: bool = False,
) -> LinearCoefficientSystem:
    """Linear system for coefficient ``position`` of ``diagonal`` (all 0-based).

    ``reference`` must be fully known. Other unknown coefficients on
    ``diagonal`` raise :class:`AssumptionViolation` unless ``zero_fill`` is set,
    in which case they enter as zeros.
    """
    G = problem.coefficients if coefficients is None else coefficients
    known = problem.known if known is None else known
    d, delta = problem.d, problem.delta
    if not (0 <= reference < delta and 0 <= diagonal < delta):
        raise ValueError("reference and target diagonals must be main or upper diagonals")
    if reference == diagonal:
        raise ValueError("reference and target diagonal coincide")
    if not known[:, reference].all():
        raise ValueError(f"reference diagonal {reference} is not fully known")
    others = ~known[:, diagonal]
    others[position] = False
    if others.any() and not zero_fill:
        raise AssumptionViolation(
            f"diagonal {diagonal} misses {int(others.sum()) + 1} coefficients"
        )

    r, l, q = reference + 1, diagonal + 1, position + 1
    L_ref = np.fft.ifft(G[:, reference])
    # DFT(L^r o S_{l-1} conj(L^r)); the unnormalized DFT turns the product into
    # a convolution divided by d, hence the factor d on the left side.
    c = d * np.fft.fft(L_ref * np.conj(np.roll(L_ref, -(l - 1))))

    Lh = G[:, diagonal].copy()
    Lh[position] = 0
    Lh[others] = 0

    j = np.arange(2, d + 1)
    p = np.arange(1, d + 1)
    phase_p = np.exp(2j * np.pi * ((r - 1) * (p - 1) % d) / d)
    # conv[j-1] = sum_p e^{..} Lh_{j-p+1} conj(Lh)_{d-p+2}, with the missing entry zeroed
    first = Lh[(j[:, None] - p[None, :]) % d]
    second = np.conj(Lh[(d - p + 1) % d])
    zj = (first * (phase_p * second)[None, :]).sum(axis=1)

    a = np.exp(2j * np.pi * ((r - 1) * (j - q) % d) / d) * np.conj(Lh[(d - j + q) % d])
    b = np.exp(2j * np.pi * ((r - 1) * (d - q + 1) % d) / d) * Lh[(j - d + q - 2) % d]
    rhs = c[j - 1] - zj

    Q = np.empty((2 * (d - 1), 2))
    Q[0::2, 0] = a.real + b.real
    Q[0::2, 1] = -a.imag + b.imag
    Q[1::2, 0] = a.imag + b.imag
    Q[1::2, 1] = a.real - b.real
    v = np.empty(2 * (d - 1))
    v[0::2] = rhs.real
    v[1::2] = rhs.imag
    return LinearCoefficientSystem(Q, v, diagonal, position, reference)


def solve_missing(system: LinearCoefficientSystem, rcond: float = 1e-12) -> complex:
    """Least-squares estimate of the missing coefficient."""
    Q, v = system.Q, system.v
    s = np.linalg.svd(Q, compute_uv=False)
    if s.size < 2 or s[0] == 0 or s[1] <= rcond * s[0]:
        raise RankDeficient("coefficient system is rank deficient")
    sol, *_ = np.linalg.lstsq(Q, v, rcond=None)
    return complex(sol[0], sol[1])


def choose_reference(problem: CompletionProblem, candidates=None) -> int | None:
    """Best-conditioned full diagonal: largest ``min_k |z[k, r]|``, ties to smallest ``r``."""
    if candidates is None:
        candidates = problem.full_diagonals()
    candidates = list(candidates)
    if not candidates:
        return None
    if problem.singular_values is None:
        return min(candidates)
    score = {r: float(problem.singular_values[:, r].min()) for r in candidates}
    return max(candidates, key=lambda r: (score[r], -r))


def _solve_into(problem, G, known, reference, diagonal, position, zero_fill, residuals):
    system = build_linear_system(
        problem, reference, diagonal, position, coefficients=G, known=known, zero_fill=zero_fill
    )
    try:
        value = solve_missing(system)
    except RankDeficient:
        return False
    res = system.Q @ np.array([value.real, value.imag]) - system.v
    residuals[(diagonal, position)] = float(np.linalg.norm(res))
    G[position, diagonal] = value
    return True


def complete(problem: CompletionProblem) -> CompletionResult:
    """Fill missing coefficients of the main and upper diagonals.

    When some diagonal is fully known and every other one misses at most one
    coefficient, each gap is solved exactly against the best reference.
    Otherwise a single sequential pass runs: diagonals in ascending order of
    missing count (then index), each unknown solved with the remaining ones
    held at zero, and every processed diagonal joins the reference pool. The
    lower diagonals follow from Hermitian symmetry.
    """
    d, delta = problem.d, problem.delta
    K = 2 * delta - 1
    G = np.array(problem.coefficients, dtype=np.complex128, copy=True)
    known = np.array(problem.known, dtype=bool, copy=True)
    counts = problem.missing_counts()
    full = problem.full_diagonals()
    assumptions_hold = bool(full) and bool(np.all(counts <= 1))
    residuals: dict = {}

    pending = sorted((int(c), r) for r, c in enumerate(counts) if c > 0)
    if assumptions_hold:
        reference = choose_reference(problem)
        for _, r in pending:
            q = int(np.nonzero(~known[:, r])[0][0])
            _solve_into(problem, G, known, reference, r, q, False, residuals)
            known[q, r] = True
    else:
        pool: list[int] = []
        for _, r in pending:
            if not full and not pool:
                # nothing to solve against: the zero-filled diagonal becomes the reference
                known[:, r] = True
                pool.append(r)
                continue
            reference = choose_reference(problem) if full else pool[-1]
            for q in np.nonzero(~known[:, r])[0]:
                _solve_into(problem, G, known, reference, r, int(q), True, residuals)
                known[q, r] = True
            pool.append(r)

    table = np.empty((d, K), dtype=np.complex128)
    table[:, :delta] = G[:, :delta]
    flip = (-np.arange(d)) % d
    for r in range(1, delta):
        # lower partner of upper diagonal r, inverting mirror_fourier
        table[:, K - r] = np.conj(np.exp(-2j * np.pi * ((r - 1) * flip % d) / d) * G[flip, r])
    diagonals = np.fft.ifft(table, axis=0)
    diagonals[:, 0] = diagonals[:, 0].real
    result = DiagonalSet(diagonals, np.ones((d, K), dtype=bool))
    return CompletionResult(result, assumptions_hold, residuals)
