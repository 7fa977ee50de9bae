import numpy as np
import pytest

import oracles
from blockpr.core import BandedHermitian
from blockpr.sync import (
    NoConvergence,
    assemble_signal,
    magnitudes_block,
    magnitudes_diagonal,
    normalize_phases,
    top_eigenvector,
)


def nonvanishing_signal(rng, d):
    x = oracles.random_signal(rng, d)
    return x / np.abs(x) * rng.uniform(0.5, 1.5, d)


def phase_error(v, x):
    return np.max(np.abs(oracles.align(v / np.abs(v), x / np.abs(x)) - x / np.abs(x)))


def test_normalize_phases_examples():
    X = BandedHermitian.zeros(5, 2)
    upper = np.zeros((5, 2), dtype=complex)
    upper[:, 0] = 2.0
    upper[0, 1] = 3 + 4j
    upper[1, 1] = 1e-14
    P = normalize_phases(BandedHermitian(upper))
    assert P.upper[0, 1] == pytest.approx(0.6 + 0.8j)
    assert P.upper[1, 1] == 0
    assert np.all(P.upper[:, 0] == 1)
    assert np.all(normalize_phases(X).upper == 0)


def test_normalize_phases_rank_one():
    rng = np.random.default_rng(0)
    x = nonvanishing_signal(rng, 9)
    P = normalize_phases(BandedHermitian.from_signal(x, 3))
    u = x / np.abs(x)
    assert np.allclose(P.upper, BandedHermitian.from_signal(u, 3).upper)
    nz = P.upper != 0
    assert np.all(np.abs(np.abs(P.upper[nz]) - 1) < 1e-12)


def test_top_eigenvector_recovers_phases():
    rng = np.random.default_rng(1)
    x = nonvanishing_signal(rng, 16)
    v = top_eigenvector(normalize_phases(BandedHermitian.from_signal(x, 3)))
    assert np.linalg.norm(v) == pytest.approx(4.0)
    assert phase_error(v, x) < 1e-8


def test_top_eigenvector_constant_band():
    v = top_eigenvector(BandedHermitian.from_signal(np.ones(12), 4))
    assert np.allclose(v / v[0], 1.0)


def test_top_eigenvector_matches_dense_solver():
    rng = np.random.default_rng(2)
    d, delta = 20, 4
    x = nonvanishing_signal(rng, d)
    noise = BandedHermitian(0.05 * (rng.standard_normal((d, delta)) + 1j * rng.standard_normal((d, delta))))
    P = normalize_phases(BandedHermitian.from_signal(x, delta) + noise)
    v = top_eigenvector(P)
    ref = oracles.top_eigenvector(P.to_dense()) * np.sqrt(d)
    assert np.linalg.norm(oracles.align(v, ref) - ref) < 1e-6


def test_top_eigenvector_scale_invariance():
    rng = np.random.default_rng(3)
    x = nonvanishing_signal(rng, 15)
    P = normalize_phases(BandedHermitian.from_signal(x, 4))
    a = top_eigenvector(P)
    b = top_eigenvector(P * 2.0)
    assert np.linalg.norm(oracles.align(b, a) - a) < 1e-8


def test_top_eigenvector_global_phase_invariance():
    rng = np.random.default_rng(4)
    x = nonvanishing_signal(rng, 15)
    a = top_eigenvector(normalize_phases(BandedHermitian.from_signal(x, 4)))
    b = top_eigenvector(normalize_phases(BandedHermitian.from_signal(np.exp(1.3j) * x, 4)))
    assert np.linalg.norm(oracles.align(b, a) - a) < 1e-8


def test_no_convergence_carries_last_iterate():
    # three iterations are far too few for a random phase matrix
    rng = np.random.default_rng(5)
    P = BandedHermitian(rng.standard_normal((30, 5)) + 1j * rng.standard_normal((30, 5)))
    with pytest.raises(NoConvergence) as info:
        top_eigenvector(normalize_phases(P), max_iter=3)
    assert info.value.iterations == 3
    assert info.value.last_iterate.shape == (30,)
    assert np.linalg.norm(info.value.last_iterate) == pytest.approx(np.sqrt(30))


def test_magnitudes_diagonal():
    rng = np.random.default_rng(6)
    x = oracles.random_signal(rng, 10)
    assert np.allclose(magnitudes_diagonal(BandedHermitian.from_signal(x, 3)), np.abs(x))
    upper = np.zeros((5, 2), dtype=complex)
    upper[:, 0] = [4, -1, 1, 1, 1]
    assert np.allclose(magnitudes_diagonal(BandedHermitian(upper)), [2, 0, 1, 1, 1])


def test_magnitudes_of_identity_band():
    upper = np.zeros((6, 3), dtype=complex)
    upper[:, 0] = 1
    assert np.allclose(magnitudes_diagonal(BandedHermitian(upper)), 1)


@pytest.mark.parametrize("d,delta", [(15, 4), (64, 8)])
def test_block_magnitudes_exact_on_rank_one(d, delta):
    x = oracles.random_signal(np.random.default_rng(d), d)
    X = BandedHermitian.from_signal(x, delta)
    assert np.max(np.abs(magnitudes_block(X) - np.abs(x))) < 1e-8
    assert np.max(np.abs(magnitudes_block(X) - magnitudes_diagonal(X))) < 1e-8


def test_block_magnitudes_by_hand():
    # average over covering blocks, computed with a dense eigensolver
    rng = np.random.default_rng(7)
    d, delta = 9, 3
    X = BandedHermitian(rng.standard_normal((d, delta)) + 1j * rng.standard_normal((d, delta)))
    A = X.to_dense()
    total = np.zeros(d)
    for start in range(d):
        idx = [(start + i) % d for i in range(delta)]
        block = A[np.ix_(idx, idx)]
        v = oracles.top_eigenvector(block)
        total[idx] += np.sqrt(max(np.trace(block).real, 0)) * np.abs(v)
    assert np.allclose(magnitudes_block(X), total / delta)
    assert np.allclose(magnitudes_block(X, 1), magnitudes_diagonal(X))
    with pytest.raises(ValueError):
        magnitudes_block(X, 4)


@pytest.mark.parametrize("mode", ["block", "diagonal"])
def test_assemble_signal_noiseless(mode):
    rng = np.random.default_rng(8)
    x = nonvanishing_signal(rng, 63)
    est = assemble_signal(BandedHermitian.from_signal(x, 8), mode)
    assert oracles.relative_error(est, x) < 1e-8


def test_assemble_signal_edge_cases():
    x = np.full(7, 2.0 + 0j)
    est = assemble_signal(BandedHermitian.from_signal(x, 3))
    assert oracles.relative_error(est, x) < 1e-8
    assert np.all(assemble_signal(BandedHermitian.zeros(7, 3)) == 0)
    with pytest.raises(ValueError):
        assemble_signal(BandedHermitian.zeros(7, 3), "median")


def test_assemble_signal_lenient_mode():
    rng = np.random.default_rng(9)
    P = BandedHermitian(rng.standard_normal((30, 5)) + 1j * rng.standard_normal((30, 5)))
    with pytest.raises(NoConvergence):
        assemble_signal(P, max_iter=2)
    est = assemble_signal(P, strict=False, max_iter=2)
    assert est.shape == (30,) and np.all(np.isfinite(est))
