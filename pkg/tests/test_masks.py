import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from blockpr.core import BandedHermitian
from blockpr.masks import (
    MeasurementGrid,
    WindowSpec,
    add_noise,
    build_masks,
    empirical_snr,
    forward_measure,
    make_window,
    parse_window,
)


def test_gaussian_window_values():
    w = make_window(WindowSpec.gaussian(0.3, 8, 64, normalize=False))
    # exp(-(1 - 4.5)^2 / (2 * 0.09 * 64)) = exp(-12.25 / 11.52)
    assert w[0].real == pytest.approx(0.3452909, abs=1e-7)
    assert np.allclose(w[:8], w[7::-1])
    assert np.all(w[8:] == 0)
    assert np.allclose(w[:8], oracles.gaussian_window(8, 0.3))


def test_exponential_window_values():
    w = make_window(WindowSpec.exponential(1.0, 8, 64, normalize=False))
    assert w[0].real == pytest.approx(0.367879, abs=1e-6)
    assert np.all(np.diff(w[:8].real) < 0)
    assert np.allclose(w[:8], oracles.exponential_window(8, 1.0))


def test_normalized_window_has_unit_norm():
    for spec in (WindowSpec.gaussian(0.3, 8, 64), WindowSpec.exponential(1.0, 8, 64)):
        w = make_window(spec)
        assert np.linalg.norm(w) == pytest.approx(1.0)


def test_window_validation():
    with pytest.raises(ValueError):
        WindowSpec.gaussian(0.3, 9, 8)
    with pytest.raises(ValueError):
        WindowSpec.gaussian(-1.0, 4, 8)
    with pytest.raises(ValueError):
        WindowSpec("custom", 3, 8, values=(1, 2))
    with pytest.raises(ValueError):
        parse_window("boxcar:1", 4, 8)
    assert parse_window("exp:1.0", 4, 8) == WindowSpec.exponential(1.0, 4, 8)
    assert parse_window("gaussian:0.3", 4, 8) == WindowSpec.gaussian(0.3, 4, 8)


def test_masks_formula():
    delta, d = 4, 9
    spec = WindowSpec.gaussian(0.3, delta, d)
    masks = build_masks(spec)
    w = make_window(spec)
    K = 2 * delta - 1
    assert masks.masks.shape == (K, d)
    assert np.all(masks.masks[:, delta:] == 0)
    assert np.allclose(masks.masks[0, :delta], K ** (-0.25) * np.conj(w[:delta]))
    norms = np.linalg.norm(masks.masks, axis=1)
    assert np.allclose(norms, norms[0])
    assert np.allclose(masks.masks[:, :delta], oracles.masks(w[:delta]))


def test_mask_delta_two():
    w = np.array([0.7, 0.2 + 0.1j])
    m = build_masks(WindowSpec.custom(w, 5)).masks
    expected = 3 ** (-0.25) * np.array([np.conj(w[0]), np.conj(w[1]) * np.exp(2j * np.pi / 3), 0, 0, 0])
    assert np.allclose(m[1], expected)


def test_measure_zero_signal():
    masks = build_masks(WindowSpec.gaussian(0.3, 3, 8))
    assert np.all(forward_measure(np.zeros(8), masks).values == 0)


def test_measure_global_phase_invariance():
    rng = np.random.default_rng(0)
    x = oracles.random_signal(rng, 8)
    masks = build_masks(WindowSpec.gaussian(0.3, 3, 8))
    a = forward_measure(x, masks).values
    b = forward_measure(np.exp(0.7j) * x, masks).values
    assert np.allclose(a, b)


@pytest.mark.parametrize("d,delta", [(6, 2), (8, 3), (10, 4)])
def test_measure_matches_lifted_oracle(d, delta):
    rng = np.random.default_rng(d)
    spec = WindowSpec.gaussian(0.3, delta, d)
    w = make_window(spec)[:delta]
    masks = build_masks(spec)
    for _ in range(20):
        x = oracles.random_signal(rng, d)
        y = forward_measure(x, masks).values
        X0 = BandedHermitian.from_signal(x, delta).to_dense()
        assert np.max(np.abs(y - oracles.lifted_measure(X0, w))) < 1e-10
        assert np.max(np.abs(y - oracles.measure(x, w))) < 1e-10
        assert np.all(y >= 0)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25)
def test_measure_complex_window(seed):
    rng = np.random.default_rng(seed)
    d, delta = 7, 3
    w = oracles.random_signal(rng, delta)
    x = oracles.random_signal(rng, d)
    y = forward_measure(x, build_masks(WindowSpec.custom(w, d))).values
    assert np.allclose(y, oracles.measure(x, w))


def test_noise_infinite_snr_is_identity():
    y = MeasurementGrid(np.ones((4, 3)))
    assert add_noise(y, float("inf"), 1) is y


def test_noise_is_deterministic():
    y = MeasurementGrid(np.arange(12.0).reshape(4, 3))
    a, b = add_noise(y, 20, 7), add_noise(y, 20, 7)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, add_noise(y, 20, 8).values)


def test_noise_reaches_target_snr():
    rng = np.random.default_rng(1)
    clean = MeasurementGrid(rng.random((20000, 5)))
    noisy = add_noise(clean, 20.0, 2)
    assert abs(empirical_snr(clean, noisy) - 20.0) < 0.2


def test_noise_on_zero_measurements_rejected():
    with pytest.raises(ValueError):
        add_noise(MeasurementGrid(np.zeros((3, 3))), 10, 0)


def test_grid_csv_round_trip():
    rng = np.random.default_rng(3)
    grid = MeasurementGrid(rng.random((5, 3)) * 1e-3)
    text = grid.to_csv()
    assert text.splitlines()[0] == "shift,freq,value"
    assert text.splitlines()[1].startswith("0,1,")
    assert np.array_equal(MeasurementGrid.from_csv(text).values, grid.values)


def test_grid_rejects_non_finite():
    with pytest.raises(ValueError):
        MeasurementGrid(np.array([[np.nan]]))
