import math

import numpy as np
import pytest

import oracles
from blockpr.experiments import (
    ConfigError,
    ExperimentConfig,
    SweepResult,
    parse_config,
    parse_number,
    random_signal,
    recover,
    relative_error,
    run_blockpr,
    run_blockpr_sc,
    run_sweep,
    run_wirtinger_flow,
    write_csv,
)
from blockpr.masks import MeasurementGrid, WindowSpec, build_masks, forward_measure
from blockpr.spectral import block_svd


def setup(d, delta, window=None):
    spec = window or WindowSpec.gaussian(0.3, delta, d)
    return build_masks(spec), block_svd(spec)


def test_random_signal_statistics():
    x = random_signal(200000, 0)
    assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0, abs=0.01)
    assert np.var(x.real) == pytest.approx(0.5, abs=0.01)
    assert np.var(x.imag) == pytest.approx(0.5, abs=0.01)
    assert np.array_equal(random_signal(8, 3), random_signal(8, 3))


def test_relative_error():
    rng = np.random.default_rng(0)
    x0 = oracles.random_signal(rng, 10)
    assert relative_error(np.exp(2.1j) * x0, x0) == pytest.approx(0, abs=1e-14)
    x = oracles.random_signal(rng, 10)
    assert relative_error(x, x0) == pytest.approx(oracles.relative_error(x, x0))
    phases = np.exp(1j * np.linspace(0, 2 * np.pi, 20001))
    brute = min(np.linalg.norm(x - p * x0) for p in phases) / np.linalg.norm(x0)
    assert relative_error(x, x0) == pytest.approx(brute, abs=1e-6)
    with pytest.raises(ValueError):
        relative_error(x, np.zeros(10))


def test_pipelines_on_zero_measurements():
    masks, svd = setup(16, 4)
    y = MeasurementGrid(np.zeros((16, 7)))
    assert np.all(run_blockpr(y, svd) == 0)
    assert np.all(run_blockpr_sc(y, svd) == 0)
    assert np.all(run_wirtinger_flow(y, masks) == 0)


def test_blockpr_even_dimension_needs_completion():
    masks, svd = setup(64, 8)
    x0 = random_signal(64, 1)
    y = forward_measure(x0, masks)
    assert relative_error(run_blockpr_sc(y, svd), x0) < 1e-6
    assert relative_error(run_blockpr(y, svd), x0) > 0.1


def test_blockpr_pseudo_inverse_option():
    masks, svd = setup(64, 8)
    x0 = random_signal(64, 2)
    y = forward_measure(x0, masks)
    assert relative_error(run_blockpr(y, svd, inverse="pseudo"), x0) > 1e-3
    with pytest.raises(ValueError):
        run_blockpr(y, svd, inverse="exact")


@pytest.mark.parametrize("d", [15, 16, 63, 64])
def test_noiseless_reconstruction(d):
    masks, svd = setup(d, 4 if d < 32 else 8)
    errors = []
    for seed in range(100):
        x0 = random_signal(d, seed)
        errors.append(relative_error(run_blockpr_sc(forward_measure(x0, masks), svd), x0))
    assert max(errors) < 1e-8


def test_completion_info():
    masks, svd = setup(64, 8)
    x, info = run_blockpr_sc(forward_measure(random_signal(64, 3), masks), svd, return_info=True)
    assert info.assumptions_hold and x.shape == (64,)


def test_wirtinger_flow_easy_instance():
    masks, _ = setup(16, 4)
    x0 = random_signal(16, 4)
    y = forward_measure(x0, masks)
    x = run_wirtinger_flow(y, masks, rng_seed=7)
    assert relative_error(x, x0) < 1e-3
    assert np.array_equal(x, run_wirtinger_flow(y, masks, rng_seed=7))


def test_recover_report():
    report = recover(64, 8, epsilon=0.0, seed=5)
    assert report.error < 1e-6 and report.complete
    plain = recover(64, 8, algorithm="blockpr", seed=5)
    assert plain.error > 0.1 and not plain.complete
    assert not recover(64, 8, epsilon=0.1, snr_db=30, seed=5).complete
    with pytest.raises(ConfigError):
        recover(64, 8, algorithm="pie")


# configuration ---------------------------------------------------------------------------


def test_parse_number():
    assert parse_number("10^-2.5") == pytest.approx(10**-2.5)
    assert parse_number("inf") == math.inf
    assert parse_number(" 1e-4 ") == 1e-4
    assert parse_number(3) == 3.0


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(4, 3)
    with pytest.raises(ConfigError):
        ExperimentConfig(16, 4, trials=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(16, 4, epsilons=(-1.0,))
    with pytest.raises(ConfigError):
        ExperimentConfig(16, 4, algorithms=("gerchberg_saxton",))
    with pytest.raises(ConfigError):
        ExperimentConfig(16, 4, window="boxcar:1")
    with pytest.raises(ConfigError):
        ExperimentConfig(16, 4, magnitude_mode="median")


def test_parse_config():
    text = """
    # sweep over two thresholds
    d = 32
    delta = 4
    window = exp:1.0
    epsilons = 0, 10^-2.5
    snr_db = 20, inf
    trials = 5
    algorithms = blockpr_sc, wirtinger_flow
    """
    config = parse_config(text)
    assert config.d == 32 and config.delta == 4 and config.window == "exp:1.0"
    assert config.epsilons == (0.0, pytest.approx(10**-2.5))
    assert config.snr_db == (20.0, math.inf)
    assert config.algorithms == ("blockpr_sc", "wirtinger_flow")
    for bad in ("d = 32", "d = 32\ndelta = 4\ncolour = red", "d = x\ndelta = 4", "d 32\ndelta = 4"):
        with pytest.raises(ConfigError):
            parse_config(bad)


# sweeps -------------------------------------------------------------------------------------


def small_config(**kw):
    base = dict(
        d=16,
        delta=4,
        epsilons=(0.0, 1e-2),
        snr_db=(30.0, math.inf),
        trials=3,
        seed=11,
        algorithms=("blockpr", "blockpr_sc", "wirtinger_flow"),
        wf_iterations=200,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_sweep_rows_and_order():
    result = run_sweep(small_config())
    keys = [(r.algorithm, r.epsilon, r.snr) for r in result.rows]
    assert len(keys) == 2 * 2 * 2 + 2
    assert keys[0] == ("blockpr", 0.0, 30.0)
    assert keys[-1][0] == "wirtinger_flow" and math.isnan(keys[-1][1])
    assert all(r.trials == 3 and r.mean_error >= 0 for r in result.rows)
    assert result.lookup("blockpr_sc", 0.0, math.inf) < 1e-6
    with pytest.raises(KeyError):
        result.lookup("blockpr", 0.5, 30.0)


def test_sweep_is_deterministic_and_order_independent(tmp_path):
    a = run_sweep(small_config())
    b = run_sweep(small_config(workers=2))
    assert a.to_csv() == b.to_csv()
    # rows do not depend on which other cells are in the sweep
    c = run_sweep(small_config(algorithms=("blockpr_sc",), snr_db=(30.0,)))
    assert c.lookup("blockpr_sc", 0.0, 30.0) == a.lookup("blockpr_sc", 0.0, 30.0)
    path = tmp_path / "out.csv"
    write_csv(a, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "algorithm,epsilon,snr,mean_error,trials"
    assert any(",inf," in line for line in lines)
    assert any(line.startswith("wirtinger_flow,nan,") for line in lines)


def test_sweep_result_csv_empty():
    assert SweepResult().to_csv() == "algorithm,epsilon,snr,mean_error,trials\n"
