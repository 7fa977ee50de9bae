"""Reconstruction pipelines, the Wirtinger Flow baseline and Monte Carlo sweeps."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .completion import complete, extract_known_coefficients
from .core import as_signal
from .masks import MaskSet, MeasurementGrid, WindowSpec, add_noise, build_masks, forward_measure, parse_window
from .spectral import BlockSVD, apply_regularized_inverse, block_svd, lost_indices
from .sync import assemble_signal

__all__ = [
    "ALGORITHMS",
    "ConfigError",
    "ExperimentConfig",
    "SweepRow",
    "SweepResult",
    "random_signal",
    "relative_error",
    "run_blockpr",
    "run_blockpr_sc",
    "run_wirtinger_flow",
    "RecoveryReport",
    "recover",
    "run_sweep",
    "write_csv",
    "load_config",
    "parse_config",
    "parse_number",
]

log = logging.getLogger(__name__)

ALGORITHMS = ("blockpr", "blockpr_sc", "wirtinger_flow")


class ConfigError(ValueError):
    pass


def parse_number(text) -> float:
    """Parse a float, ``inf``, or a power of ten written ``10^-2.5``."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().lower()
    if s.startswith("10^"):
        return 10.0 ** float(s[3:])
    return float(s)


def _format_number(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


@dataclass(frozen=True)
class ExperimentConfig:
    d: int
    delta: int
    window: str = "gaussian:0.3"
    epsilons: tuple = (0.0,)
    snr_db: tuple = (math.inf,)
    trials: int = 100
    seed: int = 0
    algorithms: tuple = ("blockpr", "blockpr_sc")
    magnitude_mode: str = "block"
    wf_iterations: int = 2500
    wf_tau0: float = 330.0
    wf_mu_max: float = 0.4
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.d < 2 * self.delta - 1:
            raise ConfigError("need d >= 2*delta - 1")
        if any(e < 0 for e in self.epsilons):
            raise ConfigError("epsilon values must be nonnegative")
        bad = set(self.algorithms) - set(ALGORITHMS)
        if bad:
            raise ConfigError(f"unknown algorithms: {sorted(bad)}")
        if self.magnitude_mode not in ("block", "diagonal"):
            raise ConfigError(f"unknown magnitude mode {self.magnitude_mode!r}")
        try:
            self.window_spec()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def window_spec(self) -> WindowSpec:
        return parse_window(self.window, self.delta, self.d)


@dataclass(frozen=True)
class SweepRow:
    algorithm: str
    epsilon: float
    snr: float
    mean_error: float
    trials: int


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)

    def lookup(self, algorithm: str, epsilon: float, snr: float) -> float:
        for row in self.rows:
            if row.algorithm == algorithm and row.snr == snr and (
                row.epsilon == epsilon or (math.isnan(row.epsilon) and math.isnan(epsilon))
            ):
                return row.mean_error
        raise KeyError((algorithm, epsilon, snr))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["algorithm", "epsilon", "snr", "mean_error", "trials"])
        for row in self.rows:
            writer.writerow(
                [row.algorithm, _format_number(row.epsilon), _format_number(row.snr), repr(row.mean_error), row.trials]
            )
        return buf.getvalue()


def random_signal(d: int, rng_seed=None) -> np.ndarray:
    """Complex Gaussian vector with unit variance per entry."""
    rng = np.random.default_rng(rng_seed)
    return (rng.standard_normal(d) + 1j * rng.standard_normal(d)) / np.sqrt(2)


def relative_error(x, x0) -> float:
    """``min_theta ||x - e^{i theta} x0|| / ||x0||``."""
    x = np.asarray(x, dtype=np.complex128)
    x0 = np.asarray(x0, dtype=np.complex128)
    ref = np.linalg.norm(x0)
    if ref == 0:
        raise ValueError("reference signal is zero")
    inner = np.vdot(x0, x)
    phase = inner / abs(inner) if inner != 0 else 1.0
    return float(np.linalg.norm(x - phase * x0) / ref)


def run_blockpr(
    y: MeasurementGrid, svd: BlockSVD, magnitude_mode: str = "block", strict: bool = True, inverse: str = "direct"
) -> np.ndarray:
    """Inversion followed by angular synchronization, without completion.

    For ``epsilon > 0`` the truncated inverse is used. At ``epsilon = 0``,
    ``inverse="direct"`` divides by every nonzero singular value as the plain
    inverse of ``M`` does, while ``inverse="pseudo"`` drops numerically zero
    ones (Moore-Penrose).
    """
    if inverse not in ("direct", "pseudo"):
        raise ValueError(f"unknown inverse {inverse!r}")
    if inverse == "direct" and svd.epsilon == 0:
        svd = svd.untruncated()
    X = apply_regularized_inverse(svd, y)
    return assemble_signal(X, magnitude_mode, strict=strict)


def run_blockpr_sc(
    y: MeasurementGrid, svd: BlockSVD, magnitude_mode: str = "block", strict: bool = True, return_info: bool = False
):
    """Truncated inverse, subspace completion, then angular synchronization.

    With ``return_info`` the completion result is returned alongside the signal.
    """
    X_S = apply_regularized_inverse(svd, y)
    problem = extract_known_coefficients(X_S, lost_indices(svd), svd)
    result = complete(problem)
    x = assemble_signal(result.matrix(), magnitude_mode, strict=strict)
    return (x, result) if return_info else x


def _measurement_operator(masks: MaskSet):
    d, delta = masks.d, masks.delta
    conj_heads = np.conj(masks.masks[:, :delta])
    idx = (np.arange(d)[:, None] + np.arange(delta)[None, :]) % d

    def forward(x):
        return x[idx] @ conj_heads.T

    def adjoint(r):
        # sum over (l, j) of r[l, j] * S_l^* m_j
        contrib = r @ masks.masks[:, :delta]
        out = np.zeros(d, dtype=np.complex128)
        np.add.at(out, idx.ravel(), contrib.ravel())
        return out

    return forward, adjoint


def run_wirtinger_flow(
    y: MeasurementGrid,
    masks: MaskSet,
    iterations: int = 2500,
    tau0: float = 330.0,
    mu_max: float = 0.4,
    power_iterations: int = 100,
    rng_seed=0,
) -> np.ndarray:
    """Wirtinger Flow with spectral initialization for the ptychographic measurements.

    The start is the top eigenvector of ``Y = sum y_i a_i a_i^*`` scaled to
    ``lambda^2 = d sum(y) / sum ||a_i||^2``. Gradient steps on
    ``(1/4) sum (|a^* z|^2 - y)^2`` use ``min(1 - exp(-t/tau0), mu_max)``
    relative to the curvature scale ``lambda_max(Y) / ||z_0||^2``; for an
    isotropic Gaussian ensemble this is the usual ``mu / ||z_0||^2`` rule.
    Returns the iterate with the smallest loss.
    """
    values = np.asarray(y.values, dtype=float)
    forward, adjoint = _measurement_operator(masks)
    d = masks.d
    # sum of ||a_{l,j}||^2 over all measurement vectors
    total_norm = d * float(np.sum(np.abs(masks.masks) ** 2))
    lam2 = d * float(values.sum()) / total_norm
    if lam2 <= 0:
        return np.zeros(d, dtype=np.complex128)

    rng = np.random.default_rng(rng_seed)
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    z /= np.linalg.norm(z)
    top = 0.0
    for _ in range(power_iterations):
        z = adjoint(values * forward(z))
        top = np.linalg.norm(z)
        if top == 0:
            return np.zeros(d, dtype=np.complex128)
        z /= top
    z = np.sqrt(lam2) * z

    def loss(u):
        return 0.25 * float(np.sum((np.abs(forward(u)) ** 2 - values) ** 2))

    best, best_loss = z.copy(), loss(z)
    for t in range(1, iterations + 1):
        Az = forward(z)
        grad = adjoint((np.abs(Az) ** 2 - values) * Az)
        mu = min(1.0 - math.exp(-t / tau0), mu_max)
        z = z - (mu / top) * grad
        current = loss(z)
        if not np.isfinite(current):
            break
        if current < best_loss:
            best, best_loss = z.copy(), current
    return best


@dataclass(frozen=True)
class RecoveryReport:
    """Outcome of a single reconstruction.

    ``complete`` is True when no Fourier coefficient of the diagonals is left
    unrecovered: nothing was discarded by the inverse, or completion filled
    every gap.
    """

    error: float
    complete: bool
    signal: np.ndarray
    truth: np.ndarray


def recover(
    d: int,
    delta: int,
    window: str = "gaussian:0.3",
    epsilon: float = 0.0,
    snr_db: float = math.inf,
    seed: int = 0,
    algorithm: str = "blockpr_sc",
    magnitude_mode: str = "block",
) -> RecoveryReport:
    """Reconstruct one random signal; raises :class:`NoConvergence` on a stalled eigensolver."""
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algorithm!r}")
    config = ExperimentConfig(d, delta, window, (float(epsilon),), (float(snr_db),), 1, seed, (algorithm,), magnitude_mode)
    masks = build_masks(config.window_spec())
    x0 = random_signal(d, _seed(seed, 0, 0))
    y = add_noise(forward_measure(x0, masks), snr_db, _seed(seed, 0, 1, 0))
    svd = block_svd(config.window_spec(), float(epsilon))
    if algorithm == "wirtinger_flow":
        x = run_wirtinger_flow(y, masks, rng_seed=_seed(seed, 0, 2))
        complete_flag = True
    elif algorithm == "blockpr":
        x = run_blockpr(y, svd, magnitude_mode)
        # numerically zero singular values count as lost even when divided by
        complete_flag = len(lost_indices(svd)) == 0
    else:
        x, info = run_blockpr_sc(y, svd, magnitude_mode, return_info=True)
        missing = int(lost_indices(svd).mask[:, :delta].sum())
        complete_flag = len(info.residuals) == missing
    return RecoveryReport(relative_error(x, x0), bool(complete_flag), x, x0)


# sweeps ---------------------------------------------------------------------


def _seed(master: int, *keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=master, spawn_key=tuple(keys))


def _trial(args):
    config, trial, snr_index, svds = args
    window = config.window_spec()
    masks = build_masks(window)
    x0 = random_signal(config.d, _seed(config.seed, trial, 0))
    clean = forward_measure(x0, masks)
    y = add_noise(clean, config.snr_db[snr_index], _seed(config.seed, trial, 1, snr_index))
    errors = {}
    for algorithm in config.algorithms:
        if algorithm == "wirtinger_flow":
            x = run_wirtinger_flow(
                y, masks, config.wf_iterations, config.wf_tau0, config.wf_mu_max, rng_seed=_seed(config.seed, trial, 2)
            )
            # keyed by None: nan keys never compare equal once pickled
            errors[(algorithm, None)] = relative_error(x, x0)
            continue
        for epsilon, svd in zip(config.epsilons, svds):
            runner = run_blockpr if algorithm == "blockpr" else run_blockpr_sc
            x = runner(y, svd, config.magnitude_mode, strict=False)
            errors[(algorithm, epsilon)] = relative_error(x, x0)
    return snr_index, errors


def run_sweep(config: ExperimentConfig) -> SweepResult:
    """Mean relative error for every (algorithm, epsilon, snr) cell.

    Signals depend only on the trial index and noise only on (trial, snr), so
    all algorithms and thresholds see identical data.
    """
    window = config.window_spec()
    base = block_svd(window, 0.0)
    svds = [base.with_epsilon(e) for e in config.epsilons]
    jobs = [(config, t, s, svds) for s in range(len(config.snr_db)) for t in range(config.trials)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outputs = list(pool.map(_trial, jobs, chunksize=max(1, len(jobs) // (4 * config.workers))))
    else:
        outputs = [_trial(job) for job in jobs]

    sums: dict = {}
    for snr_index, errors in outputs:
        for (algorithm, epsilon), err in errors.items():
            key = (algorithm, epsilon, snr_index)
            sums.setdefault(key, []).append(err)

    rows = []
    for (algorithm, epsilon, snr_index), errs in sums.items():
        eps = math.nan if epsilon is None else epsilon
        rows.append(SweepRow(algorithm, eps, float(config.snr_db[snr_index]), float(np.mean(errs)), len(errs)))
    order = {a: i for i, a in enumerate(ALGORITHMS)}
    rows.sort(key=lambda r: (order[r.algorithm], -1.0 if math.isnan(r.epsilon) else r.epsilon, r.snr))
    return SweepResult(rows)


def write_csv(result: SweepResult, path) -> None:
    Path(path).write_text(result.to_csv())


_LIST_FIELDS = {"epsilons": parse_number, "snr_db": parse_number, "algorithms": str}
_SCALAR_FIELDS = {
    "d": int,
    "delta": int,
    "window": str,
    "trials": int,
    "seed": int,
    "magnitude_mode": str,
    "wf_iterations": int,
    "wf_tau0": float,
    "wf_mu_max": float,
    "workers": int,
}


def load_config(path) -> ExperimentConfig:
    """Read a config file, see :func:`parse_config`."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)


def parse_config(text: str) -> ExperimentConfig:
    """Parse flat ``key = value`` lines; list values are comma separated, ``#`` starts a comment."""
    values = {}
    known = {f.name for f in fields(ExperimentConfig)}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in known:
            raise ConfigError(f"line {lineno}: unrecognised entry {raw.strip()!r}")
        try:
            if key in _LIST_FIELDS:
                conv = _LIST_FIELDS[key]
                values[key] = tuple(conv(v.strip()) for v in value.split(",") if v.strip())
            else:
                values[key] = _SCALAR_FIELDS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    for required in ("d", "delta"):
        if required not in values:
            raise ConfigError(f"missing required key {required!r}")
    return ExperimentConfig(**values)
