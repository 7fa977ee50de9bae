"""Windows, masks, the forward measurement map and additive noise."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .core import as_signal

__all__ = [
    "WindowSpec",
    "make_window",
    "parse_window",
    "MaskSet",
    "build_masks",
    "MeasurementGrid",
    "forward_measure",
    "add_noise",
    "empirical_snr",
]


@dataclass(frozen=True)
class WindowSpec:
    """Description of a window supported on its first ``delta`` entries.

    Parameters
    ----------
    kind : {"gaussian", "exponential", "custom"}
    delta : int
        Support size.
    d : int
        Ambient dimension.
    param : float, optional
        ``sigma`` for the Gaussian window, ``a`` for the exponential one.
    values : tuple of complex, optional
        The ``delta`` window values for ``kind="custom"``.
    normalize : bool
        Scale the window to unit l2 norm. The largest singular value of the
        lifted measurement matrix equals ``||w||^2``, so this makes truncation
        thresholds relative to it.
    """

    kind: str
    delta: int
    d: int
    param: float | None = None
    values: tuple = field(default=())
    normalize: bool = True

    def __post_init__(self):
        if self.kind not in ("gaussian", "exponential", "custom"):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if self.delta < 1:
            raise ValueError("delta must be positive")
        if self.delta > self.d:
            raise ValueError(f"support delta={self.delta} exceeds dimension d={self.d}")
        if self.kind == "custom":
            if len(self.values) != self.delta:
                raise ValueError("custom window needs exactly delta values")
        elif self.param is None or not self.param > 0:
            raise ValueError(f"{self.kind} window needs a positive parameter")

    @classmethod
    def gaussian(cls, sigma: float, delta: int, d: int, normalize: bool = True) -> "WindowSpec":
        return cls("gaussian", delta, d, param=float(sigma), normalize=normalize)

    @classmethod
    def exponential(cls, a: float, delta: int, d: int, normalize: bool = True) -> "WindowSpec":
        return cls("exponential", delta, d, param=float(a), normalize=normalize)

    @classmethod
    def custom(cls, values, d: int, normalize: bool = False) -> "WindowSpec":
        values = tuple(complex(v) for v in values)
        return cls("custom", len(values), d, values=values, normalize=normalize)


def parse_window(text: str, delta: int, d: int) -> WindowSpec:
    """Parse ``"gaussian:0.3"`` or ``"exp:1.0"`` into a :class:`WindowSpec`."""
    kind, _, value = text.partition(":")
    kind = kind.strip().lower()
    try:
        param = float(value)
    except ValueError:
        raise ValueError(f"bad window parameter in {text!r}") from None
    if kind in ("gaussian", "gauss"):
        return WindowSpec.gaussian(param, delta, d)
    if kind in ("exp", "exponential"):
        return WindowSpec.exponential(param, delta, d)
    raise ValueError(f"unknown window kind in {text!r}")


def make_window(spec: WindowSpec) -> np.ndarray:
    """Length-``d`` window, zero outside its support ``[1..delta]``."""
    delta = spec.delta
    n = np.arange(1, delta + 1, dtype=float)
    if spec.kind == "gaussian":
        sigma = spec.param
        head = np.exp(-((n - (delta + 1) / 2) ** 2) / (2 * sigma**2 * delta**2))
    elif spec.kind == "exponential":
        head = np.exp(-n / spec.param)
    else:
        head = np.asarray(spec.values, dtype=np.complex128)
    head = head.astype(np.complex128)
    if spec.normalize:
        nrm = np.linalg.norm(head)
        if nrm == 0:
            raise ValueError("cannot normalize an all-zero window")
        head = head / nrm
    w = np.zeros(spec.d, dtype=np.complex128)
    w[:delta] = head
    return w


@dataclass(frozen=True)
class MaskSet:
    """The ``2*delta - 1`` masks as rows of a ``(K, d)`` array."""

    masks: np.ndarray
    window: WindowSpec

    @property
    def d(self) -> int:
        return self.window.d

    @property
    def delta(self) -> int:
        return self.window.delta

    @property
    def K(self) -> int:
        return 2 * self.window.delta - 1

    def window_values(self) -> np.ndarray:
        return make_window(self.window)


def build_masks(window: WindowSpec) -> MaskSet:
    """Frequency-subsampled masks ``m_j = (2 delta - 1)^{-1/4} conj(w) * phase ramp``."""
    w = make_window(window)
    delta, d = window.delta, window.d
    K = 2 * delta - 1
    n = np.arange(delta)
    j = np.arange(K)
    ramp = np.exp(2j * np.pi * np.outer(j, n) / K)
    masks = np.zeros((K, d), dtype=np.complex128)
    masks[:, :delta] = K ** (-0.25) * np.conj(w[:delta])[None, :] * ramp
    masks.flags.writeable = False
    return MaskSet(masks, window)


@dataclass(frozen=True)
class MeasurementGrid:
    """Intensities ``values[l, j]`` for shift ``l`` in ``[0, d)`` and frequency ``j`` in ``[0, K)``."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2:
            raise ValueError("measurement grid must be two-dimensional")
        if not np.all(np.isfinite(values)):
            raise ValueError("measurement grid contains non-finite values")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @property
    def K(self) -> int:
        return self.values.shape[1]

    def to_csv(self) -> str:
        """CSV text with header ``shift,freq,value``; ``freq`` is 1-based."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["shift", "freq", "value"])
        for l in range(self.d):
            for j in range(self.K):
                writer.writerow([l, j + 1, repr(float(self.values[l, j]))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "MeasurementGrid":
        rows = list(csv.DictReader(io.StringIO(text)))
        d = max(int(r["shift"]) for r in rows) + 1
        K = max(int(r["freq"]) for r in rows)
        values = np.zeros((d, K))
        for r in rows:
            values[int(r["shift"]), int(r["freq"]) - 1] = float(r["value"])
        return cls(values)


def _windowed_patches(x: np.ndarray, delta: int) -> np.ndarray:
    d = x.shape[0]
    idx = (np.arange(d)[:, None] + np.arange(delta)[None, :]) % d
    return x[idx]


def forward_measure(x, masks: MaskSet) -> MeasurementGrid:
    """Noiseless intensities ``|<S_l x, m_j>|^2`` for every shift and mask."""
    x = as_signal(x, masks.d)
    patches = _windowed_patches(x, masks.delta)
    amplitudes = patches @ np.conj(masks.masks[:, : masks.delta]).T
    return MeasurementGrid(np.abs(amplitudes) ** 2)


def add_noise(y: MeasurementGrid, snr_db: float, rng_seed=None) -> MeasurementGrid:
    """Add real white Gaussian noise at the requested SNR (dB).

    The noise variance is ``sum(y**2) / (y.size * 10**(snr_db/10))``; an
    infinite SNR returns ``y`` unchanged.
    """
    snr_db = float(snr_db)
    if not np.isfinite(snr_db):
        return y
    energy = float(np.sum(y.values**2))
    if energy == 0:
        raise ValueError("cannot set a finite SNR for all-zero measurements")
    variance = energy / (y.values.size * 10 ** (snr_db / 10))
    rng = np.random.default_rng(rng_seed)
    noise = rng.normal(0.0, np.sqrt(variance), size=y.values.shape)
    return MeasurementGrid(y.values + noise)


def empirical_snr(clean: MeasurementGrid, noisy: MeasurementGrid) -> float:
    """SNR in dB of ``noisy`` relative to ``clean``, with the sample noise variance."""
    noise = noisy.values - clean.values
    return 10 * np.log10(np.mean(clean.values**2) / np.mean(noise**2))
