"""Convolutional reconstruction from quantized streams, error measurement and rate fits.

The reconstruction is ``x~(t) = (1/lam) sum_n q_n phi(t - n/lam)`` over the
stream window.  Sup norms are taken on the lattice ``m / (s lam)`` (by default
``s = 8``, i.e. a grid step of ``1/(8 lam)``), where the sum is a discrete
convolution, and then refined locally around the worst lattice point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.signal import fftconvolve

from .errors import DomainError
from .io import write_csv
from .kernels import Kernel, compute_T0
from .quantizers import QuantizedStream, make_alphabet, pcm_encode, sigma_delta_encode
from .signals import BandlimitedSignal, eval_signal, random_bandlimited, sample_signal

__all__ = [
    "Encoder",
    "DecayCurve",
    "Fit",
    "TruncationCheck",
    "reconstruct_at",
    "reconstruct_lattice",
    "sup_error",
    "positive_time_error",
    "truncated_deviation",
    "padded_window",
    "decay_experiment",
    "fit_rate",
    "seeded_ensemble",
    "write_decay_curve",
    "write_fit",
]

_CHUNK = 1 << 22


def reconstruct_at(stream: QuantizedStream, kernel: Kernel, t):
    """Direct evaluation of the finite reconstruction sum at scalar or array ``t``."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros_like(t_arr)
    if len(stream):
        nodes = stream.indices / stream.lam
        q = np.asarray(stream.values, dtype=float)
        rows = max(1, _CHUNK // max(1, len(q)))
        for a in range(0, len(t_arr), rows):
            tt = t_arr[a : a + rows]
            out[a : a + rows] = kernel.evaluate(tt[:, None] - nodes[None, :]) @ q / stream.lam
    if np.ndim(t) == 0:
        return float(out[0])
    return out


def reconstruct_lattice(stream: QuantizedStream, kernel: Kernel, m_range: tuple[int, int], oversample: int = 8):
    """Reconstruction at ``t_m = m / (oversample * lam)`` for ``m`` in ``m_range`` (inclusive).

    Evaluated as a single FFT convolution of the zero-stuffed stream with the
    kernel sampled on the same lattice.
    """
    s = int(oversample)
    lam = stream.lam
    m_lo, m_hi = map(int, m_range)
    t = np.arange(m_lo, m_hi + 1) / (s * lam)
    if m_hi < m_lo:
        return t, np.zeros(0)
    if not len(stream):
        return t, np.zeros_like(t)
    n_min, n_max = stream.window
    d_lo, d_hi = m_lo - s * n_max, m_hi - s * n_min
    if kernel.compact:
        reach = int(math.ceil(kernel.support_radius * s * lam)) + 1
        d_lo, d_hi = max(d_lo, -reach), min(d_hi, reach)
    if d_hi < d_lo:
        return t, np.zeros_like(t)
    taps = kernel.evaluate(np.arange(d_lo, d_hi + 1) / (s * lam))
    up = np.zeros(s * (len(stream) - 1) + 1)
    up[::s] = stream.values
    conv = fftconvolve(up, taps) if len(up) * len(taps) > 4096 else np.convolve(up, taps)
    idx = np.arange(m_lo, m_hi + 1) - d_lo - s * n_min
    valid = (idx >= 0) & (idx < len(conv))
    vals = np.zeros_like(t)
    vals[valid] = conv[idx[valid]] / lam
    return t, vals


def _lattice_step(lam: float, grid_step: float | None) -> int:
    if grid_step is None:
        return 8
    if not grid_step > 0:
        raise DomainError("grid_step must be positive")
    return max(1, int(round(1.0 / (grid_step * lam))))


def sup_error(
    x: BandlimitedSignal,
    stream: QuantizedStream,
    kernel: Kernel,
    interval: tuple[float, float],
    grid_step: float | None = None,
    time_floor: float | None = None,
    refine: bool = True,
) -> float:
    """``max |x(t) - x~(t)|`` over ``interval`` (restricted to ``t >= time_floor`` if given).

    ``grid_step`` is rounded to the nearest ``1/(s lam)`` with integer ``s``;
    the default is ``1/(8 lam)``.
    """
    t0, t1 = map(float, interval)
    if time_floor is not None:
        t0 = max(t0, float(time_floor))
    if not t1 >= t0:
        raise DomainError(f"empty effective interval [{t0}, {t1}]")
    lam = stream.lam
    s = _lattice_step(lam, grid_step)
    m_lo, m_hi = int(math.ceil(t0 * s * lam - 1e-9)), int(math.floor(t1 * s * lam + 1e-9))
    t, approx = reconstruct_lattice(stream, kernel, (m_lo, m_hi), s)
    inside = (t >= t0) & (t <= t1)
    t, approx = t[inside], approx[inside]
    ends = np.array([t0, t1])
    t = np.concatenate([t, ends])
    approx = np.concatenate([approx, reconstruct_at(stream, kernel, ends)])
    err = np.abs(eval_signal(x, t) - approx)
    i = int(np.argmax(err))
    best = float(err[i])
    if refine and t1 > t0:
        h = 1.0 / (s * lam)
        lo, hi = max(t0, t[i] - h), min(t1, t[i] + h)
        if hi > lo:
            res = minimize_scalar(
                lambda u: -abs(eval_signal(x, u) - reconstruct_at(stream, kernel, u)),
                bounds=(lo, hi),
                method="bounded",
                options={"xatol": h * 1e-4},
            )
            best = max(best, -float(res.fun))
    return best


def positive_time_error(
    x: BandlimitedSignal,
    stream: QuantizedStream,
    kernel: Kernel,
    t_end: float,
    time_floor: float,
    grid_step: float | None = None,
) -> float:
    """Error of the reconstruction built from samples ``n >= 0`` only, assessed for ``t >= time_floor``."""
    if time_floor > t_end:
        raise DomainError("time_floor lies beyond the end of the interval")
    return sup_error(x, stream.restrict(0, stream.window[1]), kernel, (0.0, t_end), grid_step, time_floor)


def padded_window(interval: tuple[float, float], lam: float, margin: float) -> tuple[int, int]:
    """Indices ``n`` with ``n / lam`` in the interval padded by ``margin`` on both sides."""
    t0, t1 = interval
    return (int(math.ceil(lam * (t0 - margin) - 1e-9)), int(math.floor(lam * (t1 + margin) + 1e-9)))


class TruncationCheck(NamedTuple):
    deviation: float
    bound: float
    margin: float
    window: tuple[int, int]


def truncated_deviation(
    stream_full: QuantizedStream,
    kernel: Kernel,
    alpha: float,
    K: int,
    lam: float,
    interval: tuple[float, float],
    grid_step: float | None = None,
    padding: float | None = None,
) -> TruncationCheck:
    """Sup over ``interval`` of the reconstruction change caused by dropping far samples.

    Samples with ``n / lam`` outside the interval padded by ``T0(lam)`` (or by
    ``padding`` when given) are dropped.  The dropped part of the sum is
    evaluated directly, so a kernel that vanishes on all dropped offsets gives
    exactly 0.  ``bound`` is ``2^(1 - alpha K lam)``.
    """
    if abs(stream_full.lam - lam) > 1e-12 * lam:
        raise DomainError("stream rate does not match lambda")
    margin = compute_T0(kernel, alpha, K, lam) if padding is None else float(padding)
    keep = padded_window(interval, lam, margin)
    n_min, n_max = stream_full.window
    if n_min > keep[0] or n_max < keep[1]:
        raise DomainError(f"stream window {stream_full.window} does not contain the padded window {keep}")
    idx = stream_full.indices
    dropped = (idx < keep[0]) | (idx > keep[1])
    t0, t1 = interval
    step = grid_step if grid_step is not None else 1.0 / (8.0 * lam)
    grid = np.linspace(t0, t1, max(2, int(math.ceil((t1 - t0) / step)) + 1))
    if not np.any(dropped):
        dev = 0.0
    else:
        nodes = idx[dropped] / lam
        q = stream_full.values[dropped]
        dev = 0.0
        rows = max(1, _CHUNK // len(q))
        for a in range(0, len(grid), rows):
            tt = grid[a : a + rows]
            vals = kernel.evaluate(tt[:, None] - nodes[None, :]) @ q / lam
            dev = max(dev, float(np.max(np.abs(vals))))
    return TruncationCheck(dev, 2.0 ** (1.0 - alpha * K * lam), margin, keep)


@dataclass(frozen=True)
class Encoder:
    """Encoder descriptor: ``scheme`` is ``"pcm"`` or ``"sigma_delta"``."""

    scheme: str = "sigma_delta"
    K: int = 1
    order: int = 1

    def __post_init__(self) -> None:
        if self.scheme not in ("pcm", "sigma_delta"):
            raise DomainError(f"unknown scheme {self.scheme!r}")
        make_alphabet(self.K)
        if self.scheme == "sigma_delta" and self.order not in (1, 2):
            raise DomainError("sigma-delta order must be 1 or 2")

    def encode(self, samples, lam: float, n_min: int = 0) -> QuantizedStream:
        alphabet = make_alphabet(self.K)
        if self.scheme == "pcm":
            return pcm_encode(samples, alphabet, lam=lam, n_min=n_min)
        return sigma_delta_encode(samples, alphabet, self.order, lam=lam, n_min=n_min)

    def describe(self) -> str:
        if self.scheme == "pcm":
            return f"pcm(K={self.K})"
        return f"sigma_delta(order={self.order},K={self.K})"


class Fit(NamedTuple):
    model: str
    rate: float
    residual: float


@dataclass(frozen=True)
class DecayCurve:
    scheme: str
    kernel: str
    points: tuple[tuple[float, float], ...]
    fit: Fit | None = None

    def __post_init__(self) -> None:
        lams = [p[0] for p in self.points]
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise DomainError("DecayCurve lambdas must be strictly increasing")
        if any(e < 0 for _, e in self.points):
            raise DomainError("sup errors must be nonnegative")
        if self.fit is not None and len(self.points) < 3:
            raise DomainError("a fit needs at least 3 points")

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def errors(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])


# stream key for the constant members, disjoint from the per-index keys
_CONSTANT_KEY = 10**6


def seeded_ensemble(
    seed: int,
    size: int,
    mu: float,
    num_terms: int = 3,
    band_guard: float = 0.05,
    constant_levels: int = 0,
) -> list[BandlimitedSignal]:
    """Signals whose RNG streams derive from ``(seed, index)`` only.

    ``size`` random multi-tone signals, followed by ``constant_levels`` constant
    signals with levels drawn uniformly from ``[-mu, mu]``.  Slowly varying
    inputs are where low-order sigma-delta is worst, so the constants make the
    ensemble max a better proxy for the sup over the class.
    """
    signals = []
    for i in range(size):
        sub = int(np.random.SeedSequence([int(seed), i]).generate_state(1)[0])
        signals.append(random_bandlimited(sub, num_terms, mu, band_guard))
    if constant_levels:
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), _CONSTANT_KEY]))
        for c in rng.uniform(-mu, mu, int(constant_levels)):
            signals.append(BandlimitedSignal.tone(c, 0.0, band_guard=band_guard))
    return signals


def decay_experiment(
    ensemble: Sequence[BandlimitedSignal],
    encoder: Encoder,
    kernel: Kernel,
    lambdas: Sequence[float],
    interval: tuple[float, float] = (0.0, 4.0),
    grid_step: float | None = None,
    alpha: float = 1.0,
) -> DecayCurve:
    """Ensemble-max sup error of ``encoder`` + ``kernel`` at each rate in ``lambdas``.

    For each rate the samples cover ``interval`` padded by ``T0(lam)`` computed
    with ``alpha`` and the encoder's bit depth, so that dropped tails stay below
    ``2^(1 - alpha K lam)``.  ``grid_step`` may be a callable of ``lam``.
    """
    if not ensemble:
        raise DomainError("ensemble must contain at least one signal")
    if not lambdas:
        raise DomainError("at least one lambda is required")
    points = []
    for lam in sorted(float(v) for v in lambdas):
        margin = compute_T0(kernel, alpha, encoder.K, lam)
        window = padded_window(interval, lam, margin)
        step = grid_step(lam) if callable(grid_step) else grid_step
        worst = 0.0
        for x in ensemble:
            stream = encoder.encode(sample_signal(x, lam, window), lam, window[0])
            worst = max(worst, sup_error(x, stream, kernel, interval, step))
        points.append((lam, worst))
    return DecayCurve(encoder.describe(), kernel.descriptor(), tuple(points))


def fit_rate(curve: DecayCurve, model: str = "exponential") -> Fit:
    """Least-squares rate fit of ``log2(error)``.

    ``exponential``: against ``lambda``; the rate is minus the slope (``alpha K``
    for an error ``~ 2^(-alpha K lambda)``).  ``polynomial``: against
    ``log2(lambda)``; the rate is the decay degree.  Rates are clipped at 0 and
    the residual is the RMS misfit in ``log2`` units.
    """
    if model not in ("exponential", "polynomial"):
        raise DomainError(f"unknown model {model!r}")
    if len(curve.points) < 3:
        raise DomainError("need at least 3 points to fit a rate")
    lam, err = curve.lambdas, curve.errors
    if np.any(err <= 0):
        raise DomainError("cannot fit a rate to an exact (zero-error) reconstruction")
    y = np.log2(err)
    xs = lam if model == "exponential" else np.log2(lam)
    slope, intercept = np.polyfit(xs, y, 1)
    resid = y - (slope * xs + intercept)
    return Fit(model, max(0.0, -float(slope)), float(np.sqrt(np.mean(resid**2))))


def write_decay_curve(curve: DecayCurve, path: str | Path) -> Path:
    return write_csv(path, ["lambda", "sup_error"], curve.points)


def write_fit(fits: Sequence[Fit], path: str | Path) -> Path:
    return write_csv(path, ["model", "rate", "residual"], [tuple(f) for f in fits])
