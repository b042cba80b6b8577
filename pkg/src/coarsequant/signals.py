"""Amplitude-bounded bandlimited test signals.

Signals are finite cosine sums ``x(t) = sum_k a_k cos(2 pi f_k t + theta_k)``
with every ``|f_k| <= 1/2 - band_guard``, so the spectrum sits strictly inside
the unit band ``[-1/2, 1/2]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError
from .io import read_csv, write_csv

__all__ = [
    "BandlimitedSignal",
    "random_bandlimited",
    "eval_signal",
    "sup_norm_estimate",
    "sample_signal",
    "write_manifest",
    "read_manifest",
]

Term = tuple[float, float, float]


@dataclass(frozen=True)
class BandlimitedSignal:
    """Finite trigonometric sum standing in for an element of the bounded band-1 class.

    ``amplitude_bound`` is a certified bound on ``sup |x|`` over the whole
    real line.  :func:`random_bandlimited` certifies via ``sum |a_k|``.
    """

    terms: tuple[Term, ...] = field(default_factory=tuple)
    amplitude_bound: float = 0.0
    band_guard: float = 0.05

    def __post_init__(self) -> None:
        if not 0.0 < self.band_guard < 0.5:
            raise DomainError(f"band_guard must lie in (0, 1/2), got {self.band_guard!r}")
        fmax = 0.5 - self.band_guard
        for a, f, _ in self.terms:
            if abs(f) > fmax + 1e-15:
                raise DomainError(f"frequency {f} outside guarded band |f| <= {fmax}")
        if self.amplitude_bound < self.l1_amplitude * (1.0 - 1e-12):
            raise DomainError("amplitude_bound must be at least sum |a_k|")

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([t[0] for t in self.terms], dtype=float)

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([t[1] for t in self.terms], dtype=float)

    @property
    def phases(self) -> np.ndarray:
        return np.array([t[2] for t in self.terms], dtype=float)

    @property
    def l1_amplitude(self) -> float:
        return float(sum(abs(t[0]) for t in self.terms))

    def __call__(self, t):
        return eval_signal(self, t)

    @classmethod
    def tone(cls, amplitude: float, frequency: float, phase: float = 0.0, band_guard: float = 0.05):
        return cls(((float(amplitude), float(frequency), float(phase)),), abs(float(amplitude)), band_guard)

    @classmethod
    def zero(cls, band_guard: float = 0.05) -> "BandlimitedSignal":
        return cls((), 0.0, band_guard)


def random_bandlimited(
    seed: int,
    num_terms: int,
    mu_target: float,
    band_guard: float = 0.05,
) -> BandlimitedSignal:
    """Draw a seeded random cosine sum whose sup-norm certificate equals ``mu_target``.

    Frequencies are uniform on ``[0, 1/2 - band_guard]``, phases uniform on
    ``[0, 2 pi)``, raw amplitudes uniform on ``[0.2, 1]``.  Amplitudes are then
    rescaled so that ``sum |a_k| = mu_target``; by the triangle inequality this
    bounds ``|x(t)|`` for every real ``t``, not just on a sampled window.
    """
    if not 0.0 < mu_target < 1.0:
        raise DomainError(f"mu_target must lie in (0, 1), got {mu_target!r}")
    if not 0.0 < band_guard < 0.5:
        raise DomainError(f"band_guard must lie in (0, 1/2), got {band_guard!r}")
    if num_terms < 1:
        raise DomainError("num_terms must be >= 1")
    rng = np.random.default_rng(seed)
    freqs = rng.uniform(0.0, 0.5 - band_guard, size=num_terms)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=num_terms)
    raw = rng.uniform(0.2, 1.0, size=num_terms)
    amps = raw * (mu_target / raw.sum())
    terms = tuple((float(a), float(f), float(th)) for a, f, th in zip(amps, freqs, phases))
    if num_terms == 1:
        terms = ((float(mu_target), terms[0][1], terms[0][2]),)
    bound = float(sum(abs(t[0]) for t in terms))
    return BandlimitedSignal(terms, bound, band_guard)


def eval_signal(x: BandlimitedSignal, t):
    """Evaluate the cosine sum exactly at scalar or array ``t``."""
    t_arr = np.asarray(t, dtype=float)
    out = np.zeros_like(t_arr)
    for a, f, th in x.terms:
        out = out + a * np.cos(2.0 * math.pi * f * t_arr + th)
    if np.ndim(t) == 0:
        return float(out)
    return out


def sup_norm_estimate(x: BandlimitedSignal, interval: tuple[float, float], step: float) -> float:
    """Grid maximum of ``|x|`` on ``interval``, refined around the best grid point.

    The result never exceeds ``sum |a_k|``.
    """
    t0, t1 = map(float, interval)
    if not t1 > t0:
        raise DomainError(f"degenerate interval [{t0}, {t1}]")
    if not step > 0.0:
        raise DomainError(f"grid step must be positive, got {step!r}")
    if not x.terms:
        return 0.0
    n = int(math.ceil((t1 - t0) / step))
    grid = np.linspace(t0, t1, n + 1)
    values = np.abs(eval_signal(x, grid))
    i = int(np.argmax(values))
    best = float(values[i])
    lo, hi = max(t0, grid[i] - step), min(t1, grid[i] + step)
    if hi > lo:
        res = minimize_scalar(
            lambda s: -abs(eval_signal(x, s)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = max(best, -float(res.fun))
    return min(best, x.l1_amplitude)


def sample_signal(x: BandlimitedSignal, lam: float, index_range: tuple[int, int]) -> np.ndarray:
    """Samples ``x(n / lam)`` for ``n_min <= n <= n_max`` (inclusive)."""
    if not lam > 1.0:
        raise DomainError(f"oversampling rate must exceed 1, got {lam!r}")
    n_min, n_max = map(int, index_range)
    if n_max < n_min:
        return np.zeros(0)
    n = np.arange(n_min, n_max + 1, dtype=float)
    return np.asarray(eval_signal(x, n / lam), dtype=float).reshape(-1)


def write_manifest(x: BandlimitedSignal, path: str | Path) -> Path:
    """Write the term list as CSV ``a,f,theta``."""
    return write_csv(path, ["a", "f", "theta"], x.terms)


def read_manifest(path: str | Path, band_guard: float = 0.05) -> BandlimitedSignal:
    header, rows = read_csv(path)
    if header != ["a", "f", "theta"]:
        raise DomainError(f"unexpected signal manifest header {header}")
    terms = tuple((float(a), float(f), float(th)) for a, f, th in rows)
    return BandlimitedSignal(terms, float(sum(abs(t[0]) for t in terms)), band_guard)
