"""Binary entropy, Bernoulli relative entropy and the K-bit rate-constant bound.

All entropies are in bits and use the positive convention
``h(p) = -p log2 p - (1-p) log2 (1-p)`` with ``0 log 0 = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DomainError

__all__ = [
    "BoundCurve",
    "ReferenceRate",
    "binary_entropy",
    "relative_entropy",
    "theorem_alpha",
    "bound_curve",
    "reference_upper_rate",
]


def _xlog2x(x: float) -> float:
    return 0.0 if x == 0.0 else x * math.log2(x)


def binary_entropy(p: float) -> float:
    """Binary entropy ``h(p)`` in bits, continuous on ``[0, 1]``."""
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise DomainError(f"probability must lie in [0, 1], got {p!r}")
    # the 0.0 turns -0.0 at the endpoints into +0.0
    return 0.0 - _xlog2x(p) - _xlog2x(1.0 - p)


def relative_entropy(a: float, p: float) -> float:
    """Kullback-Leibler divergence between Bernoulli(a) and Bernoulli(p), in bits.

    ``H(a, p) = a log2(a/p) + (1-a) log2((1-a)/(1-p))``.  For ``p = 1/2``
    this equals ``1 - binary_entropy(a)``.
    """
    if not 0.0 <= a <= 1.0 or math.isnan(a):
        raise DomainError(f"a must lie in [0, 1], got {a!r}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in the open interval (0, 1), got {p!r}")
    value = 0.0
    if a > 0.0:
        value += a * math.log2(a / p)
    if a < 1.0:
        value += (1.0 - a) * math.log2((1.0 - a) / (1.0 - p))
    # rounding can push the a == p case a hair below zero
    return max(value, 0.0)


def _check_bit_depth(K: int) -> None:
    if isinstance(K, bool) or int(K) != K or K < 1:
        raise DomainError(f"bit depth K must be an integer >= 1, got {K!r}")


def theorem_alpha(mu: float, K: int) -> float:
    """Largest admissible rate constant for K-bit schemes at amplitude ``mu``.

    Any K-bit scheme whose worst-case error over amplitude-``mu`` bandlimited
    inputs decays like ``2^{-alpha K lambda}`` must have
    ``alpha <= 1 - (1 - h((1+mu)/2)) / K``.
    """
    if not 0.0 <= mu <= 1.0 or math.isnan(mu):
        raise DomainError(f"amplitude mu must lie in [0, 1], got {mu!r}")
    _check_bit_depth(K)
    h = binary_entropy((1.0 + mu) / 2.0)
    if K == 1:
        return h
    return 1.0 - (1.0 - h) / K


@dataclass(frozen=True)
class BoundCurve:
    bit_depth: int
    points: tuple[tuple[float, float], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        mus = [m for m, _ in self.points]
        if any(b <= a for a, b in zip(mus, mus[1:])):
            raise DomainError("BoundCurve points must be strictly increasing in mu")

    @property
    def mus(self) -> list[float]:
        return [m for m, _ in self.points]

    @property
    def alphas(self) -> list[float]:
        return [a for _, a in self.points]

    def __len__(self) -> int:
        return len(self.points)


def bound_curve(K: int, mu_grid: Iterable[float]) -> BoundCurve:
    """Evaluate :func:`theorem_alpha` pointwise over a sorted amplitude grid."""
    _check_bit_depth(K)
    grid: Sequence[float] = list(mu_grid)
    return BoundCurve(int(K), tuple((float(mu), theorem_alpha(mu, K)) for mu in grid))


def mu_grid(step: float) -> list[float]:
    """Evenly spaced amplitudes from 0 to 1 inclusive.

    Points are formed as ``i / n`` so that the endpoints are exactly 0 and 1.
    """
    if not 0.0 < step <= 1.0:
        raise DomainError(f"mu step must lie in (0, 1], got {step!r}")
    n = round(1.0 / step)
    if abs(n * step - 1.0) > 1e-9:
        raise DomainError(f"mu step must divide 1 evenly, got {step!r}")
    return [i / n for i in range(n + 1)]


@dataclass(frozen=True)
class ReferenceRate:
    """Published constructive one-bit rate constant and the amplitude it needs."""

    rate: float
    amplitude_ceiling: float

    def __post_init__(self) -> None:
        if self.rate <= 0.0:
            raise DomainError("reference rate must be positive")
        if not 0.0 < self.amplitude_ceiling < 1.0:
            raise DomainError("amplitude ceiling must lie in (0, 1)")


def reference_upper_rate() -> ReferenceRate:
    """Best published one-bit sigma-delta rate constant (valid for ``mu <= 0.05``).

    Carried as data only; the underlying construction is not implemented here.
    """
    return ReferenceRate(rate=0.102, amplitude_ceiling=0.05)
