"""Exact binomial tails, Chernoff bounds and Monte-Carlo tails of bounded i.i.d. sums.

Tail probabilities for ``n <= 64`` are computed in exact rational arithmetic
(the float bias is converted to its exact dyadic value) and rounded once at the
end.  Larger ``n`` use log-domain summation with ``lgamma``; the relative error
there is a few hundred ulps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .entropy import relative_entropy
from .errors import DomainError
from .io import write_csv

__all__ = [
    "TailBoundRecord",
    "MCResult",
    "Distribution",
    "binomial_tail",
    "binomial_strict_head",
    "chernoff_bound",
    "threshold_count",
    "verify_prop1",
    "mc_tail",
    "uniform",
    "bernoulli",
    "beta",
    "point_mass",
    "write_prop1_report",
]

EXACT_LIMIT = 64
SLACK = 1e-15
# counts within this distance of an integer are treated as that integer
_CEIL_TOL = 1e-9


def threshold_count(n: int, a: float) -> int:
    """``ceil(n a)``, robust to decimal grid values such as ``a = 0.1``."""
    return int(math.ceil(n * a - _CEIL_TOL))


def _check_bias(p) -> None:
    if not 0 < p < 1:
        raise DomainError(f"bias p must lie in (0, 1), got {p!r}")


def _exact_tail(n: int, k: int, p: Fraction) -> Fraction:
    num, den = p.numerator, p.denominator
    rest = den - num
    total = sum(math.comb(n, j) * num**j * rest ** (n - j) for j in range(k, n + 1))
    return Fraction(total, den**n)


def _log_tail(n: int, k: int, p: float) -> float:
    lp, lq = math.log(p), math.log1p(-p)
    terms = [
        math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1) + j * lp + (n - j) * lq
        for j in range(k, n + 1)
    ]
    top = max(terms)
    return top + math.log(math.fsum(math.exp(t - top) for t in terms))


def binomial_tail(n: int, k: int, p, exact: bool = False):
    """``P(S_n >= k)`` for ``S_n ~ Binomial(n, p)``.

    ``k > n`` gives 0 and ``k <= 0`` gives 1.  With ``exact=True`` (only for
    ``n <= 64``) the exact :class:`~fractions.Fraction` is returned.
    """
    _check_bias(p)
    if n < 0:
        raise DomainError("n must be nonnegative")
    if k > n:
        return Fraction(0) if exact else 0.0
    if k <= 0:
        return Fraction(1) if exact else 1.0
    if n <= EXACT_LIMIT:
        value = _exact_tail(n, k, Fraction(p))
        return value if exact else float(value)
    if exact:
        raise DomainError(f"exact tails are limited to n <= {EXACT_LIMIT}")
    return min(1.0, math.exp(_log_tail(n, k, float(p))))


def binomial_strict_head(n: int, k: int, p, exact: bool = False):
    """``P(S_n < k)``, the complement of :func:`binomial_tail`."""
    _check_bias(p)
    if k <= 0:
        return Fraction(0) if exact else 0.0
    if k > n:
        return Fraction(1) if exact else 1.0
    if n <= EXACT_LIMIT:
        pf = Fraction(p)
        num, den = pf.numerator, pf.denominator
        total = sum(math.comb(n, j) * num**j * (den - num) ** (n - j) for j in range(0, k))
        value = Fraction(total, den**n)
        return value if exact else float(value)
    return min(1.0, math.exp(_log_tail(n, n - k + 1, 1.0 - float(p))))


def chernoff_bound(n: int, a: float, p: float) -> float:
    """``2^(-n H(a, p))``, the large-deviation bound on ``P(S_n >= n a)`` for ``p < a <= 1``."""
    _check_bias(p)
    if not p < a <= 1:
        raise DomainError(f"need p < a <= 1, got a={a!r}, p={p!r}")
    return 2.0 ** (-n * relative_entropy(a, p))


@dataclass(frozen=True)
class TailBoundRecord:
    n: int
    a: float
    p: float
    exact_tail: float
    chernoff: float

    @property
    def satisfied(self) -> bool:
        return self.exact_tail <= self.chernoff + SLACK

    def row(self) -> tuple:
        return (self.n, self.a, self.p, self.exact_tail, self.chernoff, self.satisfied)


def verify_prop1(n_max: int, p_grid: Iterable[float], a_grid: Iterable[float]) -> list[TailBoundRecord]:
    """Exact tail vs Chernoff bound for every ``1 <= n <= n_max`` and grid pair with ``a > p``.

    The event ``S_n >= n a`` is evaluated as ``S_n >= ceil(n a)``.
    """
    p_list = [float(p) for p in p_grid]
    a_list = [float(a) for a in a_grid]
    records = []
    for n in range(1, int(n_max) + 1):
        for p in p_list:
            for a in a_list:
                if not p < a <= 1:
                    continue
                tail = binomial_tail(n, threshold_count(n, a), p)
                records.append(TailBoundRecord(n, a, p, tail, chernoff_bound(n, a, p)))
    return records


def write_prop1_report(records: Sequence[TailBoundRecord], path: str | Path) -> Path:
    return write_csv(path, ["n", "a", "p", "exact", "chernoff", "satisfied"], (r.row() for r in records))


# --- Monte Carlo -----------------------------------------------------------------------


@dataclass(frozen=True)
class Distribution:
    """A law on ``[0, 1]`` with known mean and a numpy sampler ``sample(rng, size)``."""

    name: str
    mean: float
    sample: Callable[[np.random.Generator, tuple], np.ndarray]


def uniform() -> Distribution:
    return Distribution("uniform", 0.5, lambda rng, size: rng.random(size))


def bernoulli(p: float) -> Distribution:
    _check_bias(p)
    return Distribution(f"bernoulli({p:g})", p, lambda rng, size: (rng.random(size) < p).astype(float))


def beta(a: float, b: float) -> Distribution:
    if not (a > 0 and b > 0):
        raise DomainError("beta parameters must be positive")
    return Distribution(f"beta({a:g},{b:g})", a / (a + b), lambda rng, size: rng.beta(a, b, size))


def point_mass(p: float) -> Distribution:
    if not 0 <= p <= 1:
        raise DomainError("point mass must lie in [0, 1]")
    return Distribution(f"point({p:g})", p, lambda rng, size: np.full(size, float(p)))


class MCResult(NamedTuple):
    estimate: float
    stderr: float
    trials: int


MIN_TRIALS = 1000
_CHUNK_TRIALS = 1 << 17


def mc_tail(dist: Distribution, n: int, a: float, trials: int, seed: int) -> MCResult:
    """Monte-Carlo estimate of ``P(X_1 + ... + X_n >= n a)`` with its binomial standard error.

    Trials run in chunks; chunk ``i`` draws from ``SeedSequence([seed, i])``,
    so the estimate does not depend on how chunks are scheduled.
    """
    if trials < MIN_TRIALS:
        raise DomainError(f"need at least {MIN_TRIALS} trials, got {trials}")
    if n < 1:
        raise DomainError("n must be >= 1")
    threshold = n * a - _CEIL_TOL
    hits = 0
    done = 0
    chunk = 0
    while done < trials:
        size = min(_CHUNK_TRIALS, trials - done)
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), chunk]))
        sums = dist.sample(rng, (size, n)).sum(axis=1)
        hits += int(np.count_nonzero(sums >= threshold))
        done += size
        chunk += 1
    est = hits / trials
    return MCResult(est, math.sqrt(est * (1.0 - est) / trials), trials)
