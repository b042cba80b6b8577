"""Exhaustive survivor counting for the epsilon-net argument at desk scale.

An instance fixes ``M`` quantized symbols ``q_n`` in the K-bit alphabet, a
weight matrix ``A`` (one row per evaluation time) and a threshold.  A sequence
*survives* when every row satisfies ``(A q)_j >= threshold``.  Survivors are
counted by brute force and compared against the chain

    survivors <= #{q : sum_n q_n >= M a_eff}    (exact level-sum count)
              <= 2^(M (K - 1 + h((1 + a_eff)/2)))

where ``a_eff`` is the threshold loosened by the coefficient deviations
``|c_n - 1|`` (measured on interior symbols, bounded by ``D`` on edge symbols)
and ``c_n`` are the column sums of ``A``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .entropy import binary_entropy
from .errors import DomainError
from .io import write_csv
from .kernels import Kernel, compute_T0
from .quantizers import make_alphabet

__all__ = [
    "CountingInstance",
    "CountingReport",
    "CoefficientProfile",
    "toy_average_instance",
    "kernel_instance",
    "coefficient_profile",
    "loosened_threshold",
    "enumerate_survivors",
    "level_sum_count",
    "counting_bound",
    "entropy_reference",
    "contradiction_exhibit",
    "write_counting_reports",
    "ENUMERATION_BUDGET",
]

ENUMERATION_BUDGET = 24
ATOL = 1e-9


@dataclass(frozen=True)
class CountingInstance:
    K: int
    weights: np.ndarray
    threshold: float
    interior: np.ndarray
    unit: float = 1.0
    lam: float | None = None
    kernel: str = ""
    edge_bound: float = 0.0
    margin: float = 0.0
    half_length: float = 0.0
    thresholds: tuple[float, ...] = ()
    symbols: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    eval_times: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def M(self) -> int:
        return int(self.weights.shape[1])

    @property
    def grid_size(self) -> int:
        return int(self.weights.shape[0])

    @property
    def coefficients(self) -> np.ndarray:
        return self.weights.sum(axis=0)


def toy_average_instance(M: int, K: int, a: float) -> CountingInstance:
    """Plain averaging: survive iff ``(1/M) sum_n q_n >= a``."""
    if M < 1:
        raise DomainError("M must be >= 1")
    make_alphabet(K)
    return CountingInstance(
        K=int(K),
        weights=np.full((1, int(M)), 1.0 / M),
        threshold=float(a),
        interior=np.ones(int(M), dtype=bool),
        unit=1.0 / M,
        kernel="average",
        thresholds=(float(a),),
        symbols=np.arange(int(M)),
    )


def kernel_instance(
    kernel: Kernel,
    lam: float,
    half_length: float,
    K: int,
    mu: float,
    delta: float,
    alpha: float = 1.0,
) -> CountingInstance:
    """Instance on ``I = [-a, a]`` with the padded window ``Z cap lam I~``.

    Symbols are ``n`` with ``|n| <= lam (a + T0)``; evaluation times are
    ``j / lam`` with ``|j| <= lam a``; the weights are ``phi((j - n)/lam) / lam``
    and the threshold is ``mu - 3 delta``.  Symbols with ``|n / lam| <= a - T0``
    are interior.
    """
    make_alphabet(K)
    if not half_length > 0:
        raise DomainError("half_length must be positive")
    T0 = compute_T0(kernel, alpha, K, lam)
    if half_length <= T0:
        raise DomainError(f"half_length {half_length} must exceed the margin T0 = {T0:.6g}")
    outer = lam * (half_length + T0)
    n = np.arange(math.ceil(-outer - 1e-9), math.floor(outer + 1e-9) + 1)
    j = np.arange(math.ceil(-lam * half_length - 1e-9), math.floor(lam * half_length + 1e-9) + 1)
    weights = kernel.evaluate((j[:, None] - n[None, :]) / lam) / lam
    inner = half_length - T0
    interior = np.abs(n / lam) <= inner + 1e-12
    return CountingInstance(
        K=int(K),
        weights=weights,
        threshold=mu - 3.0 * delta,
        interior=interior,
        unit=1.0,
        lam=float(lam),
        kernel=kernel.descriptor(),
        edge_bound=kernel.crude_coefficient_bound,
        margin=T0,
        half_length=float(half_length),
        thresholds=(mu - delta, mu - 2.0 * delta, mu - 3.0 * delta),
        symbols=n,
        eval_times=j / lam,
    )


class CoefficientProfile(NamedTuple):
    coefficients: np.ndarray
    interior: np.ndarray
    crude_bound: float
    edge_count: int
    edge_budget: float
    interior_deviation: float


def coefficient_profile(instance: CountingInstance) -> CoefficientProfile:
    """Column sums ``c_n`` with interior/edge split.

    ``edge_budget`` is ``4 lam T0 + 4``, the a-priori bound on the number of
    edge symbols; ``interior_deviation`` is ``max |c_n - 1|`` over interior
    symbols (in units of ``instance.unit``).
    """
    c = instance.coefficients / instance.unit
    interior = instance.interior
    if not np.any(interior):
        raise DomainError("no interior symbols: the interval must be longer than twice the margin")
    edge_count = int(np.count_nonzero(~interior))
    budget = 4.0 * instance.lam * instance.margin + 4.0 if instance.lam else 0.0
    dev = float(np.max(np.abs(c[interior] - 1.0)))
    return CoefficientProfile(c, interior, instance.edge_bound, edge_count, budget, dev)


def loosened_threshold(instance: CountingInstance, measured: bool = False) -> float:
    """Mean level ``a_eff`` such that every survivor has ``(1/M) sum q_n >= a_eff``.

    Uses measured ``|c_n - 1|`` on interior symbols and the crude bound ``D``
    on each edge symbol; with ``measured=True`` the actual deviation is used
    on edge symbols too.
    """
    prof = coefficient_profile(instance)
    dev = np.abs(prof.coefficients - 1.0)
    if measured:
        slack = float(np.sum(dev))
    else:
        slack = float(np.sum(dev[prof.interior])) + prof.crude_bound * prof.edge_count
    level = instance.grid_size * instance.threshold / instance.unit
    return (level - slack) / instance.M


def counting_bound(M: int, K: int, mu_prime: float) -> float:
    """``2^(M (K - 1 + h((1 + mu')/2)))`` for ``0 <= mu' < 1``."""
    if not 0.0 <= mu_prime < 1.0:
        raise DomainError(f"mu_prime must lie in [0, 1), got {mu_prime!r}")
    return 2.0 ** (M * (K - 1 + binary_entropy((1.0 + mu_prime) / 2.0)))


def _chain_bound(M: int, K: int, a_eff: float) -> float:
    if a_eff <= 0.0:
        return 2.0 ** (K * M)
    if a_eff >= 1.0:
        return 2.0 ** (M * (K - 1)) if a_eff <= 1.0 + ATOL else 0.0
    return counting_bound(M, K, a_eff)


def level_sum_count(M: int, K: int, total: float) -> int:
    """Exact number of ``q`` in ``A_K^M`` with ``sum_n q_n >= total``.

    Levels are ``(2 i - (L - 1)) / (L - 1)``, so the condition reads
    ``sum i_n >= ((L - 1)(total + M)) / 2``; the distribution of ``sum i_n`` is
    built by integer convolution.
    """
    L = 2**K
    need = math.ceil((L - 1) * (total + M) / 2.0 - ATOL)
    counts = np.array([1], dtype=object)
    ones = np.ones(L, dtype=object)
    for _ in range(M):
        counts = np.convolve(counts, ones)
    if need <= 0:
        return int(sum(counts))
    if need >= len(counts):
        return 0
    return int(sum(counts[need:]))


def _all_sequences(levels: np.ndarray, m: int) -> np.ndarray:
    L = len(levels)
    if m == 0:
        return np.zeros((1, 0))
    codes = np.arange(L**m)
    digits = (codes[:, None] // (L ** np.arange(m - 1, -1, -1))[None, :]) % L
    return levels[digits]


@dataclass(frozen=True)
class CountingReport:
    M: int
    K: int
    lam: float | None
    threshold: float
    survivor_count: int
    total: int
    bound_N: float
    bernoulli_bound: int
    loosened: float
    loosened_measured: float
    bound_measured: float

    @property
    def satisfied(self) -> bool:
        slack = 1.0 + 1e-12
        return (
            self.survivor_count <= self.bernoulli_bound
            and self.bernoulli_bound <= self.bound_N * slack
            and self.survivor_count <= self.bound_measured * slack
        )

    def row(self) -> tuple:
        return (
            self.M,
            self.K,
            "" if self.lam is None else self.lam,
            self.threshold,
            self.survivor_count,
            self.total,
            self.bound_N,
            self.satisfied,
        )


def _count_survivors(instance: CountingInstance, atol: float) -> int:
    levels = make_alphabet(instance.K).as_array()
    A = instance.weights
    M = instance.M
    m_hi = M // 2
    m_lo = M - m_hi
    thr = instance.threshold - atol
    lo_vals = _all_sequences(levels, m_lo) @ A[:, m_hi:].T
    lo_max, lo_min = lo_vals.max(axis=0), lo_vals.min(axis=0)
    n_lo = lo_vals.shape[0]
    hi_seqs = _all_sequences(levels, m_hi)
    total = 0
    block = max(1, (1 << 21) // max(1, n_lo * A.shape[0]))
    for start in range(0, hi_seqs.shape[0], block):
        hi_vals = hi_seqs[start : start + block] @ A[:, :m_hi].T
        alive = np.all(hi_vals + lo_max >= thr, axis=1)
        full = np.all(hi_vals + lo_min >= thr, axis=1)
        total += int(np.count_nonzero(full)) * n_lo
        partial = hi_vals[alive & ~full]
        if partial.size:
            ok = np.all(partial[:, None, :] + lo_vals[None, :, :] >= thr, axis=2)
            total += int(np.count_nonzero(ok))
    return total


def enumerate_survivors(instance: CountingInstance, atol: float = ATOL) -> CountingReport:
    """Exhaustive survivor count with the loosened-threshold bounds.

    Refuses instances with ``K M > 24``.  Prefix blocks whose best completion
    already fails (or whose worst completion already passes) are settled
    without enumerating their suffixes.
    """
    K, M = instance.K, instance.M
    if K * M > ENUMERATION_BUDGET:
        raise DomainError(f"K*M = {K * M} exceeds the enumeration budget of {ENUMERATION_BUDGET}")
    survivors = _count_survivors(instance, atol)
    a_eff = loosened_threshold(instance)
    a_meas = loosened_threshold(instance, measured=True)
    total = 2 ** (K * M)
    reduced = level_sum_count(M, K, M * a_eff) if a_eff > -1.0 else total
    return CountingReport(
        M=M,
        K=K,
        lam=instance.lam,
        threshold=instance.threshold,
        survivor_count=survivors,
        total=total,
        bound_N=_chain_bound(M, K, a_eff),
        bernoulli_bound=reduced,
        loosened=a_eff,
        loosened_measured=a_meas,
        bound_measured=_chain_bound(M, K, a_meas),
    )


def entropy_reference(epsilon: float, mu: float) -> float:
    """Leading-order average epsilon-entropy ``log2(mu / epsilon)`` of the amplitude-``mu`` class."""
    if not 0.0 < epsilon < mu:
        raise DomainError(f"need 0 < epsilon < mu, got epsilon={epsilon!r}, mu={mu!r}")
    return math.log2(mu / epsilon)


class ExhibitRow(NamedTuple):
    lam: float
    net_exponent: float
    required: float
    gap: float


def contradiction_exhibit(
    mu: float, K: int, alpha: float, lambdas: Sequence[float], delta: float = 0.0, C: float = 1.0
) -> list[ExhibitRow]:
    """Per-unit-length log-size of the reduced net vs the entropy it must carry.

    ``net_exponent = lam (K - 1 + h((1 + mu - 5 delta)/2))`` and
    ``required = log2(mu / eps)`` with ``eps = C 2^(-alpha K lam)``.  A
    positive ``gap`` means a net that small cannot exist; for ``alpha`` above
    the admissible rate constant the gap grows linearly in ``lam``.
    """
    h = binary_entropy(0.5 + (mu - 5.0 * delta) / 2.0)
    rows = []
    for lam in lambdas:
        eps = C * 2.0 ** (-alpha * K * lam)
        if not eps < mu:
            continue
        net = lam * (K - 1 + h)
        req = entropy_reference(eps, mu)
        rows.append(ExhibitRow(float(lam), net, req, req - net))
    return rows


def write_counting_reports(reports: Sequence[CountingReport], path: str | Path) -> Path:
    header = ["M", "K", "lambda", "threshold", "survivors", "total", "bound_N", "satisfied"]
    return write_csv(path, header, (r.row() for r in reports))
