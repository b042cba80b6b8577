"""Reconstruction kernels, their tail envelopes, the padding margin T0 and row sums.

A :class:`Kernel` bundles the filter ``phi`` (normalized so that its integral
is 1) with an even envelope ``rho`` that is nonincreasing on ``[0, inf)`` and
dominates ``|phi|``, together with the tail integral ``T -> int_T^inf rho``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import comb, factorial

from .errors import DomainError, UnreachableTarget
from .io import write_csv

__all__ = [
    "Kernel",
    "RowSum",
    "cardinal_bspline",
    "make_bspline_kernel",
    "make_triangle_kernel",
    "make_exponential_kernel",
    "make_lowpass_kernel",
    "smooth_taper",
    "kernel_fourier",
    "compute_T0",
    "poisson_row_sum",
    "row_sum_constant",
    "write_kernel_table",
]

T0_TOL = 1e-9
LOWPASS_TAIL_MASS = 1e-9


@dataclass(frozen=True)
class Kernel:
    name: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    support_radius: float
    tail_envelope: Callable[[np.ndarray], np.ndarray]
    tail_integral: Callable[[float], float]
    envelope_l1: float
    normalization_check: float
    params: tuple = ()

    def __call__(self, t):
        out = self.evaluate(np.asarray(t, dtype=float))
        if np.ndim(t) == 0:
            return float(out)
        return out

    @property
    def compact(self) -> bool:
        return math.isfinite(self.support_radius)

    @property
    def envelope_at_zero(self) -> float:
        return float(self.tail_envelope(np.array([0.0]))[0])

    @property
    def crude_coefficient_bound(self) -> float:
        """``||rho||_1 + 1 + rho(0)``, the coarse bound on ``|c_n - 1|`` at window edges."""
        return self.envelope_l1 + 1.0 + self.envelope_at_zero

    def descriptor(self) -> str:
        if not self.params:
            return self.name
        return self.name + "(" + ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in self.params) + ")"


# --- B-splines -------------------------------------------------------------------


def cardinal_bspline(x, order: int):
    """Centered cardinal B-spline of the given order (degree ``order - 1``).

    Supported on ``[-order/2, order/2]`` with unit integral.  Evaluated through
    the truncated-power formula on ``-|x|`` where only a few terms are active.
    """
    m = int(order)
    if m < 1:
        raise DomainError("B-spline order must be >= 1")
    y = -np.abs(np.asarray(x, dtype=float))
    out = np.zeros_like(y)
    inside = y > -m / 2.0
    yy = y[inside] + m / 2.0
    acc = np.zeros_like(yy)
    for k in range(m + 1):
        shift = yy - k
        if m == 1:
            term = (shift >= 0).astype(float)
        else:
            term = np.where(shift > 0, shift, 0.0) ** (m - 1)
        acc += (-1) ** k * comb(m, k, exact=True) * term
    out[inside] = acc / math.factorial(m - 1)
    return np.maximum(out, 0.0)


def _bspline_cdf(x, order: int):
    """``int_{-inf}^{x} B_m``; accurate for ``x <= 0``."""
    m = int(order)
    xx = np.asarray(x, dtype=float) + m / 2.0
    acc = np.zeros_like(xx)
    for k in range(m + 1):
        shift = xx - k
        acc += (-1) ** k * comb(m, k, exact=True) * np.where(shift > 0, shift, 0.0) ** m
    return np.clip(acc / factorial(m, exact=True), 0.0, 1.0)


def _bspline_kernel(order: int, scale: float) -> Kernel:
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale!r}")
    m = int(order)
    radius = m * scale / 2.0

    def evaluate(t):
        return cardinal_bspline(np.asarray(t, dtype=float) / scale, m) / scale

    def tail_integral(T: float) -> float:
        T = float(T)
        if T >= radius:
            return 0.0
        upper = float(_bspline_cdf(-abs(T) / scale, m))
        return upper if T >= 0 else 1.0 - upper

    name = "triangle" if m == 2 else "bspline"
    # the centered B-spline is nonnegative, even and unimodal, so it is its own envelope
    return Kernel(
        name=name,
        evaluate=evaluate,
        support_radius=radius,
        tail_envelope=lambda s: evaluate(np.abs(np.asarray(s, dtype=float))),
        tail_integral=tail_integral,
        envelope_l1=1.0,
        normalization_check=_integrate_even(evaluate, radius, breaks=np.arange(0, m + 1) * scale / 2.0),
        params=(("order", m), ("scale", float(scale))),
    )


def make_bspline_kernel(order: int = 4, scale: float = 1.0) -> Kernel:
    """Compactly supported B-spline kernel ``phi(t) = B_order(t / scale) / scale``.

    Order 3 (quadratic) is accepted as the smallest admissible order; order
    >= 4 is needed for two continuous derivatives.
    """
    if isinstance(order, bool) or int(order) != order or order < 3:
        raise DomainError(f"B-spline kernel order must be an integer >= 3, got {order!r}")
    return _bspline_kernel(int(order), scale)


def make_triangle_kernel(scale: float = 1.0) -> Kernel:
    """Order-2 B-spline (hat function); integer shifts form a partition of unity."""
    return _bspline_kernel(2, scale)


# --- two-sided exponential -------------------------------------------------------------


def make_exponential_kernel(rate: float = 1.0) -> Kernel:
    """``phi(t) = (rate/2) exp(-rate |t|)`` with envelope ``rho(s) = rate exp(-rate |s|)``.

    The envelope is ``2 phi`` so that its tail integral is exactly
    ``exp(-rate T)`` for ``T >= 0``.  Not smooth at 0; used to exercise
    margins and truncation with an infinitely supported kernel.
    """
    if not rate > 0:
        raise DomainError("rate must be positive")

    def evaluate(t):
        return 0.5 * rate * np.exp(-rate * np.abs(np.asarray(t, dtype=float)))

    def tail_integral(T: float) -> float:
        T = float(T)
        if T >= 0:
            return math.exp(-rate * T)
        return 2.0 - math.exp(rate * T)

    return Kernel(
        name="exponential",
        evaluate=evaluate,
        support_radius=math.inf,
        tail_envelope=lambda s: rate * np.exp(-rate * np.abs(np.asarray(s, dtype=float))),
        tail_integral=tail_integral,
        envelope_l1=2.0,
        normalization_check=_integrate_even(evaluate, 40.0 / rate) + math.exp(-40.0),
        params=(("rate", float(rate)),),
    )


# --- smooth low-pass ----------------------------------------------------------------------


def smooth_taper(x):
    """C-infinity step from 1 at ``x <= 0`` to 0 at ``x >= 1``."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)

    def bump(y):
        safe = np.where(y > 0, y, 1.0)
        return np.where(y > 0, np.exp(-1.0 / safe), 0.0)

    a, b = bump(1.0 - x), bump(x)
    return a / (a + b)


def _lowpass_spectrum(omega, lambda0: float):
    w = np.abs(np.asarray(omega, dtype=float))
    edge, cutoff = 0.5, lambda0 / 2.0
    return np.where(w <= edge, 1.0, smooth_taper((w - edge) / (cutoff - edge)))


def make_lowpass_kernel(
    lambda0: float = 4.0,
    truncation_radius: float | None = None,
    table_step: float = 1.0 / 512,
    period: float = 2048.0,
) -> Kernel:
    """Smooth low-pass kernel: ``ghat = 1`` on ``|w| <= 1/2``, ``0`` on ``|w| >= lambda0/2``.

    Between the band edge and the cutoff the spectrum follows a C-infinity
    taper, so the time-domain kernel decays faster than any polynomial.  The
    kernel is tabulated by an inverse FFT of the spectrum (exact for the
    ``period``-periodization of a bandlimited function), truncated to
    ``|t| <= truncation_radius`` and interpolated by a cubic spline.

    With ``truncation_radius=None`` the smallest table radius whose discarded
    mass ``int_{|t|>R} |g|`` is below 1e-10 is used.  An explicit radius whose
    discarded mass is not below 1e-9 is rejected.
    """
    if not lambda0 > 1.0:
        raise DomainError(f"lambda0 must exceed 1, got {lambda0!r}")
    n = int(round(period / table_step))
    m = np.arange(n // 2 + 1)
    g = np.fft.irfft(_lowpass_spectrum(m / period, lambda0), n=n) * (n / period)
    half = g[: n // 2]
    t = np.arange(n // 2) * table_step
    # discarded mass beyond t_k on both sides, by the trapezoid rule on |g|
    absg = np.abs(half)
    cells = 0.5 * (absg[:-1] + absg[1:]) * table_step
    outside = 2.0 * np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]])
    if truncation_radius is None:
        k = int(np.argmax(outside < 1e-10))
        radius = float(t[k])
    else:
        radius = float(truncation_radius)
        if not 0 < radius < t[-1]:
            raise DomainError(f"truncation radius {radius} outside the tabulated range")
        k = int(math.ceil(radius / table_step - 1e-9))
        if outside[k] >= LOWPASS_TAIL_MASS:
            raise DomainError(
                f"truncation radius {radius} discards tail mass {outside[k]:.3g} >= {LOWPASS_TAIL_MASS:g}"
            )
        radius = float(t[k])
    knots = t[: k + 1]
    spline = CubicSpline(knots, half[: k + 1], bc_type=((1, 0.0), "not-a-knot"))
    total = 2.0 * float(spline.integrate(0.0, radius))
    ppoly = spline
    scale = 1.0 / total

    def evaluate(tt):
        a = np.abs(np.asarray(tt, dtype=float))
        out = np.zeros_like(a)
        inside = a < radius
        out[inside] = ppoly(a[inside]) * scale
        return out

    # exact cell maxima of |spline| from knot values and interior critical points
    vals = np.abs(half[: k + 1]) * scale
    cell_max = np.maximum(vals[:-1], vals[1:])
    crit = ppoly.derivative().roots(discontinuity=False, extrapolate=False)
    crit = crit[np.isfinite(crit) & (crit > 0) & (crit < radius)]
    if crit.size:
        idx = np.minimum(np.searchsorted(knots, crit, side="right") - 1, len(cell_max) - 1)
        np.maximum.at(cell_max, idx, np.abs(ppoly(crit)) * scale)
    env_cells = np.maximum.accumulate(cell_max[::-1])[::-1]
    widths = np.diff(knots)
    cum = np.concatenate([np.cumsum((env_cells * widths)[::-1])[::-1], [0.0]])
    half_l1 = float(cum[0])

    def tail_envelope(s):
        a = np.abs(np.asarray(s, dtype=float))
        out = np.zeros_like(a)
        inside = a < radius
        idx = np.minimum(np.searchsorted(knots, a[inside], side="right") - 1, len(env_cells) - 1)
        out[inside] = env_cells[idx]
        return out

    def tail_integral(T: float) -> float:
        T = float(T)
        a = abs(T)
        if a >= radius:
            upper = 0.0
        else:
            i = min(int(np.searchsorted(knots, a, side="right") - 1), len(env_cells) - 1)
            upper = float(cum[i + 1] + env_cells[i] * (knots[i + 1] - a))
        return upper if T >= 0 else 2.0 * half_l1 - upper

    return Kernel(
        name="lowpass",
        evaluate=evaluate,
        support_radius=radius,
        tail_envelope=tail_envelope,
        tail_integral=tail_integral,
        envelope_l1=2.0 * half_l1,
        normalization_check=_integrate_even(evaluate, radius, breaks=np.linspace(0, radius, 64)),
        params=(("lambda0", float(lambda0)), ("radius", radius)),
    )


# --- quadrature helpers ------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def _integrate_even(f, radius: float, breaks=None) -> float:
    """``int_{-R}^{R} f`` for an even ``f`` by panelled Gauss-Legendre on ``[0, R]``."""
    if breaks is None:
        breaks = np.linspace(0.0, radius, 65)
    edges = np.unique(np.concatenate([[0.0], np.asarray(breaks, dtype=float), [radius]]))
    edges = edges[(edges >= 0) & (edges <= radius)]
    # refine panels so each is short relative to kernel features
    fine = []
    for a, b in zip(edges[:-1], edges[1:]):
        k = max(1, int(math.ceil((b - a) / 0.125)))
        fine.append(np.linspace(a, b, k + 1)[:-1])
    nodes = np.concatenate(fine + [[radius]])
    a, b = nodes[:-1, None], nodes[1:, None]
    x = 0.5 * (b - a) * _GL_X[None, :] + 0.5 * (a + b)
    w = 0.5 * (b - a) * _GL_W[None, :]
    return float(2.0 * np.sum(w * f(x)))


def kernel_fourier(kernel: Kernel, omega: float, radius: float | None = None) -> float:
    """Numeric Fourier transform ``int phi(t) exp(-2 pi i omega t) dt`` of an even kernel."""
    R = kernel.support_radius if radius is None else radius
    if not math.isfinite(R):
        raise DomainError("pass an explicit integration radius for unbounded kernels")
    edges = np.linspace(0.0, R, max(8, int(math.ceil(R * max(1.0, abs(omega)) * 16))) + 1)
    a, b = edges[:-1, None], edges[1:, None]
    x = 0.5 * (b - a) * _GL_X[None, :] + 0.5 * (a + b)
    w = 0.5 * (b - a) * _GL_W[None, :]
    return float(2.0 * np.sum(w * kernel.evaluate(x) * np.cos(2.0 * math.pi * omega * x)))


# --- margin T0 ---------------------------------------------------------------------------------


def compute_T0(kernel: Kernel, alpha: float, K: int, lam: float, tol: float = T0_TOL) -> float:
    """Smallest ``T`` with ``int_{T - 1/lam}^inf rho <= 2^(-alpha K lam)``, to within ``tol``.

    Bracketing followed by bisection on the nonincreasing map
    ``T -> tail_integral(T - 1/lam)``; the returned value always satisfies the
    inequality.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    if isinstance(K, bool) or int(K) != K or K < 1:
        raise DomainError(f"K must be an integer >= 1, got {K!r}")
    if not lam > 1:
        raise DomainError(f"lambda must exceed 1, got {lam!r}")
    target = 2.0 ** (-alpha * K * lam)
    shift = 1.0 / lam

    def ok(T: float) -> bool:
        return kernel.tail_integral(T - shift) <= target

    if kernel.compact:
        hi = kernel.support_radius + shift
    else:
        hi = 1.0
        while not ok(hi):
            hi *= 2.0
            if hi > 1e7:
                raise UnreachableTarget(f"tail integral never drops below {target:.3g}")
    if not ok(hi):
        raise UnreachableTarget(f"tail integral never drops below {target:.3g} on the kernel domain")
    step = 1.0
    lo = hi - step
    while ok(lo):
        step *= 2.0
        lo = hi - step
        if step > 1e7:
            raise UnreachableTarget("tail integral does not exceed the target anywhere")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


# --- Poisson row sums ----------------------------------------------------------------------


class RowSum(NamedTuple):
    value: float
    deviation: float
    truncated: bool


def poisson_row_sum(kernel: Kernel, lam: float, n: int, j_range: tuple[int, int] | None = None) -> RowSum:
    """``(1/lam) sum_j phi((j - n)/lam)`` over ``j_range`` and its deviation from 1.

    ``truncated`` is set when the envelope mass outside the window may exceed
    1e-12.  Without ``j_range`` the window covers the kernel support.
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    if j_range is None:
        if not kernel.compact:
            raise DomainError("j_range is required for unbounded kernels")
        reach = int(math.ceil(kernel.support_radius * lam)) + 1
        j_range = (n - reach, n + reach)
    j_min, j_max = map(int, j_range)
    j = np.arange(j_min, j_max + 1, dtype=float)
    value = float(np.sum(kernel.evaluate((j - n) / lam)) / lam)
    right = (j_max - n) / lam
    left = (n - j_min) / lam
    missing = kernel.tail_integral(right) + kernel.tail_integral(left)
    return RowSum(value, abs(value - 1.0), missing > 1e-12)


def row_sum_constant(kernel: Kernel, lam: float, ns=range(-8, 9)) -> float:
    """``max_n lam * |row_sum(n) - 1|``: the constant in the ``c / lam`` deviation bound."""
    return max(lam * poisson_row_sum(kernel, lam, int(n)).deviation for n in ns)


def write_kernel_table(kernel: Kernel, path: str | Path, t_grid=None) -> Path:
    """CSV sidecar ``t,phi(t)`` on a reference grid."""
    if t_grid is None:
        R = kernel.support_radius if kernel.compact else 10.0
        t_grid = np.linspace(-R, R, 801)
    t_grid = np.asarray(t_grid, dtype=float)
    return write_csv(path, ["t", "phi(t)"], zip(t_grid.tolist(), kernel.evaluate(t_grid).tolist()))
