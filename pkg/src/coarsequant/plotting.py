"""PNG figures for the CLI reports.

Everything draws on a standalone :class:`matplotlib.figure.Figure` with the Agg
canvas, so no global pyplot state or display is touched.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .deviations import TailBoundRecord
from .entropy import BoundCurve, ReferenceRate
from .kernels import Kernel
from .reconstruction import DecayCurve, Fit

__all__ = [
    "plot_bound_curves",
    "plot_decay_curve",
    "plot_tail_bounds",
    "plot_counting",
    "plot_t0",
    "plot_kernel",
]

DPI = 120


def _figure(width: float = 5.5, height: float = 4.0):
    fig = Figure(figsize=(width, height))
    FigureCanvasAgg(fig)
    return fig, fig.add_subplot(1, 1, 1)


def _save(fig: Figure, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    # fixed metadata keeps the bytes reproducible
    fig.savefig(path, dpi=DPI, metadata={"Software": None})
    return path


def plot_bound_curves(curves: Sequence[BoundCurve], reference: ReferenceRate | None, path: str | Path) -> Path:
    """Lower-bound rate vs amplitude, one line per bit depth, plus the constructive reference point."""
    fig, ax = _figure()
    for curve in curves:
        ax.plot(curve.mus, curve.alphas, label=f"lower bound, K={curve.bit_depth}")
    if reference is not None:
        ax.plot(
            [reference.amplitude_ceiling],
            [reference.rate],
            marker="o",
            linestyle="none",
            color="black",
            label=f"achieved, r={reference.rate:g}",
        )
    ax.set_xlabel("amplitude mu")
    ax.set_ylabel("rate alpha (bits per sample)")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    ax.grid(alpha=0.3)
    ax.legend(loc="lower left", fontsize="small")
    return _save(fig, path)


def plot_decay_curve(curve: DecayCurve, fits: Sequence[Fit], path: str | Path) -> Path:
    fig, ax = _figure()
    lam, err = curve.lambdas, curve.errors
    ax.loglog(lam, err, "o-", base=2, label=f"{curve.scheme} / {curve.kernel.split('(')[0]}")
    ref = np.array([lam[0], lam[-1]], dtype=float)
    for fit in fits:
        if fit.model == "polynomial":
            ax.loglog(ref, err[0] * (ref / ref[0]) ** -fit.rate, "--", base=2, label=f"lam^-{fit.rate:.3g}")
        else:
            ax.loglog(ref, err[0] * 2.0 ** (-fit.rate * (ref - ref[0])), ":", base=2, label=f"2^-{fit.rate:.3g} lam")
    ax.set_xlabel("oversampling rate lambda")
    ax.set_ylabel("ensemble sup error")
    ax.grid(alpha=0.3, which="both")
    ax.legend(fontsize="small")
    return _save(fig, path)


def plot_tail_bounds(records: Sequence[TailBoundRecord], path: str | Path, pairs=((0.8, 0.5), (0.7, 0.3), (0.9, 0.6))) -> Path:
    """Exact tail and its large-deviation bound against ``n`` for a few ``(a, p)`` pairs."""
    fig, ax = _figure()
    for i, (a, p) in enumerate(pairs):
        rows = [r for r in records if abs(r.a - a) < 1e-12 and abs(r.p - p) < 1e-12]
        if not rows:
            continue
        n = [r.n for r in rows]
        color = f"C{i}"
        ax.semilogy(n, [r.exact_tail for r in rows], "o", ms=3, color=color, label=f"exact a={a:g} p={p:g}")
        ax.semilogy(n, [r.chernoff for r in rows], "-", color=color, label="bound")
    ax.set_xlabel("n")
    ax.set_ylabel("P(S_n >= n a)")
    ax.grid(alpha=0.3, which="both")
    ax.legend(fontsize="x-small", ncol=2)
    return _save(fig, path)


def plot_counting(reports, path: str | Path) -> Path:
    """Survivor counts against the chain bounds, one group of markers per report."""
    fig, ax = _figure(6.0, 4.0)
    x = np.arange(len(reports))
    ax.semilogy(x, [max(r.survivor_count, 0.5) for r in reports], "o", label="survivors")
    ax.semilogy(x, [r.bernoulli_bound for r in reports], "_", ms=12, label="level-sum count")
    ax.semilogy(x, [r.bound_N for r in reports], "^", label="entropy bound")
    ax.semilogy(x, [r.total for r in reports], "k.", ms=3, label="all sequences")
    ax.set_xlabel("instance")
    ax.set_ylabel("count")
    ax.grid(alpha=0.3, which="both")
    ax.legend(fontsize="small")
    return _save(fig, path)


def plot_t0(rows: Sequence[tuple], path: str | Path) -> Path:
    """``rows`` are ``(lambda, alpha, K, T0)``; one line per ``(alpha, K)``."""
    fig, ax = _figure()
    groups: dict[tuple, list] = {}
    for lam, alpha, K, t0 in rows:
        groups.setdefault((alpha, K), []).append((lam, t0))
    for (alpha, K), pts in sorted(groups.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", ms=3, label=f"alpha={alpha:g}, K={K}")
    ax.set_xlabel("lambda")
    ax.set_ylabel("T0")
    ax.grid(alpha=0.3)
    ax.legend(fontsize="small")
    return _save(fig, path)


def plot_kernel(kernel: Kernel, path: str | Path, radius: float | None = None) -> Path:
    fig, ax = _figure()
    r = radius if radius is not None else min(kernel.support_radius, 12.0)
    t = np.linspace(-r, r, 2001)
    ax.plot(t, kernel.evaluate(t), label="phi")
    ax.plot(t, kernel.tail_envelope(t), "--", lw=0.8, label="envelope")
    ax.set_xlabel("t")
    ax.grid(alpha=0.3)
    ax.legend(fontsize="small")
    ax.set_title(kernel.descriptor(), fontsize="small")
    return _save(fig, path)
