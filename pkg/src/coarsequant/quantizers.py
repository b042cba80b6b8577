"""K-bit alphabets, memoryless PCM rounding and first/second-order sigma-delta encoders."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError
from .io import write_csv

__all__ = [
    "Alphabet",
    "QuantizedStream",
    "make_alphabet",
    "pcm_encode",
    "sigma_delta_encode",
    "write_stream",
    "SECOND_ORDER_CLIP",
]

# state bound for the (not unconditionally stable) one-bit second-order loop
SECOND_ORDER_CLIP = 4.0


@dataclass(frozen=True)
class Alphabet:
    bit_depth: int
    levels: tuple[float, ...]

    @property
    def size(self) -> int:
        return len(self.levels)

    @property
    def spacing(self) -> float:
        return 2.0 / (self.size - 1)

    def as_array(self) -> np.ndarray:
        return np.array(self.levels, dtype=float)

    def nearest(self, values) -> np.ndarray:
        """Nearest level to each value; exact ties go to the larger level.

        Values beyond ``[-1, 1]`` map to the nearest extreme.
        """
        lv = self.as_array()
        v = np.asarray(values, dtype=float)
        idx = np.floor((v + 1.0) / self.spacing).astype(np.int64)
        idx = np.clip(idx, 0, self.size - 2)
        lo, hi = lv[idx], lv[idx + 1]
        pick_hi = np.abs(hi - v) <= np.abs(v - lo)
        return np.where(pick_hi, hi, lo)


def make_alphabet(K: int) -> Alphabet:
    """The ``2^K`` evenly spaced levels in ``[-1, 1]``, extremes included."""
    if isinstance(K, bool) or int(K) != K or K < 1:
        raise DomainError(f"bit depth must be an integer >= 1, got {K!r}")
    L = 2 ** int(K)
    # integer numerators keep the level set exactly symmetric
    levels = tuple((2 * i - (L - 1)) / (L - 1) for i in range(L))
    return Alphabet(int(K), levels)


@dataclass(frozen=True)
class QuantizedStream:
    lam: float
    alphabet: Alphabet
    window: tuple[int, int]
    values: np.ndarray
    state_trace: np.ndarray | None = None
    scheme: str = "pcm"
    overload: bool = False
    clip_events: int = 0
    extras: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        n_min, n_max = self.window
        if len(self.values) != max(0, n_max - n_min + 1):
            raise DomainError("stream length does not match its window")

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.window[0], self.window[1] + 1)

    def __len__(self) -> int:
        return len(self.values)

    def restrict(self, n_min: int, n_max: int) -> "QuantizedStream":
        """Sub-stream on ``[n_min, n_max]`` intersected with the current window."""
        lo, hi = max(n_min, self.window[0]), min(n_max, self.window[1])
        a, b = lo - self.window[0], hi - self.window[0] + 1
        trace = None if self.state_trace is None else self.state_trace[a:b]
        if hi < lo:
            return QuantizedStream(self.lam, self.alphabet, (lo, lo - 1), self.values[:0], trace, self.scheme)
        return QuantizedStream(self.lam, self.alphabet, (lo, hi), self.values[a:b], trace, self.scheme)


def _window(n_min: int, length: int) -> tuple[int, int]:
    return (int(n_min), int(n_min) + length - 1)


def pcm_encode(samples: Sequence[float], alphabet: Alphabet, lam: float = 1.0, n_min: int = 0) -> QuantizedStream:
    """Memoryless nearest-level rounding; samples with ``|x| > 1`` are clamped and flagged."""
    x = np.asarray(samples, dtype=float)
    overload = bool(np.any(np.abs(x) > 1.0))
    q = alphabet.nearest(x)
    return QuantizedStream(lam, alphabet, _window(n_min, len(x)), q, None, "pcm", overload)


def sigma_delta_encode(
    samples: Sequence[float],
    alphabet: Alphabet,
    order: int = 1,
    initial_state: Sequence[float] | float | None = None,
    lam: float = 1.0,
    n_min: int = 0,
) -> QuantizedStream:
    """Sigma-delta encoding of a sample sequence.

    Order 1::

        q_n = Q(u_{n-1} + x_n),   u_n = u_{n-1} + x_n - q_n

    Order 2 (two integrators with distributed feedback, noise transfer
    ``(1 - z^-1)^2``)::

        v_n = v_{n-1} + x_n - q_{n-1}
        w_n = w_{n-1} + v_n - q_{n-1}
        q_n = Q(w_n)

    Both second-order states are clipped to ``[-4, 4]``; clip events are
    counted on the returned stream.  ``Q`` is nearest-level rounding with ties
    toward the larger level.
    """
    if order not in (1, 2):
        raise DomainError(f"sigma-delta order must be 1 or 2, got {order!r}")
    x = np.asarray(samples, dtype=float)
    if initial_state is None:
        state = np.zeros(order)
    else:
        state = np.atleast_1d(np.asarray(initial_state, dtype=float)).copy()
        if state.shape != (order,):
            raise DomainError(f"initial_state must have {order} entries")
    levels = alphabet.as_array()
    spacing = alphabet.spacing
    top = alphabet.size - 2
    n = len(x)
    q = np.empty(n)
    trace = np.empty((n, order))
    overload = bool(np.any(np.abs(x) > 1.0))
    clips = 0

    def quantize(v: float) -> float:
        i = int(np.floor((v + 1.0) / spacing))
        i = 0 if i < 0 else top if i > top else i
        lo, hi = levels[i], levels[i + 1]
        return hi if abs(hi - v) <= abs(v - lo) else lo

    if order == 1:
        u = float(state[0])
        for k in range(n):
            v = u + x[k]
            qk = quantize(v)
            u = v - qk
            q[k] = qk
            trace[k, 0] = u
    else:
        v1, v2 = float(state[0]), float(state[1])
        q_prev = 0.0
        G = SECOND_ORDER_CLIP
        for k in range(n):
            v1 = v1 + x[k] - q_prev
            if abs(v1) > G:
                v1 = G if v1 > 0 else -G
                clips += 1
            v2 = v2 + v1 - q_prev
            if abs(v2) > G:
                v2 = G if v2 > 0 else -G
                clips += 1
            qk = quantize(v2)
            q[k] = qk
            q_prev = qk
            trace[k, 0] = v1
            trace[k, 1] = v2
    return QuantizedStream(
        lam,
        alphabet,
        _window(n_min, n),
        q,
        trace,
        f"sigma_delta{order}",
        overload,
        clips,
    )


def write_stream(stream: QuantizedStream, path: str | Path) -> Path:
    """Stream dump ``n,q,u`` (``n,q,u1,u2`` for second order; ``n,q`` for PCM)."""
    if stream.state_trace is None:
        header = ["n", "q"]
        rows = zip(stream.indices.tolist(), stream.values.tolist())
    elif stream.state_trace.shape[1] == 1:
        header = ["n", "q", "u"]
        rows = zip(stream.indices.tolist(), stream.values.tolist(), stream.state_trace[:, 0].tolist())
    else:
        header = ["n", "q", "u1", "u2"]
        rows = zip(
            stream.indices.tolist(),
            stream.values.tolist(),
            stream.state_trace[:, 0].tolist(),
            stream.state_trace[:, 1].tolist(),
        )
    return write_csv(path, header, rows)
