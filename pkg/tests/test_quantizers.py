import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from coarsequant.errors import DomainError
from coarsequant.quantizers import (
    SECOND_ORDER_CLIP,
    make_alphabet,
    pcm_encode,
    sigma_delta_encode,
    write_stream,
)


def test_alphabets():
    assert make_alphabet(1).levels == (-1.0, 1.0)
    assert make_alphabet(2).levels == pytest.approx((-1, -1 / 3, 1 / 3, 1), abs=1e-16)
    for K in range(1, 7):
        a = make_alphabet(K)
        assert a.size == 2**K
        assert a.spacing == pytest.approx(2 / (2**K - 1))
        assert a.levels == tuple(-v for v in reversed(a.levels))


@pytest.mark.parametrize("K", [0, -1, 1.5, True])
def test_alphabet_domain(K):
    with pytest.raises(DomainError):
        make_alphabet(K)


def test_pcm_rounding():
    a = make_alphabet(2)
    assert pcm_encode([0.3], a).values[0] == pytest.approx(1 / 3)
    assert pcm_encode([0.0], a).values[0] == pytest.approx(1 / 3)
    s = pcm_encode([2.0], a)
    assert s.values[0] == 1.0 and s.overload
    assert not pcm_encode([0.99, -1.0], a).overload
    assert make_alphabet(1).nearest([0.0])[0] == 1.0


@given(arrays(float, 50, elements=st.floats(-1.5, 1.5)), st.integers(1, 4))
def test_pcm_is_nearest(x, K):
    a = make_alphabet(K)
    q = pcm_encode(x, a).values
    lv = a.as_array()
    best = np.min(np.abs(x[:, None] - lv[None, :]), axis=1)
    assert np.allclose(np.abs(q - x), best, atol=1e-15)


def test_first_order_zero_input():
    s = sigma_delta_encode(np.zeros(6), make_alphabet(1))
    assert s.values.tolist() == [1, -1, 1, -1, 1, -1]
    assert s.state_trace[:, 0].tolist() == [-1, 0, -1, 0, -1, 0]


def test_first_order_full_scale():
    s = sigma_delta_encode(np.ones(10), make_alphabet(1))
    assert np.all(s.values == 1) and np.all(s.state_trace == 0)


@given(
    arrays(float, 200, elements=st.floats(-1, 1)),
    st.floats(-1, 1),
)
def test_first_order_one_bit_stable(x, u0):
    s = sigma_delta_encode(x, make_alphabet(1), initial_state=u0)
    assert np.max(np.abs(s.state_trace)) <= 1.0 + 1e-12


@given(arrays(float, 200, elements=st.floats(-1, 1)), st.integers(1, 3))
def test_first_order_multibit_state_bound(x, K):
    a = make_alphabet(K)
    s = sigma_delta_encode(x, a)
    assert np.max(np.abs(s.state_trace)) <= max(1.0, a.spacing / 2) + 1e-12


@given(arrays(float, 120, elements=st.floats(-1, 1)))
def test_first_order_telescopes(x):
    # the running sum of x - q is the state
    s = sigma_delta_encode(x, make_alphabet(1))
    assert np.allclose(np.cumsum(x - s.values), s.state_trace[:, 0], atol=1e-9)


def test_second_order_bounded_and_clipped():
    rng = np.random.default_rng(0)
    x = 0.5 * np.cos(2 * np.pi * 0.01 * np.arange(4000) + 0.3) + 0.05 * rng.standard_normal(4000)
    s = sigma_delta_encode(np.clip(x, -0.6, 0.6), make_alphabet(1), order=2)
    assert np.max(np.abs(s.state_trace)) <= SECOND_ORDER_CLIP
    assert s.scheme == "sigma_delta2"
    # one-bit output averages to the input
    assert abs(np.mean(s.values) - np.mean(np.clip(x, -0.6, 0.6))) < 0.01


def test_second_order_counts_clips():
    s = sigma_delta_encode(np.full(200, 1.0), make_alphabet(1), order=2, initial_state=[3.9, 3.9])
    assert s.clip_events > 0


def test_encoder_domain():
    with pytest.raises(DomainError):
        sigma_delta_encode([0.1], make_alphabet(1), order=3)
    with pytest.raises(DomainError):
        sigma_delta_encode([0.1], make_alphabet(1), order=2, initial_state=0.0)


def test_restrict_and_window():
    s = sigma_delta_encode(np.zeros(10), make_alphabet(1), n_min=-3)
    assert s.window == (-3, 6)
    r = s.restrict(0, 100)
    assert r.window == (0, 6) and len(r) == 7
    assert r.values.tolist() == s.values[3:].tolist()
    assert len(s.restrict(20, 30)) == 0


def test_stream_dump_headers(tmp_path):
    a = make_alphabet(1)
    x = np.zeros(3)
    for stream, header in [
        (pcm_encode(x, a), "n,q"),
        (sigma_delta_encode(x, a), "n,q,u"),
        (sigma_delta_encode(x, a, order=2), "n,q,u1,u2"),
    ]:
        text = write_stream(stream, tmp_path / "s.csv").read_text().splitlines()
        assert text[0] == header and len(text) == 4
