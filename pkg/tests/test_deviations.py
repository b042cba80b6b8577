import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from coarsequant.deviations import (
    bernoulli,
    beta,
    binomial_strict_head,
    binomial_tail,
    chernoff_bound,
    mc_tail,
    point_mass,
    threshold_count,
    uniform,
    verify_prop1,
    write_prop1_report,
)
from coarsequant.entropy import relative_entropy
from coarsequant.errors import DomainError


def irwin_hall_tail(n, x):
    """Exact P(U_1 + ... + U_n >= x) for i.i.d. uniforms, as a Fraction."""
    x = Fraction(x)
    cdf = sum((-1) ** k * math.comb(n, k) * (x - k) ** n for k in range(0, math.floor(x) + 1))
    return 1 - cdf / math.factorial(n)


def test_binomial_spot_values():
    assert binomial_tail(10, 8, 0.5, exact=True) == Fraction(56, 1024)
    assert binomial_tail(10, 8, 0.5) == 0.0546875
    assert binomial_tail(7, 0, 0.3) == 1.0
    assert binomial_tail(7, 8, 0.3) == 0.0
    assert binomial_tail(9, 9, 0.25, exact=True) == Fraction(1, 4) ** 9


@given(st.integers(1, 64), st.floats(0.01, 0.99), st.data())
def test_tail_and_head_complement(n, p, data):
    k = data.draw(st.integers(0, n + 1))
    assert binomial_tail(n, k, p, exact=True) + binomial_strict_head(n, k, p, exact=True) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(65, 400), st.floats(0.05, 0.95), st.data())
def test_log_domain_matches_high_precision_sum(n, p, data):
    k = data.draw(st.integers(0, n))
    with mpmath.workdps(50):
        pm = mpmath.mpf(p)
        exact = mpmath.fsum(mpmath.binomial(n, j) * pm**j * (1 - pm) ** (n - j) for j in range(k, n + 1))
    assert binomial_tail(n, k, p) == pytest.approx(float(exact), rel=1e-11, abs=1e-300)


def test_chernoff_values():
    assert chernoff_bound(10, 0.8, 0.5) == pytest.approx(2 ** (-10 * relative_entropy(0.8, 0.5)), rel=1e-15)
    assert chernoff_bound(10, 0.8, 0.5) == pytest.approx(0.14552, abs=1e-5)
    assert chernoff_bound(20, 0.8, 0.5) < chernoff_bound(10, 0.8, 0.5)
    for n in (1, 5, 30):
        assert chernoff_bound(n, 1.0, 0.3) == pytest.approx(binomial_tail(n, n, 0.3), rel=1e-14)


@pytest.mark.parametrize("a,p", [(0.5, 0.5), (0.3, 0.5), (1.1, 0.5), (0.8, 0.0)])
def test_chernoff_domain(a, p):
    with pytest.raises(DomainError):
        chernoff_bound(10, a, p)


def test_threshold_count_decimal_grid():
    assert threshold_count(10, 0.7) == 7
    assert threshold_count(20, 0.15) == 3
    assert threshold_count(3, 0.1) == 1


def test_exact_tail_sweep():
    p_grid = [i / 10 for i in range(1, 10)]
    a_grid = [i / 20 for i in range(1, 21)]
    records = verify_prop1(30, p_grid, a_grid)
    assert records and all(r.satisfied for r in records)
    assert all(r.a > r.p for r in records)
    ends = [r for r in records if r.a == 1.0]
    assert ends and all(abs(r.exact_tail - r.chernoff) <= 1e-15 for r in ends)


@settings(max_examples=200)
@given(st.integers(1, 200), st.floats(0.01, 0.98), st.floats(0.0, 1.0))
def test_chernoff_dominates_everywhere(n, p, t):
    a = p + (1 - p) * max(t, 1e-6)
    k = math.ceil(n * a)
    assert binomial_tail(n, k, p) <= chernoff_bound(n, a, p) * (1 + 1e-12)


def test_report_csv(tmp_path):
    records = verify_prop1(3, [0.5], [0.75, 1.0])
    lines = write_prop1_report(records, tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "n,a,p,exact,chernoff,satisfied"
    assert len(lines) == 1 + len(records)
    assert lines[-1].endswith(",true")


def test_bounded_tail_can_exceed_bernoulli_tail():
    # two uniforms, mean threshold 0.55: the bounded sum beats the +-1 walk
    bounded = irwin_hall_tail(2, Fraction(11, 10))
    bern = binomial_tail(2, threshold_count(2, 0.55), 0.5, exact=True)
    assert bounded == Fraction(81, 200)
    assert bern == Fraction(1, 4)
    assert bounded > bern
    assert float(bounded) <= chernoff_bound(2, 0.55, 0.5)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 10, 20])
def test_uniform_tail_below_chernoff(n):
    for a in [i / 20 for i in range(11, 21)]:
        assert float(irwin_hall_tail(n, Fraction(n * a).limit_denominator(10**6))) <= chernoff_bound(n, a, 0.5) + 1e-15


def test_mc_uniform_symmetric_point():
    mc = mc_tail(uniform(), 7, 0.5, 200_000, seed=4)
    assert abs(mc.estimate - 0.5) <= 3 * mc.stderr


def test_mc_uniform_matches_irwin_hall():
    mc = mc_tail(uniform(), 10, 0.8, 10**6, seed=0)
    exact = float(irwin_hall_tail(10, 8))
    assert abs(mc.estimate - exact) <= 4 * mc.stderr
    assert mc.estimate <= binomial_tail(10, 8, 0.5) + 3 * mc.stderr


def test_mc_point_mass_never_hits():
    assert mc_tail(point_mass(0.3), 12, 0.4, 5000, seed=1).estimate == 0.0


def test_mc_bernoulli_matches_binomial():
    mc = mc_tail(bernoulli(0.4), 15, 0.6, 200_000, seed=2)
    assert abs(mc.estimate - binomial_tail(15, 9, 0.4)) <= 4 * mc.stderr


def test_mc_reproducible_and_chunk_independent():
    a = mc_tail(beta(2, 3), 5, 0.6, 300_000, seed=9)
    b = mc_tail(beta(2, 3), 5, 0.6, 300_000, seed=9)
    assert a == b


def test_mc_domain():
    with pytest.raises(DomainError):
        mc_tail(uniform(), 10, 0.8, 999, seed=0)
    with pytest.raises(DomainError):
        mc_tail(uniform(), 0, 0.8, 1000, seed=0)
    with pytest.raises(DomainError):
        beta(0, 1)
