"""Acceptance criteria 1-10, each at its stated tolerance and runtime budget.

Every criterion prints one ``PASS``/``FAIL`` line; under pytest the lines are
collected into the "acceptance criteria" section of the terminal summary.  The
module also runs standalone: ``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from coarsequant.cli import main as cli_main
from coarsequant.deviations import binomial_tail, chernoff_bound, mc_tail, uniform, verify_prop1
from coarsequant.entropy import binary_entropy, reference_upper_rate, theorem_alpha
from coarsequant.epsnet import enumerate_survivors, kernel_instance, toy_average_instance
from coarsequant.io import read_csv
from coarsequant.kernels import (
    compute_T0,
    make_bspline_kernel,
    make_exponential_kernel,
    make_lowpass_kernel,
    make_triangle_kernel,
    poisson_row_sum,
    row_sum_constant,
)
from coarsequant.quantizers import QuantizedStream, make_alphabet, sigma_delta_encode
from coarsequant.reconstruction import (
    padded_window,
    sup_error,
    truncated_deviation,
)
from coarsequant.signals import random_bandlimited, sample_signal

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # standalone run
    ACCEPTANCE_LINES = []

mpmath.mp.dps = 40


def h_exact(p):
    p = mpmath.mpf(p)
    if p in (0, 1):
        return mpmath.mpf(0)
    return -(p * mpmath.log(p, 2) + (1 - p) * mpmath.log(1 - p, 2))


def report(number, title, checks, elapsed, budget):
    """Record and print the verdict; ``checks`` maps a description to a bool."""
    within = elapsed < budget
    failed = [name for name, ok in checks.items() if not ok]
    if not within:
        failed.append(f"runtime {elapsed:.2f}s >= {budget:g}s")
    verdict = "PASS" if not failed else "FAIL"
    line = f"{verdict} {number}: {title} ({elapsed:.2f}s / {budget:g}s)"
    if failed:
        line += " -- " + "; ".join(failed)
    ACCEPTANCE_LINES.append(line)
    print(line)
    return not failed


def test_criterion_01_bound_curve(tmp_path):
    start = time.perf_counter()
    code = cli_main(["bounds", "--K", "1", "--mu-step", "0.01", "--no-plots", "--out", str(tmp_path)])
    _, rows = read_csv(tmp_path / "bounds_K1.csv")
    mus = [float(r[0]) for r in rows]
    alphas = [float(r[1]) for r in rows]
    elapsed = time.perf_counter() - start
    err = max(abs(a - float(h_exact((1 + mpmath.mpf(i) / 100) / 2))) for i, a in enumerate(alphas))
    checks = {
        "exit 0": code == 0,
        "grid 0..1 step 0.01": len(mus) == 101 and all(abs(m - i / 100) < 1e-15 for i, m in enumerate(mus)),
        f"max |alpha - h| = {err:.2e} <= 1e-9": err <= 1e-9,
        "alpha(0) = 1": abs(alphas[0] - 1) <= 1e-12,
        "alpha(1) = 0": abs(alphas[-1]) <= 1e-12,
        "nonincreasing": all(b <= a for a, b in zip(alphas, alphas[1:])),
    }
    assert report(1, "lower-bound curve, K=1", checks, elapsed, 1.0)


def test_criterion_02_reference_overlay():
    start = time.perf_counter()
    ref = reference_upper_rate()
    value = theorem_alpha(0.05, 1)
    elapsed = time.perf_counter() - start
    oracle = float(h_exact(mpmath.mpf("0.525")))
    checks = {
        "reference = (0.102, 0.05)": (ref.rate, ref.amplitude_ceiling) == (0.102, 0.05),
        f"alpha(0.05, 1) = {value:.9f} vs 0.998195": abs(value - 0.998195) <= 1e-6 and abs(value - oracle) <= 1e-12,
        "gap to reference": value > ref.rate,
    }
    assert report(2, "reference rate overlay", checks, elapsed, 1.0)


def test_criterion_03_exact_tails():
    start = time.perf_counter()
    p_grid = [i / 10 for i in range(1, 10)]
    a_grid = [i / 20 for i in range(0, 21)]
    records = verify_prop1(30, p_grid, a_grid)
    spot = binomial_tail(10, 8, 0.5, exact=True)
    bound = chernoff_bound(10, 0.8, 0.5)
    elapsed = time.perf_counter() - start
    ends = [r for r in records if r.a == 1.0]
    expected_rows = sum(1 for _ in range(30) for p in p_grid for a in a_grid if a > p)
    checks = {
        f"{len(records)} rows, all a > p": len(records) == expected_rows and all(r.a > r.p for r in records),
        "zero violations": all(r.satisfied for r in records),
        "a = 1 equality within 1e-15": bool(ends) and all(abs(r.exact_tail - r.chernoff) <= 1e-15 for r in ends),
        "P(S10 >= 8) = 0.0546875 exactly": spot == Fraction(56, 1024) and float(spot) == 0.0546875,
        f"bound {bound:.6f} = 0.14552...": abs(bound - 0.14552) < 1e-5,
    }
    assert report(3, "exact tails vs large-deviation bound, n <= 30", checks, elapsed, 5.0)


def test_criterion_04_bounded_sums_monte_carlo():
    start = time.perf_counter()
    mc = mc_tail(uniform(), 10, 0.8, 10**6, seed=20240)
    elapsed = time.perf_counter() - start
    ceiling = 0.0546875 + 3 * mc.stderr
    checks = {
        "1e6 trials": mc.trials == 10**6,
        f"estimate {mc.estimate:.3g} <= {ceiling:.4g}": mc.estimate <= ceiling,
    }
    assert report(4, "uniform sums vs Bernoulli tail, Monte Carlo", checks, elapsed, 30.0)


def test_criterion_05_counting():
    start = time.perf_counter()
    toy = enumerate_survivors(toy_average_instance(4, 1, 0.5))
    violations = 0
    for M in range(4, 21):
        for i in range(1, 10):
            a = i / 10
            r = enumerate_survivors(toy_average_instance(M, 1, a))
            k = math.ceil(M * (1 + a) / 2 - 1e-9)
            exact = Fraction(r.survivor_count, 2**M) == binomial_tail(M, k, 0.5, exact=True)
            if not (exact and r.satisfied and r.survivor_count <= 2 ** (M * binary_entropy((1 + a) / 2)) * (1 + 1e-12)):
                violations += 1
    kernel_reports = []
    for kernel, lam, half in [
        (make_bspline_kernel(3, 0.5), 2.0, 3.0),
        (make_bspline_kernel(3, 1 / 3), 3.0, 3.0),
        (make_bspline_kernel(4, 0.4), 2.0, 3.0),
        (make_lowpass_kernel(), 3.0, 3.0),
    ]:
        for K in (1, 2):
            for mu in (0.3, 0.6, 0.9):
                inst = kernel_instance(kernel, lam, half if K == 1 else half / 2, K, mu, 0.02, alpha=0.5)
                if inst.K * inst.M <= 24:
                    kernel_reports.append(enumerate_survivors(inst))
    elapsed = time.perf_counter() - start
    checks = {
        f"toy survivors {toy.survivor_count} <= {toy.bound_N:.4g}": toy.survivor_count == 5
        and abs(toy.bound_N - 9.48) < 0.01
        and toy.satisfied,
        f"sweep M 4..20, a 0.1..0.9: {violations} violations": violations == 0,
        f"{len(kernel_reports)} kernel instances satisfied": len(kernel_reports) >= 12
        and all(r.satisfied for r in kernel_reports),
    }
    assert report(5, "counting argument at desk scale", checks, elapsed, 120.0)


def test_criterion_06_t0_closed_form():
    start = time.perf_counter()
    kernel = make_exponential_kernel(1.0)
    worst = 0.0
    for alpha in (0.05, 0.1, 0.5):
        for K in (1, 2):
            for lam in range(4, 65):
                t0 = compute_T0(kernel, alpha, K, lam)
                worst = max(worst, abs(t0 - (alpha * K * lam * math.log(2) + 1 / lam)))
    elapsed = time.perf_counter() - start
    assert report(6, "T0 closed form, exponential envelope", {f"max error {worst:.2e} <= 1e-6": worst <= 1e-6}, elapsed, 1.0)


def test_criterion_07_truncation_bound():
    start = time.perf_counter()
    kernels = [
        make_bspline_kernel(3, 1.0),
        make_bspline_kernel(4, 2.0),
        make_exponential_kernel(1.0),
        make_exponential_kernel(0.5),
        make_lowpass_kernel(),
    ]
    rng = np.random.default_rng(7)
    interval = (0.0, 2.0)
    configs = 0
    bad = []
    for kernel in kernels:
        for lam in (4.0, 8.0, 16.0, 32.0):
            for alpha, K in ((0.05, 1), (0.1, 2), (0.5, 1)):
                t0 = compute_T0(kernel, alpha, K, lam)
                reach = t0 + (kernel.support_radius if kernel.compact else 60.0 / kernel.params[0][1])
                window = padded_window(interval, lam, reach)
                size = window[1] - window[0] + 1
                alphabet = make_alphabet(K)
                streams = [
                    QuantizedStream(lam, alphabet, window, rng.choice(alphabet.as_array(), size)),
                    sigma_delta_encode(
                        sample_signal(random_bandlimited(configs, 3, 0.5), lam, window), alphabet, lam=lam, n_min=window[0]
                    ),
                ]
                for stream in streams:
                    chk = truncated_deviation(stream, kernel, alpha, K, lam, interval)
                    configs += 1
                    if not chk.deviation <= chk.bound:
                        bad.append(f"{kernel.descriptor()} lam={lam:g}: {chk.deviation:.3g} > {chk.bound:.3g}")
    elapsed = time.perf_counter() - start
    checks = {f"{configs} configurations, {len(bad)} above 2^(1 - alpha K lam)": not bad}
    assert report(7, "truncation bound", checks, elapsed, 60.0)


def test_criterion_08_row_sums():
    start = time.perf_counter()
    ns = range(-4, 5)
    lams = (4.3, 8.6, 17.2, 34.4)
    checks = {}
    for kernel in (make_bspline_kernel(3, 1.0), make_lowpass_kernel()):
        cs = [row_sum_constant(kernel, lam, ns) for lam in lams]
        devs_ok = all(
            poisson_row_sum(kernel, lam, n).deviation <= c / lam + 1e-15 for lam, c in zip(lams, cs) for n in ns
        )
        # stable: the constant measured at the base rate still bounds every doubling
        stable = all(c <= max(cs[0], 1e-8) for c in cs[1:])
        devs_ok = devs_ok and all(
            poisson_row_sum(kernel, lam, n).deviation <= max(cs[0], 1e-8) / lam + 1e-15 for lam in lams[1:] for n in ns
        )
        checks[f"{kernel.name} c = {', '.join(f'{c:.2g}' for c in cs)}"] = devs_ok and stable and cs[0] < 1.0
    tri = [poisson_row_sum(make_triangle_kernel(1.0 / lam), lam, n).deviation for lam in (1, 2, 3, 4) for n in ns]
    checks["triangle partition of unity exact"] = poisson_row_sum(make_triangle_kernel(1.0), 1, 0).deviation == 0.0 and max(tri) < 1e-15
    elapsed = time.perf_counter() - start
    assert report(8, "row sums deviate by c / lambda", checks, elapsed, 10.0)


def test_criterion_09_sampling_theorem():
    start = time.perf_counter()
    kernel = make_lowpass_kernel()
    x = random_bandlimited(2024, 2, 0.5)
    lam = 8.0
    window = padded_window((0.0, 4.0), lam, kernel.support_radius + 1.0)
    stream = QuantizedStream(lam, make_alphabet(1), window, sample_signal(x, lam, window), scheme="exact")
    err = sup_error(x, stream, kernel, (1.0, 3.0))
    elapsed = time.perf_counter() - start
    checks = {"two-tone, mu = 0.5": len(x.terms) == 2 and abs(x.l1_amplitude - 0.5) < 1e-12, f"sup error {err:.2e} <= 1e-3": err <= 1e-3}
    assert report(9, "unquantized reconstruction at lambda = 8", checks, elapsed, 10.0)


def test_criterion_10_first_order_decay(tmp_path):
    start = time.perf_counter()
    code = cli_main(["decay", "--seed", "0", "--mu", "0.5", "--lambdas", "8,16,32,64,128", "--no-plots", "--out", str(tmp_path)])
    _, rows = read_csv(tmp_path / "fit.csv")
    fits = {r[0]: float(r[1]) for r in rows}
    elapsed = time.perf_counter() - start
    ceiling = theorem_alpha(0.5, 1)
    checks = {
        "exit 0": code == 0,
        f"degree {fits.get('polynomial', float('nan')):.3f} in [0.7, 1.3]": 0.7 <= fits.get("polynomial", -1) <= 1.3,
        f"exponential rate {fits.get('exponential', float('nan')):.4f} <= {ceiling:.6f}": fits.get("exponential", 9) <= ceiling,
    }
    assert report(10, "first-order one-bit sigma-delta decay", checks, elapsed, 120.0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
