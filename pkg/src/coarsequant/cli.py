"""Command-line front end.

Each subcommand writes CSV artifacts (and, unless ``--no-plots``, PNG figures)
into ``--out`` together with ``manifest.txt``, a flat ``key=value`` file that
``coarsequant run`` replays to the same bytes.

Exit status: 0 on success, 2 when a verification record fails, 1 on usage or
domain errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .deviations import (
    beta,
    bernoulli,
    binomial_tail,
    chernoff_bound,
    mc_tail,
    threshold_count,
    uniform,
    verify_prop1,
    write_prop1_report,
)
from .entropy import bound_curve, mu_grid, reference_upper_rate, theorem_alpha
from .epsnet import enumerate_survivors, kernel_instance, toy_average_instance, write_counting_reports
from .errors import DomainError, UnreachableTarget
from .io import atomic_write_text, write_csv
from .kernels import (
    Kernel,
    compute_T0,
    make_bspline_kernel,
    make_exponential_kernel,
    make_lowpass_kernel,
    make_triangle_kernel,
    write_kernel_table,
)
from .reconstruction import (
    Encoder,
    decay_experiment,
    fit_rate,
    seeded_ensemble,
    write_decay_curve,
    write_fit,
)

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2

# slack on the exponential-fit consistency check, in rate units
FIT_MARGIN = 0.05


class UsageError(Exception):
    pass


# --- parameter parsing ------------------------------------------------------------------


def parse_floats(text: str) -> list[float]:
    """Comma list; an item ``start:stop:step`` expands to an inclusive range."""
    out: list[float] = []
    for item in str(text).split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            parts = item.split(":")
            if len(parts) != 3:
                raise UsageError(f"bad range {item!r}, expected start:stop:step")
            start, stop, step = (float(p) for p in parts)
            if step <= 0 or stop < start:
                raise UsageError(f"bad range {item!r}")
            count = int(math.floor((stop - start) / step + 1e-9))
            out.extend(round(start + i * step, 12) for i in range(count + 1))
        else:
            out.append(float(item))
    if not out:
        raise UsageError("empty list")
    return out


def parse_ints(text: str) -> list[int]:
    values = parse_floats(text)
    if any(v != int(v) for v in values):
        raise UsageError(f"expected integers, got {text!r}")
    return [int(v) for v in values]


def parse_interval(text: str) -> tuple[float, float]:
    values = parse_floats(text)
    if len(values) != 2 or not values[0] < values[1]:
        raise UsageError(f"interval must be 'lo,hi' with lo < hi, got {text!r}")
    return values[0], values[1]


def parse_kernel(spec: str) -> Kernel:
    """``lowpass[:lambda0]``, ``bspline[:order[:scale]]``, ``triangle[:scale]``, ``exponential[:rate]``."""
    name, *args = str(spec).split(":")
    try:
        nums = [float(a) for a in args]
    except ValueError:
        raise UsageError(f"bad kernel spec {spec!r}") from None
    if name == "lowpass" and len(nums) <= 1:
        return make_lowpass_kernel(*nums)
    if name == "bspline" and len(nums) <= 2:
        if nums and nums[0] != int(nums[0]):
            raise UsageError("B-spline order must be an integer")
        return make_bspline_kernel(int(nums[0]) if nums else 4, *nums[1:])
    if name == "triangle" and len(nums) <= 1:
        return make_triangle_kernel(*nums)
    if name == "exponential" and len(nums) <= 1:
        return make_exponential_kernel(*nums)
    raise UsageError(f"unknown kernel spec {spec!r}")


# --- manifest -----------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentManifest:
    """Subcommand plus every parameter as text; enough to replay the run exactly."""

    subcommand: str
    params: dict = field(default_factory=dict)
    version: str = __version__

    def to_text(self) -> str:
        lines = [f"subcommand={self.subcommand}", f"version={self.version}"]
        lines += [f"{k}={v}" for k, v in sorted(self.params.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentManifest":
        values: dict[str, str] = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"manifest line without '=': {raw!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
        if "subcommand" not in values:
            raise UsageError("manifest has no subcommand")
        sub = values.pop("subcommand")
        version = values.pop("version", __version__)
        return cls(sub, values, version)

    def to_argv(self) -> list[str]:
        argv = [self.subcommand]
        for key, value in sorted(self.params.items()):
            flag = "--" + key.replace("_", "-")
            if value in ("true", "false"):
                if value == "true":
                    argv.append(flag)
            else:
                argv += [flag, value]
        return argv


# --- subcommands ------------------------------------------------------------------------------


class Outcome:
    def __init__(self, out: Path, plots: bool):
        self.out = out
        self.plots = plots
        self.failures: list[str] = []
        self.files: list[Path] = []

    def wrote(self, path: Path) -> None:
        self.files.append(path)

    def fail(self, message: str) -> None:
        self.failures.append(message)


def cmd_bounds(args, res: Outcome) -> None:
    grid = mu_grid(args.mu_step)
    curves = [bound_curve(K, grid) for K in parse_ints(args.K)]
    for curve in curves:
        rows = list(curve.points)
        res.wrote(write_csv(res.out / f"bounds_K{curve.bit_depth}.csv", ["mu", "alpha"], rows))
        alphas = curve.alphas
        if any(b > a + 1e-15 for a, b in zip(alphas, alphas[1:])):
            res.fail(f"K={curve.bit_depth}: curve not monotone")
        if abs(alphas[0] - 1.0) > 1e-12 or (curve.mus[-1] == 1.0 and abs(alphas[-1] - 1.0 + 1.0 / curve.bit_depth) > 1e-12):
            res.fail(f"K={curve.bit_depth}: endpoint values off")
    ref = reference_upper_rate()
    res.wrote(write_csv(res.out / "reference.csv", ["rate", "amplitude_ceiling"], [(ref.rate, ref.amplitude_ceiling)]))
    if res.plots:
        from .plotting import plot_bound_curves

        res.wrote(plot_bound_curves(curves, ref, res.out / "bounds.png"))


def cmd_decay(args, res: Outcome) -> None:
    encoder = Encoder(args.scheme, args.K, args.order)
    kernel = parse_kernel(args.kernel)
    ensemble = seeded_ensemble(
        args.seed, args.ensemble_size, args.mu, num_terms=args.terms, constant_levels=args.constant_levels
    )
    curve = decay_experiment(
        ensemble, encoder, kernel, parse_floats(args.lambdas), interval=parse_interval(args.interval), alpha=args.alpha
    )
    res.wrote(write_decay_curve(curve, res.out / "decay.csv"))
    rows = [(i, a, f, th) for i, x in enumerate(ensemble) for a, f, th in x.terms]
    res.wrote(write_csv(res.out / "ensemble.csv", ["signal", "a", "f", "theta"], rows))
    fits = []
    if len(curve.points) >= 3 and all(e > 0 for _, e in curve.points):
        fits = [fit_rate(curve, "exponential"), fit_rate(curve, "polynomial")]
        res.wrote(write_fit(fits, res.out / "fit.csv"))
        if args.mu < 1:
            ceiling = theorem_alpha(args.mu, args.K)
            if fits[0].rate / args.K > ceiling + FIT_MARGIN:
                res.fail(f"fitted exponential rate {fits[0].rate:.4g} exceeds K * alpha(mu) = {args.K * ceiling:.4g}")
    if res.plots:
        from .plotting import plot_decay_curve

        res.wrote(plot_decay_curve(curve, fits, res.out / "decay.png"))


_DISTRIBUTIONS: dict[str, Callable] = {
    "uniform": uniform,
    "beta22": lambda: beta(2.0, 2.0),
    "arcsine": lambda: beta(0.5, 0.5),
    "bernoulli": lambda: bernoulli(0.5),
}


def cmd_ldp(args, res: Outcome) -> None:
    records = verify_prop1(args.nmax, parse_floats(args.p_grid), parse_floats(args.a_grid))
    res.wrote(write_prop1_report(records, res.out / "tails.csv"))
    bad = [r for r in records if not r.satisfied]
    if bad:
        res.fail(f"{len(bad)} tail rows exceed the large-deviation bound")
    rows = []
    for i, name in enumerate(args.distributions.split(",")):
        name = name.strip()
        if name not in _DISTRIBUTIONS:
            raise UsageError(f"unknown distribution {name!r}; choose from {sorted(_DISTRIBUTIONS)}")
        dist = _DISTRIBUTIONS[name]()
        n, a = args.mc_n, args.mc_a
        # substream i of the run seed
        sub = int(np.random.SeedSequence([int(args.seed), i]).generate_state(1)[0])
        mc = mc_tail(dist, n, a, args.trials, seed=sub)
        bern = binomial_tail(n, threshold_count(n, a), dist.mean) if 0 < dist.mean < 1 else float("nan")
        bound = chernoff_bound(n, a, dist.mean) if dist.mean < a <= 1 else 1.0
        ok = mc.estimate <= bound + 3.0 * mc.stderr
        if not ok:
            res.fail(f"{name}: Monte-Carlo tail {mc.estimate:.4g} above the bound {bound:.4g}")
        rows.append((name, n, a, dist.mean, mc.trials, mc.estimate, mc.stderr, bern, bound, ok))
    header = ["distribution", "n", "a", "mean", "trials", "estimate", "stderr", "bernoulli_tail", "chernoff", "satisfied"]
    res.wrote(write_csv(res.out / "tails_mc.csv", header, rows))
    if res.plots:
        from .plotting import plot_tail_bounds

        res.wrote(plot_tail_bounds(records, res.out / "tails.png"))


def cmd_epsnet(args, res: Outcome) -> None:
    reports = []
    Ks = parse_ints(args.K)
    if args.toy_average:
        for M in parse_ints(args.M):
            for K in Ks:
                for a in parse_floats(args.a):
                    reports.append(enumerate_survivors(toy_average_instance(M, K, a)))
    else:
        kernel = parse_kernel(args.kernel)
        for lam in parse_floats(args.lam):
            for K in Ks:
                for mu in parse_floats(args.mu):
                    inst = kernel_instance(kernel, lam, args.half_length, K, mu, args.delta, alpha=args.alpha)
                    reports.append(enumerate_survivors(inst))
    res.wrote(write_counting_reports(reports, res.out / "epsnet.csv"))
    header = ["M", "K", "lambda", "threshold", "survivors", "level_sum_count", "loosened", "loosened_measured", "bound_measured"]
    detail = [
        (r.M, r.K, "" if r.lam is None else r.lam, r.threshold, r.survivor_count, r.bernoulli_bound, r.loosened, r.loosened_measured, r.bound_measured)
        for r in reports
    ]
    res.wrote(write_csv(res.out / "epsnet_detail.csv", header, detail))
    bad = [r for r in reports if not r.satisfied]
    if bad:
        res.fail(f"{len(bad)} counting instances violate their bound")
    if res.plots:
        from .plotting import plot_counting

        res.wrote(plot_counting(reports, res.out / "epsnet.png"))


def cmd_t0(args, res: Outcome) -> None:
    kernel = parse_kernel(args.kernel)
    rows = []
    for alpha in parse_floats(args.alpha):
        for K in parse_ints(args.K):
            for lam in parse_floats(args.lambdas):
                rows.append((lam, alpha, K, compute_T0(kernel, alpha, K, lam)))
    res.wrote(write_csv(res.out / "t0.csv", ["lambda", "alpha", "K", "T0"], rows))
    res.wrote(write_kernel_table(kernel, res.out / "kernel.csv"))
    if res.plots:
        from .plotting import plot_kernel, plot_t0

        res.wrote(plot_t0(rows, res.out / "t0.png"))
        res.wrote(plot_kernel(kernel, res.out / "kernel.png"))


# --- parser ---------------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default="results", help="output directory (default: results)")
    p.add_argument("--no-plots", action="store_true", help="write CSV only")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coarsequant", description="Numerical lab for oversampled coarse quantization.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser, metavar="COMMAND")

    p = sub.add_parser("bounds", help="lower-bound rate curves and the reference rate")
    p.add_argument("--K", default="1", help="bit depths, comma list (default: 1)")
    p.add_argument("--mu-step", type=float, default=0.01)
    _common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("decay", help="ensemble sup error against oversampling rate")
    p.add_argument("--scheme", choices=["sigma_delta", "pcm"], default="sigma_delta")
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--lambdas", default="8,16,32,64,128")
    p.add_argument(
        "--kernel",
        default="lowpass:4",
        help="lowpass[:lambda0], bspline[:order[:scale]], triangle[:scale] or exponential[:rate]",
    )
    p.add_argument("--ensemble-size", type=int, default=8, help="random multi-tone members")
    p.add_argument("--constant-levels", type=int, default=128, help="constant members with levels in [-mu, mu]")
    p.add_argument("--terms", type=int, default=3)
    p.add_argument("--interval", default="0,8")
    p.add_argument("--alpha", type=float, default=1.0, help="truncation rate for the sample window")
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("ldp", help="exact binomial tails and Monte-Carlo tails of bounded sums")
    p.add_argument("--nmax", type=int, default=30)
    p.add_argument("--p-grid", default="0.1:0.9:0.1", help="biases; lists accept start:stop:step items")
    p.add_argument("--a-grid", default="0.05:1:0.05", help="mean thresholds; rows with a <= p are skipped")
    p.add_argument("--distributions", default="uniform,beta22,arcsine,bernoulli")
    p.add_argument("--mc-n", type=int, default=10)
    p.add_argument("--mc-a", type=float, default=0.8)
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    p.set_defaults(func=cmd_ldp)

    p = sub.add_parser("epsnet", help="exhaustive survivor counts against the counting bound")
    p.add_argument("--toy-average", action="store_true", help="plain averaging instances")
    p.add_argument("--M", default="4", help="sequence lengths for --toy-average")
    p.add_argument("--a", default="0.5", help="thresholds for --toy-average")
    p.add_argument("--K", default="1", help="bit depths")
    p.add_argument("--kernel", default="bspline:3:0.5", help="kernel spec (default: bspline:3:0.5)")
    p.add_argument("--lam", default="2", help="oversampling rates")
    p.add_argument("--half-length", type=float, default=3.0, help="half length a of the interval [-a, a]")
    p.add_argument("--mu", default="0.8", help="amplitudes; the enforced threshold is mu - 3 delta")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=0.5, help="rate constant defining the margin T0")
    _common(p)
    p.set_defaults(func=cmd_epsnet)

    p = sub.add_parser("t0", help="truncation margin T0 over a lambda grid")
    p.add_argument("--kernel", default="exponential:1")
    p.add_argument("--alpha", default="0.05,0.1,0.5")
    p.add_argument("--K", default="1,2")
    p.add_argument("--lambdas", default="4:64:1")
    _common(p)
    p.set_defaults(func=cmd_t0)

    p = sub.add_parser("run", help="replay a manifest file")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="override the output directory")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=None)
    return parser


def _manifest_for(parser: argparse.ArgumentParser, args: argparse.Namespace) -> ExperimentManifest:
    skip = {"subcommand", "func", "out", "no_plots"}
    params = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        if isinstance(value, bool):
            params[key] = "true" if value else "false"
        else:
            params[key] = repr(value) if isinstance(value, float) else str(value)
    return ExperimentManifest(args.subcommand, params)


def run_manifest(manifest: ExperimentManifest, out: str | Path, plots: bool = True) -> int:
    argv = manifest.to_argv() + ["--out", str(out)] + ([] if plots else ["--no-plots"])
    return main(argv)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        print("coarsequant: error: a command is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.subcommand == "run":
            manifest = ExperimentManifest.from_text(Path(args.manifest).read_text())
            if manifest.subcommand == "run":
                raise UsageError("a manifest cannot replay another manifest")
            out = args.out if args.out is not None else str(Path(args.manifest).parent)
            return run_manifest(manifest, out, plots=not args.no_plots)
        manifest = _manifest_for(parser, args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        res = Outcome(out, plots=not args.no_plots)
        args.func(args, res)
        atomic_write_text(out / "manifest.txt", manifest.to_text())
    except (UsageError, DomainError, UnreachableTarget, OSError) as exc:
        print(f"coarsequant: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for path in res.files:
        print(path)
    if res.failures:
        for msg in res.failures:
            print(f"coarsequant: verification failed: {msg}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
