"""Numerical lab for the error-decay limits of oversampled coarse quantization."""

__version__ = "0.1.0"

from .entropy import (
    BoundCurve,
    ReferenceRate,
    binary_entropy,
    bound_curve,
    mu_grid,
    reference_upper_rate,
    relative_entropy,
    theorem_alpha,
)
from .errors import DomainError, UnreachableTarget
from .kernels import (
    Kernel,
    compute_T0,
    make_bspline_kernel,
    make_exponential_kernel,
    make_lowpass_kernel,
    make_triangle_kernel,
    poisson_row_sum,
)
from .quantizers import Alphabet, QuantizedStream, make_alphabet, pcm_encode, sigma_delta_encode
from .reconstruction import (
    DecayCurve,
    Encoder,
    decay_experiment,
    fit_rate,
    reconstruct_at,
    seeded_ensemble,
    sup_error,
    truncated_deviation,
)
from .signals import BandlimitedSignal, eval_signal, random_bandlimited, sample_signal

__all__ = [
    "__version__",
    "Alphabet",
    "BandlimitedSignal",
    "BoundCurve",
    "DecayCurve",
    "DomainError",
    "Encoder",
    "Kernel",
    "QuantizedStream",
    "ReferenceRate",
    "UnreachableTarget",
    "binary_entropy",
    "bound_curve",
    "compute_T0",
    "decay_experiment",
    "eval_signal",
    "fit_rate",
    "make_alphabet",
    "make_bspline_kernel",
    "make_exponential_kernel",
    "make_lowpass_kernel",
    "make_triangle_kernel",
    "mu_grid",
    "pcm_encode",
    "poisson_row_sum",
    "random_bandlimited",
    "reconstruct_at",
    "reference_upper_rate",
    "relative_entropy",
    "sample_signal",
    "seeded_ensemble",
    "sigma_delta_encode",
    "sup_error",
    "theorem_alpha",
    "truncated_deviation",
]
