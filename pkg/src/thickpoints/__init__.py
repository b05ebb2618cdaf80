"""Thick points of random unitary characteristic polynomials and Gaussian
multiplicative chaos: exact moment formulas, samplers and Monte Carlo
experiments."""

__version__ = "0.1.0"

from .special_fn import (
    GammaConvention,
    cue_abs_moment_exact,
    fk_normalizer,
    frechet_cdf,
    frechet_pdf,
    frechet_ppf,
    log_barnes_g,
    log_psi,
    psi,
    thickpoint_prob_asymptotic,
    to_theorem_scale,
)
from .cue import (
    FieldSample,
    VerblunskyCoeffs,
    eval_field,
    eval_field_at,
    sample_verblunsky,
    trace_powers,
    truncated_field,
)
from .gaussian import sample_circle_field, sample_mollified_field
from .measures import (
    BarrierSpec,
    ThickPointSpec,
    exp_measure_integral,
    fk_normalized_mass,
    l1_discrepancy,
    thick_measure_integral,
)
from .montecarlo import (
    Experiment,
    ExperimentConfig,
    run_experiment,
)

__all__ = [
    "__version__",
    "GammaConvention",
    "cue_abs_moment_exact",
    "fk_normalizer",
    "frechet_cdf",
    "frechet_pdf",
    "frechet_ppf",
    "log_barnes_g",
    "log_psi",
    "psi",
    "thickpoint_prob_asymptotic",
    "to_theorem_scale",
    "FieldSample",
    "VerblunskyCoeffs",
    "eval_field",
    "eval_field_at",
    "sample_verblunsky",
    "trace_powers",
    "truncated_field",
    "sample_circle_field",
    "sample_mollified_field",
    "BarrierSpec",
    "ThickPointSpec",
    "exp_measure_integral",
    "fk_normalized_mass",
    "l1_discrepancy",
    "thick_measure_integral",
    "Experiment",
    "ExperimentConfig",
    "run_experiment",
]
