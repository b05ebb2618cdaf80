"""Experiment driver: deterministic seeded replication, estimators and
goodness-of-fit statistics.

Each replica owns an RNG stream derived from (master_seed, replica_index) by a
SplitMix64-style avalanche, so results are independent of worker count and
reproducible across platforms.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from . import cue, measures
from .gaussian import gaussian_exp_normalizer, harmonic_number, sample_circle_field
from .kernels import (
    MollifierProfile,
    MollifierSpec,
    assumption1_check,
    circle_truncated_kernel_grid,
)
from .special_fn import GammaConvention, to_theorem_scale

MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_SPLITMIX_MULT1 = 0xBF58476D1CE4E5B9
_SPLITMIX_MULT2 = 0x94D049BB133111EB


def derive_seed(master_seed: int, replica_index: int) -> int:
    """SplitMix64 avalanche of (master_seed, replica_index).

    The constants are fixed so that any implementation can reproduce the same
    substreams bit for bit.
    """
    z = (master_seed + _SPLITMIX_GAMMA * (replica_index + 1)) & MASK64
    z = ((z ^ (z >> 30)) * _SPLITMIX_MULT1) & MASK64
    z = ((z ^ (z >> 27)) * _SPLITMIX_MULT2) & MASK64
    return z ^ (z >> 31)


def replica_stream(master_seed: int, replica_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, replica_index)))


class Experiment(enum.Enum):
    MOMENT_CHECK = "moment-check"
    TRACE_COVARIANCE = "trace-covariance"
    FK_TEST = "fk-test"
    NU_MU_DISCREPANCY = "nu-mu"
    GAUSSIAN_GMC = "gaussian-gmc"
    KERNEL_CHECKS = "kernel-checks"


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: Experiment
    n: int = 64
    grid_factor: int = 16
    gamma: float = 0.5
    convention: GammaConvention = GammaConvention.THEOREM
    eta: float = 0.2
    ell: int | None = None
    L: int | None = None
    kmax: int | None = None
    replicas: int = 1
    master_seed: int = 0
    g_shift: float = 0.0
    output_path: str | None = None

    def validate(self) -> None:
        problems = []
        if self.n < 1:
            problems.append(f"n must be >= 1 (got {self.n})")
        if self.grid_factor < 4:
            problems.append(f"grid_factor must be >= 4 (got {self.grid_factor})")
        if self.replicas < 1:
            problems.append(f"replicas must be >= 1 (got {self.replicas})")
        if not 0 <= self.master_seed <= MASK64:
            problems.append("master_seed must be an unsigned 64-bit integer")
        if self.experiment is not Experiment.KERNEL_CHECKS:
            try:
                to_theorem_scale(self.gamma, self.convention)
            except ValueError as exc:
                problems.append(str(exc))
        if self.eta <= 0.0 or self.eta >= 1.0:
            problems.append(f"eta must lie in (0,1) (got {self.eta})")
        if self.ell is not None and self.ell < 1:
            problems.append(f"ell must be >= 1 (got {self.ell})")
        if self.kmax is not None and self.kmax < 1:
            problems.append(f"kmax must be >= 1 (got {self.kmax})")
        if problems:
            raise ValueError("invalid config: " + "; ".join(problems))

    @property
    def gamma_theorem(self) -> float:
        return to_theorem_scale(self.gamma, self.convention)

    @property
    def barrier_depth(self) -> int:
        if self.L is not None:
            return self.L
        return measures.BarrierSpec.auto_depth(self.n, self.eta)

    @property
    def effective_kmax(self) -> int:
        if self.kmax is not None:
            return self.kmax
        if self.experiment is Experiment.TRACE_COVARIANCE:
            return 2 * self.n
        if self.experiment is Experiment.GAUSSIAN_GMC:
            return self.n
        return min(int(math.ceil(math.exp(self.barrier_depth))), cue.TRACE_COST_GUARD * self.n)


@dataclass(frozen=True)
class ReplicaRecord:
    replica_index: int
    derived_seed: int
    scalars: dict[str, float] = dc_field(default_factory=dict)


@dataclass(frozen=True)
class Summary:
    mean: dict[str, float]
    stderr: dict[str, float]
    min: dict[str, float]
    max: dict[str, float]


# ---------------------------------------------------------------------------
# per-replica work
# ---------------------------------------------------------------------------


def _replica_moment_check(config: ExperimentConfig, stream) -> dict[str, float]:
    coeffs = cue.sample_verblunsky(config.n, stream)
    x0 = float(cue.eval_field_at(coeffs, np.array([0.0]))[0])
    return {"exp_moment": math.exp(config.gamma_theorem * x0), "field_at_0": x0}


def _trace_ks(config: ExperimentConfig) -> list[int]:
    kmax = config.effective_kmax
    return sorted({k for k in (1, 8, config.n, 2 * config.n) if k <= kmax})


def _replica_trace_covariance(config: ExperimentConfig, stream) -> dict[str, float]:
    coeffs = cue.sample_verblunsky(config.n, stream)
    tv = cue.trace_powers(coeffs, config.effective_kmax)
    return {f"abs_trace_sq_k{k}": float(np.abs(tv.traces[k - 1]) ** 2) for k in _trace_ks(config)}


def _replica_fk_test(config: ExperimentConfig, stream) -> dict[str, float]:
    coeffs = cue.sample_verblunsky(config.n, stream)
    sample = cue.eval_field(coeffs, config.grid_factor * config.n)
    gamma_conj = config.gamma_theorem / cue.SQRT2
    return {"fk_mass": measures.fk_normalized_mass(sample, gamma_conj, config.n)}


def _replica_nu_mu(config: ExperimentConfig, stream) -> dict[str, float]:
    coeffs = cue.sample_verblunsky(config.n, stream)
    sample = cue.eval_field(coeffs, config.grid_factor * config.n)
    g = config.gamma_theorem
    spec = measures.ThickPointSpec(g)
    result = measures.l1_discrepancy(sample, spec, config.n)
    out = {"mu": result.mu_f, "nu": result.nu_f, "discrepancy": result.discrepancy}
    if config.g_shift != 0.0:
        shifted = replace(spec, g=config.g_shift)
        out["nu_shifted"] = measures.thick_measure_integral(sample, shifted, config.n)
    if config.ell is not None:
        barrier = measures.BarrierSpec(g, config.eta, config.ell, config.barrier_depth)
        levels = barrier.levels
        truncated = {}
        if levels:
            kneed = int(math.floor(math.exp(levels[-1])))
            traces = cue.trace_powers(coeffs, min(kneed, cue.TRACE_COST_GUARD * config.n))
            truncated = {
                k: cue.truncated_field(traces, config.n, barrier.scale(k), sample.grid_size)
                for k in levels
            }
        # one violation column per starting level: the mask for start ell'
        # is the suffix conjunction of the per-level constraints
        for start in levels or [config.ell]:
            if levels:
                mask = measures.barrier_mask(truncated, replace(barrier, ell=start))
                violation = measures.thick_measure_integral(
                    sample, spec, config.n, f=(~mask).astype(float)
                )
            else:
                violation = 0.0  # no constraints, so the complement is empty
            if start == config.ell:
                out["nu_barrier_violation"] = violation
            out[f"nu_barrier_violation_l{start}"] = violation
    return out


def _replica_gaussian_gmc(config: ExperimentConfig, stream) -> dict[str, float]:
    kmax = config.effective_kmax
    field = sample_circle_field(kmax, config.grid_factor * kmax, stream)
    norm = gaussian_exp_normalizer(harmonic_number(kmax), config.gamma_theorem)
    mass = float(np.mean(np.exp(config.gamma_theorem * field.values)) / norm)
    return {"gmc_mass": mass}


def _replica_kernel_checks(config: ExperimentConfig, stream) -> dict[str, float]:
    # deterministic; stream unused
    rng = np.random.Generator(np.random.PCG64(12345))
    seps = rng.uniform(1e-4, math.pi, 10_000)
    js = list(range(2, 13))
    kmaxes = [2**j for j in js]
    grid_vals = circle_truncated_kernel_grid(seps, kmaxes)
    worst = 0.0
    for j, row in zip(js, grid_vals):
        chord = 2.0 * np.abs(np.sin(seps / 2.0))
        dev = np.abs(row + np.log(np.maximum(chord, 2.0**-j)))
        worst = max(worst, float(dev.max()))
    rho = MollifierSpec(MollifierProfile.BUMP)
    deltas = [2.0**-j for j in range(3, 9)]
    report = assumption1_check(
        np.linspace(0.15, 0.85, 5), deltas, deltas, rho, None, (0.0, 1.0)
    )
    return {
        "truncated_kernel_max_dev": worst,
        "assumption1_max_dev": report.max_deviation,
    }


_REPLICA_FNS = {
    Experiment.MOMENT_CHECK: _replica_moment_check,
    Experiment.TRACE_COVARIANCE: _replica_trace_covariance,
    Experiment.FK_TEST: _replica_fk_test,
    Experiment.NU_MU_DISCREPANCY: _replica_nu_mu,
    Experiment.GAUSSIAN_GMC: _replica_gaussian_gmc,
    Experiment.KERNEL_CHECKS: _replica_kernel_checks,
}


def run_replica(config: ExperimentConfig, replica_index: int) -> ReplicaRecord:
    seed = derive_seed(config.master_seed, replica_index)
    stream = np.random.Generator(np.random.PCG64(seed))
    scalars = _REPLICA_FNS[config.experiment](config, stream)
    return ReplicaRecord(replica_index, seed, scalars)


def worker_count() -> int:
    raw = os.environ.get("THICKPOINT_THREADS", "")
    if raw.strip():
        count = int(raw)
        if count < 1:
            raise ValueError(f"THICKPOINT_THREADS must be positive, got {raw!r}")
        return count
    return min(os.cpu_count() or 1, 8)


def _run_chunk(args) -> list[ReplicaRecord]:
    config, indices = args
    return [run_replica(config, i) for i in indices]


def run_experiment(config: ExperimentConfig) -> tuple[list[ReplicaRecord], Summary]:
    """Execute all replicas; output is a pure function of the config,
    independent of worker count (records come back sorted by index)."""
    config.validate()
    workers = min(worker_count(), config.replicas)
    indices = list(range(config.replicas))
    if workers <= 1:
        records = [run_replica(config, i) for i in indices]
    else:
        chunks = [(config, indices[i::workers]) for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, chunks))
        records = sorted(
            (rec for part in parts for rec in part), key=lambda r: r.replica_index
        )
    return records, summarize(records)


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------


def summarize(records: list[ReplicaRecord]) -> Summary:
    """Mean, stderr (= sample sd / sqrt(R)), min and max for every scalar."""
    if not records:
        raise ValueError("cannot summarize zero records")
    names = list(records[0].scalars)
    mean, stderr, mn, mx = {}, {}, {}, {}
    for name in names:
        vals = np.array([r.scalars[name] for r in records], dtype=float)
        mean[name] = float(vals.mean())
        stderr[name] = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else math.nan
        mn[name] = float(vals.min())
        mx[name] = float(vals.max())
    return Summary(mean, stderr, mn, mx)


def ks_statistic(samples, cdf) -> float:
    """sup_i max(|i/n - F(x_i)|, |(i-1)/n - F(x_i)|) over the sorted sample."""
    samples = np.sort(np.asarray(samples, dtype=float))
    n = samples.size
    if n == 0:
        raise ValueError("ks_statistic needs at least one sample")
    f = np.array([cdf(x) for x in samples])
    i = np.arange(1, n + 1)
    return float(np.max(np.maximum(np.abs(i / n - f), np.abs((i - 1) / n - f))))


def ks_two_sample(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov distance."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("ks_two_sample needs non-empty samples")
    both = np.concatenate([a, b])
    fa = np.searchsorted(a, both, side="right") / a.size
    fb = np.searchsorted(b, both, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_critical_value(n: int, alpha: float = 0.01) -> float:
    """Asymptotic one-sample critical value c(alpha)/sqrt(n)."""
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) / math.sqrt(n)


def ks_two_sample_critical_value(n: int, m: int, alpha: float = 0.01) -> float:
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) * math.sqrt((n + m) / (n * m))
