"""Deterministic covariance-kernel evaluations.

Exact log kernels on the circle and on an interval, truncated Fourier kernels,
and quadrature-based mollified kernels, together with numeric checks of the
bounded-deviation estimates they are supposed to satisfy.

Distances on the circle are always the chord 2|sin(delta/2)|, never arc length.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import IntegrationWarning
from scipy.integrate import quad as _scipy_quad


def quad(*args, **kwargs):
    # log singularities push the extrapolation table to its roundoff floor;
    # the returned values are still well within tolerance
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return _scipy_quad(*args, **kwargs)

QUAD_TOL = 1e-9

# Normalization of the standard bump exp(-1/(1-u^2)) on (-1,1):
# integral computed once by adaptive quadrature at tolerance 1e-14.
BUMP_INTEGRAL = 0.4439938161680786


class MollifierProfile(enum.Enum):
    BUMP = "bump"
    TRIANGLE = "triangle"


@dataclass(frozen=True)
class MollifierSpec:
    """Compactly supported probability density on [-1, 1]."""

    profile: MollifierProfile = MollifierProfile.BUMP

    def density(self, u):
        u = np.asarray(u, dtype=float)
        if self.profile is MollifierProfile.BUMP:
            out = np.zeros_like(u)
            inside = np.abs(u) < 1.0
            ui = u[inside]
            out[inside] = np.exp(-1.0 / (1.0 - ui * ui)) / BUMP_INTEGRAL
            return out
        return np.maximum(1.0 - np.abs(u), 0.0)

    def scaled_density(self, u, delta: float, center: float):
        """rho_{delta,center}(u) = delta^-1 rho((u - center)/delta)."""
        return self.density((np.asarray(u, dtype=float) - center) / delta) / delta

    def sample(self, stream: np.random.Generator, size: int) -> np.ndarray:
        """Draw from the profile; used by Monte Carlo oracles in tests."""
        if self.profile is MollifierProfile.TRIANGLE:
            return stream.uniform(0, 1, size) + stream.uniform(0, 1, size) - 1.0
        out = np.empty(0)
        peak = self.density(np.array([0.0]))[0]
        while out.size < size:
            cand = stream.uniform(-1, 1, 2 * (size - out.size) + 16)
            acc = stream.uniform(0, peak, cand.size) < self.density(cand)
            out = np.concatenate([out, cand[acc]])
        return out[:size]


def circle_log_kernel(theta: float, x: float) -> float:
    """-log|e^{i theta} - e^{ix}| = -log(2|sin((theta-x)/2)|).

    Returns +inf at coincident angles.
    """
    chord = 2.0 * abs(math.sin(0.5 * (theta - x)))
    if chord == 0.0:
        return math.inf
    return -math.log(chord)


def circle_truncated_kernel(theta: float, x: float, kmax: int) -> float:
    """Fourier-truncated circle kernel sum_{k=1}^{kmax} cos(k(theta-x))/k."""
    if kmax < 1:
        raise ValueError(f"kmax must be >= 1, got {kmax}")
    delta = theta - x
    k = np.arange(1, kmax + 1, dtype=np.float64)
    return float(math.fsum((np.cos(k * delta) / k).tolist()))


def circle_truncated_kernel_grid(deltas: np.ndarray, kmaxes: list[int]) -> np.ndarray:
    """Vectorized truncated kernel at many separations and several kmax values.

    Returns an array of shape (len(kmaxes), len(deltas)); the sum over k is
    accumulated once up to max(kmaxes), snapshotting at each requested order.
    """
    deltas = np.asarray(deltas, dtype=float)
    order = np.argsort(kmaxes)
    top = max(kmaxes)
    out = np.empty((len(kmaxes), deltas.size))
    acc = np.zeros_like(deltas)
    comp = np.zeros_like(deltas)  # Kahan compensation
    next_idx = 0
    sorted_kmaxes = [kmaxes[i] for i in order]
    for k in range(1, top + 1):
        term = np.cos(k * deltas) / k - comp
        total = acc + term
        comp = (total - acc) - term
        acc = total
        while next_idx < len(sorted_kmaxes) and sorted_kmaxes[next_idx] == k:
            out[order[next_idx]] = acc
            next_idx += 1
    return out


def euclid_kernel(x: float, y: float, h: Callable[[float, float], float] | None = None) -> float:
    """-log|x - y| + h(x, y) on an interval; +inf at coincidence."""
    d = abs(x - y)
    shift = 0.0 if h is None else h(x, y)
    if d == 0.0:
        return math.inf
    return -math.log(d) + shift


def _quad_log(center: float, z: float, delta: float, rho: MollifierSpec) -> float:
    """int -log|u - z| rho_{delta,center}(u) du with the singularity split out."""
    lo, hi = center - delta, center + delta

    def integrand(u):
        return -math.log(abs(u - z)) * float(rho.scaled_density(u, delta, center))

    if lo < z < hi:
        a, _ = quad(integrand, lo, z, epsabs=QUAD_TOL, epsrel=0.0, limit=200)
        b, _ = quad(integrand, z, hi, epsabs=QUAD_TOL, epsrel=0.0, limit=200)
        return a + b
    val, _ = quad(integrand, lo, hi, epsabs=QUAD_TOL, epsrel=0.0, limit=200)
    return val


def mollified_kernel(
    x: float,
    z: float,
    delta: float,
    rho: MollifierSpec,
    h: Callable[[float, float], float] | None = None,
    domain: tuple[float, float] | None = None,
) -> float:
    """Kernel of the field smoothed at x with scale delta against the point z:
    int C(u, z) rho_{delta,x}(u) du.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0,1], got {delta}")
    if domain is not None and (x - delta < domain[0] or x + delta > domain[1]):
        raise ValueError("mollifier support escapes the working domain")
    out = _quad_log(x, z, delta, rho)
    if h is not None:
        hv, _ = quad(
            lambda u: h(u, z) * float(rho.scaled_density(u, delta, x)),
            x - delta,
            x + delta,
            epsabs=QUAD_TOL,
            epsrel=0.0,
            limit=200,
        )
        out += hv
    return out


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)

_conv_cache: dict = {}


def _conv_density(delta: float, epsilon: float, rho: MollifierSpec):
    """Cubic spline of the convolution density of the two centered mollifiers.

    q(w) = int rho_delta(w + v) rho_epsilon(v) dv, supported on
    [-(delta+epsilon), delta+epsilon]; evaluated by Simpson on a fine grid.
    """
    key = (delta, epsilon, rho.profile)
    hit = _conv_cache.get(key)
    if hit is not None:
        return hit
    from scipy.integrate import simpson
    from scipy.interpolate import CubicSpline

    v = np.linspace(-epsilon, epsilon, 2049)
    rv = rho.scaled_density(v, epsilon, 0.0)
    half = delta + epsilon
    w = np.linspace(-half, half, 4097)
    vals = rho.scaled_density(w[:, None] + v[None, :], delta, 0.0) * rv[None, :]
    q = simpson(vals, x=v, axis=1)
    spline = CubicSpline(w, q)
    _conv_cache[key] = (spline, half)
    return spline, half


def _refined_edges(lo: float, hi: float, special: list[float]) -> np.ndarray:
    """Panel edges on [lo, hi], refined dyadically toward each special point."""
    edges = {lo, hi}
    scale = hi - lo
    points = [p for p in special if lo < p < hi] + [lo, hi]
    for p in points:
        for side in (lo, hi):
            gap = abs(side - p)
            while gap > 1e-13 * scale:
                gap *= 0.5
                e = p + gap if side > p else p - gap
                if lo < e < hi:
                    edges.add(e)
        if lo < p < hi:
            edges.add(p)
    return np.array(sorted(edges))


def _panel_quad(f: Callable[[np.ndarray], np.ndarray], edges: np.ndarray) -> float:
    """Fixed-order Gauss-Legendre over the given panels, vectorized."""
    a = edges[:-1]
    b = edges[1:]
    mid = 0.5 * (a + b)[:, None]
    halfw = 0.5 * (b - a)[:, None]
    x = mid + halfw * _GL_NODES[None, :]
    vals = f(x.ravel()).reshape(x.shape)
    return float(np.sum(vals @ _GL_WEIGHTS * halfw[:, 0]))


def doubly_mollified_kernel(
    x: float,
    z: float,
    delta: float,
    epsilon: float,
    rho: MollifierSpec,
    h: Callable[[float, float], float] | None = None,
    domain: tuple[float, float] | None = None,
) -> float:
    """Kernel smoothed at both arguments:
    int int C(u, v) rho_{delta,x}(u) rho_{epsilon,z}(v) du dv.

    The double integral collapses to a single integral of -log|c + w| against
    the convolution density of the two mollifiers (c = x - z); the log
    singularity is handled by dyadically refined Gauss-Legendre panels.
    Absolute accuracy ~1e-8.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0,1], got {delta}")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0,1], got {epsilon}")
    if domain is not None and (x - delta < domain[0] or x + delta > domain[1]):
        raise ValueError("mollifier support escapes the working domain")
    if domain is not None and (z - epsilon < domain[0] or z + epsilon > domain[1]):
        raise ValueError("mollifier support escapes the working domain")
    spline, half = _conv_density(delta, epsilon, rho)
    c = x - z

    def integrand(w):
        with np.errstate(divide="ignore"):
            lg = np.log(np.abs(c + w))
        return -np.where(np.isfinite(lg), lg, 0.0) * spline(w)

    edges = _refined_edges(-half, half, [-c])
    out = _panel_quad(integrand, edges)
    lo, hi = z - epsilon, z + epsilon
    if h is not None:
        def outer_h(v):
            inner, _ = quad(
                lambda u: h(u, v) * float(rho.scaled_density(u, delta, x)),
                x - delta,
                x + delta,
                epsabs=QUAD_TOL,
                epsrel=0.0,
                limit=200,
            )
            return inner * float(rho.scaled_density(v, epsilon, z))

        hv, _ = quad(outer_h, lo, hi, epsabs=QUAD_TOL, epsrel=0.0, limit=200)
        out += hv
    return out


def kappa(
    x: float,
    rho: MollifierSpec,
    h: Callable[[float, float], float] | None = None,
) -> float:
    """Diagonal constant of the doubly smoothed kernel:
    -int int log|v - u| rho(du) rho(dv) + h(x, x).
    """

    def outer(v):
        def inner(u):
            return -math.log(abs(u - v)) * float(rho.density(u))

        a, _ = quad(inner, -1.0, v, epsabs=1e-10, epsrel=0.0, limit=200)
        b, _ = quad(inner, v, 1.0, epsabs=1e-10, epsrel=0.0, limit=200)
        return (a + b) * float(rho.density(v))

    val, _ = quad(outer, -1.0, 1.0, epsabs=1e-9, epsrel=0.0, limit=200)
    if h is not None:
        val += h(x, x)
    return val


@dataclass
class Assumption1Report:
    max_deviation: float
    worst_pair: tuple[float, float] = (math.nan, math.nan)
    worst_scales: tuple[float, float] = (math.nan, math.nan)
    evaluations: int = 0


def assumption1_check(
    grid,
    delta_list,
    epsilon_list,
    rho: MollifierSpec,
    h: Callable[[float, float], float] | None = None,
    domain: tuple[float, float] = (0.0, 1.0),
) -> Assumption1Report:
    """Max over grid pairs and scale pairs (epsilon <= delta) of
    |C_{delta,epsilon}(x,z) + log(|x-z| v delta)|.

    The bounded constant here is an empirical regression target, not a value
    supplied by theory.
    """
    grid = np.asarray(grid, dtype=float)
    report = Assumption1Report(0.0)
    for delta in delta_list:
        for eps in epsilon_list:
            if eps > delta:
                continue
            for xi in grid:
                for zj in grid:
                    val = doubly_mollified_kernel(float(xi), float(zj), delta, eps, rho, h, domain)
                    dev = abs(val + math.log(max(abs(xi - zj), delta)))
                    report.evaluations += 1
                    if dev > report.max_deviation:
                        report.max_deviation = dev
                        report.worst_pair = (float(xi), float(zj))
                        report.worst_scales = (delta, eps)
    return report
