"""
Statistics used to check samplers against the exact VG law.

KS statistics with asymptotic Kolmogorov thresholds, the empirical
characteristic function, the VG distribution function by numerical
integration (plus a tabulated, cached version for large samples) and the
γ → 0 convergence study of the compound Poisson construction.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import integrate, special
from scipy.interpolate import PchipInterpolator

from .cache import CacheManager
from .errors import ConvergenceError, DataError, DomainError
from .model import VgParams, factor_params, vg_char
from .quadrature import DEFAULT_QUAD, QuadConfig, integrate_pieces
from .sampling import RngHandle, compound_poisson_rate, sample_compound_poisson
from .special_fn import ln_gamma

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.001
DEFAULT_TABLE_POINTS = 4097
# Standard deviation of √n·D under the null, asymptotically.
_KS_NOISE = 0.27


def ks_critical_value(alpha: float = DEFAULT_ALPHA) -> float:
    """c(α) with P(√n·D > c(α)) → α; c(0.001) ≈ 1.9495."""
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return float(special.kolmogi(alpha))


@dataclass(frozen=True)
class KsReport:
    statistic: float
    n: int
    threshold: float
    passed: bool
    m: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        out = {'statistic': self.statistic, 'n': self.n, 'threshold': self.threshold,
               'pass': self.passed}
        if self.m is not None:
            out['m'] = self.m
        return out


def _clean(values: Sequence[float], label: str) -> np.ndarray:
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise DataError(f"{label} is empty")
    if not np.all(np.isfinite(values)):
        raise DataError(f"{label} contains non-finite values")
    return values


def _evaluate_cdf(cdf: Callable, points: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(cdf(points), dtype=float)
        if out.shape == points.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(cdf(x)) for x in points])


def ks_one_sample(values: Sequence[float], cdf: Callable, alpha: float = DEFAULT_ALPHA) -> KsReport:
    """sup |F_n − F| evaluated on both sides of every jump of F_n."""
    ordered = np.sort(_clean(values, "sample"))
    n = ordered.size
    reference = _evaluate_cdf(cdf, ordered)
    ranks = np.arange(1, n + 1) / n
    d_plus = np.max(ranks - reference)
    d_minus = np.max(reference - (ranks - 1.0 / n))
    statistic = float(max(d_plus, d_minus, 0.0))
    threshold = ks_critical_value(alpha) / math.sqrt(n)
    return KsReport(statistic, n, threshold, statistic <= threshold)


def ks_two_sample(values_a: Sequence[float], values_b: Sequence[float],
                  alpha: float = DEFAULT_ALPHA) -> KsReport:
    """sup |F_n − G_m| over the pooled sample."""
    a = np.sort(_clean(values_a, "first sample"))
    b = np.sort(_clean(values_b, "second sample"))
    n, m = a.size, b.size
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side='right') / n
    cdf_b = np.searchsorted(b, pooled, side='right') / m
    statistic = float(np.max(np.abs(cdf_a - cdf_b)))
    threshold = ks_critical_value(alpha) * math.sqrt((n + m) / (n * m))
    return KsReport(statistic, n, threshold, statistic <= threshold, m=m)


def empirical_char(values: Sequence[float], xi: float) -> complex:
    """(1/n) Σ e^{iξx_k}."""
    values = _clean(values, "sample")
    return complex(np.mean(np.exp(1j * xi * values)))


# VG distribution function

def _clock_pieces(p: VgParams, t: float):
    """Integrands over the Gamma clock: F(x) = ∫ Φ((x − θs)/√(2s)) h(t, s) ds.

    Returns [(func, lower, upper)] where each func maps a clock variable to a
    vector over x. Below the mean at/b and for at < 1 the clock is substituted
    as s = m·w^{1/at}, which absorbs the s^{at−1} singularity.
    """
    shape = p.a * t
    mean = shape / p.b
    log_norm = shape * math.log(p.b) - ln_gamma(shape)

    def phi(xs: np.ndarray, s: float) -> np.ndarray:
        return special.ndtr((xs - p.theta * s) / math.sqrt(2.0 * s))

    def plain(xs: np.ndarray) -> Callable[[float], np.ndarray]:
        def func(s: float) -> np.ndarray:
            if s <= 0.0:
                return np.zeros_like(xs)
            weight = math.exp(log_norm + (shape - 1.0) * math.log(s) - p.b * s)
            return weight * phi(xs, s)
        return func

    def substituted(xs: np.ndarray) -> Callable[[float], np.ndarray]:
        log_scale = shape * math.log(shape) - ln_gamma(shape + 1.0)

        def func(w: float) -> np.ndarray:
            s = mean * w ** (1.0 / shape)
            if s <= 0.0:
                return np.zeros_like(xs)
            return math.exp(log_scale - p.b * s) * phi(xs, s)
        return func

    lower = (substituted, 0.0, 1.0) if shape < 1.0 else (plain, 0.0, mean)
    return [lower, (plain, mean, math.inf)]


def _integrate_vector(func: Callable[[float], np.ndarray], lower: float, upper: float,
                      q: QuadConfig) -> np.ndarray:
    result, error, info = integrate.quad_vec(func, lower, upper, epsabs=q.abs_tol,
                                             epsrel=q.rel_tol, norm='max', full_output=True)
    if not info.success and error > 10.0 * max(q.abs_tol, q.rel_tol):
        raise ConvergenceError(f"CDF quadrature on [{lower}, {upper}] failed: {info.message}",
                               estimate=float(error))
    return np.asarray(result, dtype=float)


def vg_cdf_values(p: VgParams, t: float, xs: Sequence[float],
                  q: QuadConfig = DEFAULT_QUAD) -> np.ndarray:
    """F(t, x) for every x in `xs`, by one vector-valued quadrature."""
    t = float(t)
    if not (math.isfinite(t) and t > 0):
        raise DomainError(f"time must be positive, got {t}")
    xs = np.asarray(xs, dtype=float)
    total = np.zeros(xs.shape)
    for make, lower, upper in _clock_pieces(p, t):
        total += _integrate_vector(make(xs), lower, upper, q)
    return np.clip(total, 0.0, 1.0)


def vg_cdf(p: VgParams, t: float, x: float, q: QuadConfig = DEFAULT_QUAD) -> float:
    """P(X_t ≤ x) through the subordination integral."""
    return float(vg_cdf_values(p, t, np.array([float(x)]), q)[0])


def cdf_span(p: VgParams, t: float) -> float:
    """Half-width of the tabulated range: max(40/r_min, 12 standard deviations)."""
    pair = factor_params(p)
    shape = p.a * t
    std = math.sqrt(2.0 * shape / p.b + p.theta ** 2 * shape / p.b ** 2)
    return max(40.0 / min(pair.gain.b, pair.loss.b), 12.0 * std)


@dataclass
class VgCdfTable:
    """Monotone PCHIP interpolant of vg_cdf on a symmetric grid with x = 0 as a node."""
    params: VgParams
    t: float
    nodes: np.ndarray
    values: np.ndarray
    _interpolator: PchipInterpolator = field(init=False, repr=False)

    def __post_init__(self):
        self._interpolator = PchipInterpolator(self.nodes, self.values, extrapolate=False)

    @staticmethod
    def cache_key(p: VgParams, t: float, points: int, q: QuadConfig) -> str:
        return (f"vg_cdf:a={p.a!r}:b={p.b!r}:theta={p.theta!r}:t={float(t)!r}:"
                f"points={points}:abs_tol={q.abs_tol!r}:rel_tol={q.rel_tol!r}")

    @classmethod
    def build(cls, p: VgParams, t: float, q: QuadConfig = DEFAULT_QUAD,
              points: int = DEFAULT_TABLE_POINTS,
              cache: Optional[CacheManager] = None) -> "VgCdfTable":
        if points < 3:
            raise DomainError(f"a CDF table needs at least 3 nodes, got {points}")
        if points % 2 == 0:
            points += 1
        key = cls.cache_key(p, t, points, q)
        if cache is not None:
            cached = cache.get(key)
            if cached is not None:
                return cls(p, t, np.asarray(cached['nodes']), np.asarray(cached['values']))
        span = cdf_span(p, t)
        nodes = np.linspace(-span, span, points)
        nodes[points // 2] = 0.0
        values = np.maximum.accumulate(vg_cdf_values(p, t, nodes, q))
        logger.info("Tabulated VG CDF on [%.4g, %.4g] with %d nodes", -span, span, points)
        if cache is not None:
            cache.set(key, {'nodes': nodes.tolist(), 'values': values.tolist()})
        return cls(p, t, nodes, values)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self._interpolator(x)
        out = np.where(x < self.nodes[0], 0.0, out)
        out = np.where(x > self.nodes[-1], 1.0, out)
        return float(out) if out.ndim == 0 else out


def compound_poisson_char(p: VgParams, t: float, gamma_trunc: float, xi: float,
                          q: QuadConfig = DEFAULT_QUAD) -> float:
    """Exact characteristic function of the truncated compound Poisson sum.

    exp(t a ∫_γ^∞ (cos ξy − 1) e^{−√b y}/y dy), which tends to vg_char(p, t/2, ξ).
    """
    p.require_driftless("compound_poisson_char")
    if not gamma_trunc > 0:
        raise DomainError(f"truncation gamma must be positive, got {gamma_trunc}")
    root_b = math.sqrt(p.b)

    def integrand(y: float) -> float:
        return (math.cos(xi * y) - 1.0) * math.exp(-root_b * y) / y

    breaks = [k / root_b for k in (1.0, 4.0, 16.0)]
    exponent, _ = integrate_pieces(integrand, gamma_trunc, math.inf, q, breakpoints=breaks,
                                   label="compound Poisson exponent")
    return math.exp(t * p.a * exponent)


# Convergence study

@dataclass
class ConvergenceStudy:
    gamma_ladder: List[float]
    ks_per_gamma: List[float]
    n: int
    params: VgParams
    t: float
    rates: List[float] = field(default_factory=list)
    thresholds: List[float] = field(default_factory=list)
    passes: List[bool] = field(default_factory=list)
    seed: Optional[int] = None

    def __post_init__(self):
        _check_ladder(self.gamma_ladder)
        if len(self.ks_per_gamma) != len(self.gamma_ladder):
            raise DomainError("one KS statistic per ladder rung is required")

    @property
    def standard_error(self) -> float:
        return _KS_NOISE / math.sqrt(self.n)

    def is_monotone_within_noise(self) -> bool:
        """Each KS value exceeds its predecessor by at most two standard errors of a difference."""
        allowance = 2.0 * math.sqrt(2.0) * self.standard_error
        return all(later <= earlier + allowance
                   for earlier, later in zip(self.ks_per_gamma, self.ks_per_gamma[1:]))

    @property
    def final_pass(self) -> bool:
        return bool(self.passes[-1]) if self.passes else False

    def to_rows(self) -> List[Dict[str, Any]]:
        return [{'gamma': g, 'rate': r, 'ks_statistic': d, 'threshold': c, 'pass': ok}
                for g, r, d, c, ok in zip(self.gamma_ladder, self.rates, self.ks_per_gamma,
                                          self.thresholds, self.passes)]


def _check_ladder(ladder: Sequence[float]) -> None:
    if not ladder:
        raise DomainError("the gamma ladder is empty")
    if any(not (math.isfinite(g) and g > 0) for g in ladder):
        raise DomainError(f"ladder values must be positive, got {list(ladder)}")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise DomainError(f"the gamma ladder must be strictly descending, got {list(ladder)}")


def run_convergence_study(p: VgParams, t: float, gamma_ladder: Sequence[float], n: int,
                          rng: RngHandle, alpha: float = DEFAULT_ALPHA,
                          q: QuadConfig = DEFAULT_QUAD, table_points: int = DEFAULT_TABLE_POINTS,
                          cache: Optional[CacheManager] = None) -> ConvergenceStudy:
    """KS distance of compound Poisson samples to the VG law at time t/2, per γ."""
    ladder = [float(g) for g in gamma_ladder]
    _check_ladder(ladder)
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    reference = VgCdfTable.build(p, 0.5 * t, q, table_points, cache)
    streams = rng.spawn(len(ladder))
    ks_values, rates, thresholds, passes = [], [], [], []
    for gamma_trunc, stream in zip(ladder, streams):
        output = sample_compound_poisson(p, t, gamma_trunc, n, stream)
        report = ks_one_sample(output.values, reference, alpha)
        rates.append(compound_poisson_rate(p, t, gamma_trunc))
        ks_values.append(report.statistic)
        thresholds.append(report.threshold)
        passes.append(report.passed)
        logger.info("gamma=%g: rate=%.4g KS=%.4g (threshold %.4g)",
                    gamma_trunc, rates[-1], report.statistic, report.threshold)
    return ConvergenceStudy(ladder, ks_values, n, p, t, rates, thresholds, passes, seed=rng.seed)


def char_envelope(n: int) -> float:
    """3/√n bound on |ê(ξ) − φ(ξ)| for n bounded summands."""
    return 3.0 / math.sqrt(n)


def vg_char_at_target(output, xi: float) -> complex:
    """vg_char at the time a sampler output approximates."""
    return vg_char(output.params, output.target_time, xi)

