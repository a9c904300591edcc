"""
Random variates of the Gamma subordinator and the Variance Gamma process.

Three constructions of X_t are available:
  time_change       θH + √(2H)·Z with H ~ Gamma(at, b)
  gamma_difference  G − L with the gain/loss laws of factor_params
  compound_poisson  Poisson many jumps ±Y, Y ≥ γ, approximating X_{t/2}

Every sampler builds its own numpy Generator from an RngHandle, so equal
handles give bit-identical output.
"""

import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple, Union

import numpy as np

from .errors import ConvergenceError, DomainError
from .model import GammaParams, VgParams, factor_params
from .special_fn import exp_integral_e1, log_exp_integral_e1

logger = logging.getLogger(__name__)

_MAX_NEWTON_ITERATIONS = 100
_SEED_LIMIT = 2 ** 64


@dataclass(frozen=True)
class RngHandle:
    """A PCG64 stream addressed by (seed, stream) and an optional spawn path."""
    seed: int
    stream: int = 0
    path: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 0 <= int(self.seed) < _SEED_LIMIT:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if int(self.stream) < 0:
            raise DomainError(f"stream must be >= 0, got {self.stream}")

    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream),) + self.path)
        return np.random.Generator(np.random.PCG64(sequence))

    def spawn(self, count: int) -> List["RngHandle"]:
        """`count` independent child streams."""
        return [RngHandle(self.seed, self.stream, self.path + (i,)) for i in range(count)]


RngLike = Union[RngHandle, np.random.Generator]


def _generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return rng.generator()


class Construction(str, Enum):
    TIME_CHANGE = "time_change"
    GAMMA_DIFFERENCE = "gamma_difference"
    COMPOUND_POISSON = "compound_poisson"


@dataclass
class SamplerOutput:
    values: np.ndarray
    t: float
    construction: Construction
    params: VgParams
    seed: int
    stream: int = 0
    gamma_trunc: Optional[float] = None

    def __post_init__(self):
        has_gamma = self.gamma_trunc is not None
        if has_gamma != (self.construction is Construction.COMPOUND_POISSON):
            raise DomainError("gamma_trunc is set exactly for the compound_poisson construction")

    @property
    def target_time(self) -> float:
        """Time of the VG marginal this sample approximates."""
        if self.construction is Construction.COMPOUND_POISSON:
            return 0.5 * self.t
        return self.t

    @property
    def n(self) -> int:
        return int(self.values.size)

    def metadata(self):
        meta = {
            'construction': self.construction.value,
            'a': self.params.a, 'b': self.params.b, 'theta': self.params.theta,
            't': self.t, 'target_time': self.target_time,
            'n': self.n, 'seed': self.seed, 'stream': self.stream,
        }
        if self.gamma_trunc is not None:
            meta['gamma'] = self.gamma_trunc
        return meta


def _check_count(n: int) -> int:
    if int(n) != n or n < 0:
        raise DomainError(f"sample count must be a non-negative integer, got {n}")
    return int(n)


def _check_time(t: float) -> float:
    t = float(t)
    if not (math.isfinite(t) and t > 0):
        raise DomainError(f"time must be positive, got {t}")
    return t


def sample_gamma(shape: float, rate: float, n: int, rng: RngLike) -> np.ndarray:
    """i.i.d. Gamma(shape, rate); numpy's Marsaglia-Tsang sampler covers shape < 1."""
    if not (shape > 0 and rate > 0):
        raise DomainError(f"shape and rate must be positive, got shape={shape}, rate={rate}")
    return _generator(rng).gamma(shape, 1.0 / rate, _check_count(n))


def sample_vg_timechange(p: VgParams, t: float, n: int, rng: RngHandle) -> SamplerOutput:
    """X_t = θH + √(2H)·Z with H ~ Gamma(at, b)."""
    t = _check_time(t)
    n = _check_count(n)
    gen = rng.generator()
    clock = gen.gamma(p.a * t, 1.0 / p.b, n)
    normal = gen.standard_normal(n)
    values = p.theta * clock + np.sqrt(2.0 * clock) * normal
    return SamplerOutput(values, t, Construction.TIME_CHANGE, p, rng.seed, rng.stream)


def sample_vg_difference(p: VgParams, t: float, n: int, rng: RngHandle) -> SamplerOutput:
    """X_t = G − L with G ~ Gamma(at, r₋) and L ~ Gamma(at, r₊)."""
    t = _check_time(t)
    n = _check_count(n)
    pair = factor_params(p)
    gen = rng.generator()
    gains = gen.gamma(p.a * t, 1.0 / pair.gain.b, n)
    losses = gen.gamma(p.a * t, 1.0 / pair.loss.b, n)
    return SamplerOutput(gains - losses, t, Construction.GAMMA_DIFFERENCE, p, rng.seed, rng.stream)


# Truncated jump law

def _check_gamma(gamma_trunc: float) -> float:
    gamma_trunc = float(gamma_trunc)
    if not (math.isfinite(gamma_trunc) and gamma_trunc > 0):
        raise DomainError(f"truncation gamma must be positive, got {gamma_trunc}")
    return gamma_trunc


def jump_density(p: GammaParams, gamma_trunc: float, y: float) -> float:
    """ν_Y(y) = e^{−by} / (y E₁(bγ)) on y ≥ γ."""
    gamma_trunc = _check_gamma(gamma_trunc)
    if y < gamma_trunc:
        return 0.0
    return math.exp(-p.b * y) / (y * exp_integral_e1(p.b * gamma_trunc))


def jump_survival(p: GammaParams, gamma_trunc: float, y: float) -> float:
    """P(Y > y) = E₁(by) / E₁(bγ)."""
    gamma_trunc = _check_gamma(gamma_trunc)
    if y <= gamma_trunc:
        return 1.0
    return math.exp(log_exp_integral_e1(p.b * y) - log_exp_integral_e1(p.b * gamma_trunc))


def _invert_survival(z0: float, log_targets: np.ndarray) -> np.ndarray:
    """Solve ln E₁(z) = target for z ≥ z0, elementwise.

    Newton on the decreasing function ln E₁, falling back to bisection when
    a step leaves the bracket [lo, hi].
    """
    lo = np.full_like(log_targets, z0)
    hi = np.maximum(np.maximum(-log_targets, 1.0), z0)
    z = lo.copy()
    active = np.ones(log_targets.shape, dtype=bool)
    for _ in range(_MAX_NEWTON_ITERATIONS):
        if not active.any():
            return z
        za = z[active]
        log_e1 = log_exp_integral_e1(za)
        f = log_e1 - log_targets[active]
        # d/dz ln E₁(z) = −e^{−z} / (z E₁(z))
        slope = -np.exp(-za - np.log(za) - log_e1)
        lo_a = np.where(f > 0, za, lo[active])
        hi_a = np.where(f > 0, hi[active], za)
        step = f / slope
        candidate = za - step
        outside = (candidate <= lo_a) | (candidate >= hi_a)
        candidate = np.where(outside, 0.5 * (lo_a + hi_a), candidate)
        done = (f == 0) | (np.abs(candidate - za) <= 1e-14 * za) | (hi_a - lo_a <= 1e-15 * hi_a)
        z[active] = np.where(f == 0, za, candidate)
        lo[active], hi[active] = lo_a, hi_a
        indices = np.flatnonzero(active)
        active[indices[done]] = False
    if active.any():
        raise ConvergenceError(f"jump inversion did not converge for {int(active.sum())} draws")
    return z


def _jumps(p: GammaParams, gamma_trunc: float, n: int, gen: np.random.Generator) -> np.ndarray:
    uniforms = 1.0 - gen.random(n)
    z0 = p.b * gamma_trunc
    targets = np.log(uniforms) + log_exp_integral_e1(z0)
    return _invert_survival(z0, targets) / p.b


def sample_jump_y(p: GammaParams, gamma_trunc: float, n: int, rng: RngLike) -> np.ndarray:
    """i.i.d. jumps Y ≥ γ by inversion of P(Y > y) = E₁(by)/E₁(bγ)."""
    gamma_trunc = _check_gamma(gamma_trunc)
    n = _check_count(n)
    if n == 0:
        return np.empty(0)
    return _jumps(p, gamma_trunc, n, _generator(rng))


def compound_poisson_rate(p: VgParams, t: float, gamma_trunc: float) -> float:
    """Jump intensity t·a·E₁(√b γ) of the truncated sum."""
    return _check_time(t) * p.a * exp_integral_e1(math.sqrt(p.b) * _check_gamma(gamma_trunc))


def sample_compound_poisson(p: VgParams, t: float, gamma_trunc: float, n: int,
                            rng: RngHandle) -> SamplerOutput:
    """Σ_{j=1}^{K} ε_j Y_j with K ~ Poisson(t a E₁(√b γ)) and Rademacher signs ε_j.

    Approximates X_{t/2} as γ → 0; the output's target_time says so.
    """
    p.require_driftless("sample_compound_poisson")
    t = _check_time(t)
    n = _check_count(n)
    gamma_trunc = _check_gamma(gamma_trunc)
    rate = compound_poisson_rate(p, t, gamma_trunc)
    gen = rng.generator()
    counts = gen.poisson(rate, n)
    total = int(counts.sum())
    logger.debug("compound Poisson: rate=%.4g, %d jumps for %d samples", rate, total, n)
    jump_law = GammaParams(p.a, math.sqrt(p.b))
    if total:
        jumps = _jumps(jump_law, gamma_trunc, total, gen)
        signs = 2.0 * gen.integers(0, 2, total) - 1.0
        owners = np.repeat(np.arange(n), counts)
        values = np.bincount(owners, weights=signs * jumps, minlength=n)
    else:
        values = np.zeros(n)
    return SamplerOutput(values, t, Construction.COMPOUND_POISSON, p, rng.seed, rng.stream,
                         gamma_trunc=gamma_trunc)


def sample(construction: Construction, p: VgParams, t: float, n: int, rng: RngHandle,
           gamma_trunc: Optional[float] = None) -> SamplerOutput:
    """Dispatch on the construction."""
    construction = Construction(construction)
    if construction is Construction.TIME_CHANGE:
        return sample_vg_timechange(p, t, n, rng)
    if construction is Construction.GAMMA_DIFFERENCE:
        return sample_vg_difference(p, t, n, rng)
    if gamma_trunc is None:
        raise DomainError("the compound_poisson construction needs a truncation gamma")
    return sample_compound_poisson(p, t, gamma_trunc, n, rng)
