"""
Parameter records, densities and characteristic functions of the Gamma
subordinator and the (drifted) Variance Gamma process.

Conventions: the Brownian kernel is g(s, x) = e^{−x²/4s}/√(4πs), so the
clock value s carries variance 2s, and characteristic functions are
E[e^{iξX}] = ∫ e^{iξx} p(x) dx.
"""

import cmath
import math
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import numpy as np

from .errors import BoundaryError, DomainError
from .quadrature import DEFAULT_QUAD, QuadConfig, integrate_pieces
from .special_fn import (DEFAULT_ACCURACY, Accuracy, exp_integral_e1, ln_gamma,
                         log_bessel_k)

logger = logging.getLogger(__name__)

_LOG_PI = math.log(math.pi)


class Divergent:
    """Tagged value of a density at a point where it is infinite."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "DIVERGENT"

    def __bool__(self) -> bool:
        return True


DIVERGENT = Divergent()

Density = Union[float, Divergent]


def _require_positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be positive and finite, got {value}")
    return value


@dataclass(frozen=True)
class GammaParams:
    """Gamma subordinator: shape rate `a` (per unit time) and rate `b`."""
    a: float
    b: float

    def __post_init__(self):
        _require_positive("a", self.a)
        _require_positive("b", self.b)


@dataclass(frozen=True)
class VgParams:
    """Variance Gamma triple (a, b, θ); θ = 0 is the driftless process."""
    a: float
    b: float
    theta: float = 0.0

    def __post_init__(self):
        _require_positive("a", self.a)
        _require_positive("b", self.b)
        if not math.isfinite(self.theta):
            raise DomainError(f"theta must be finite, got {self.theta}")

    @property
    def subordinator(self) -> GammaParams:
        """The Gamma clock (a, b) of the time-change representation."""
        return GammaParams(self.a, self.b)

    @property
    def drifted(self) -> bool:
        return self.theta != 0.0

    def require_driftless(self, operation: str) -> None:
        if self.drifted:
            raise DomainError(f"{operation} is only defined for theta = 0, got theta={self.theta}")


@dataclass(frozen=True)
class FactorPair:
    """X = G − L with G ~ gain and L ~ loss independent Gamma subordinators.

    With `parent` set, the rates must reproduce it: r₋·r₊ = b and r₊ − r₋ = θ.
    """
    gain: GammaParams
    loss: GammaParams
    parent: Optional[VgParams] = field(default=None, compare=False)

    def __post_init__(self):
        if self.gain.a != self.loss.a:
            raise DomainError("gain and loss must share the shape rate a")
        p = self.parent
        if p is None:
            return
        if self.gain.a != p.a:
            raise DomainError(f"factor shape {self.gain.a} differs from a={p.a}")
        product = self.gain.b * self.loss.b
        if not math.isclose(product, p.b, rel_tol=1e-10):
            raise DomainError(f"factor rates multiply to {product}, expected b={p.b}")
        spread = self.loss.b - self.gain.b
        if abs(spread - p.theta) > 1e-10 * max(abs(p.theta), math.sqrt(p.b)):
            raise DomainError(f"factor rates differ by {spread}, expected theta={p.theta}")


def _require_time(t: float, allow_zero: bool = False) -> float:
    t = float(t)
    if not math.isfinite(t) or t < 0 or (t == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise DomainError(f"time must be {bound}, got {t}")
    return t


# Gamma subordinator

def laplace_exponent(p: GammaParams, lam: float) -> float:
    """Φ(λ) = a ln(1 + λ/b)."""
    if lam < 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    return p.a * math.log1p(lam / p.b)


def gamma_log_density(p: GammaParams, t: float, x: float) -> float:
    """ln h(t, x) for x > 0."""
    shape = p.a * t
    return shape * math.log(p.b) + (shape - 1.0) * math.log(x) - p.b * x - ln_gamma(shape)


def gamma_density(p: GammaParams, t: float, x: float) -> Density:
    """h(t, x) = b^{at} x^{at−1} e^{−bx} / Γ(at); DIVERGENT at x = 0 when at < 1."""
    t = _require_time(t)
    if x > 0:
        return math.exp(gamma_log_density(p, t, x))
    if x == 0 and p.a * t < 1.0:
        return DIVERGENT
    return 0.0


def gamma_laplace(p: GammaParams, t: float, lam: float) -> float:
    """E[e^{−λH_t}] = (b/(λ+b))^{at}."""
    t = _require_time(t)
    return math.exp(-t * laplace_exponent(p, lam))


def gamma_char(p: GammaParams, t: float, xi):
    """E[e^{iξH_t}] = (1 − iξ/b)^{−at}, principal branch."""
    t = _require_time(t, allow_zero=True)
    base = 1.0 - 1j * np.asarray(xi, dtype=float) / p.b
    value = np.power(base, -p.a * t)
    return complex(value) if value.ndim == 0 else value


def levy_density(p: GammaParams, y: float) -> float:
    """Lévy density a e^{−by}/y of the Gamma subordinator."""
    y = _require_positive("y", y)
    return p.a * math.exp(-p.b * y) / y


def levy_tail(p: GammaParams, x: float) -> float:
    """Π̄(x) = Π((x, ∞)) = a E₁(bx)."""
    x = _require_positive("x", x)
    return p.a * exp_integral_e1(p.b * x)


def tail_laplace_transform(p: GammaParams, lam: float, q: QuadConfig = DEFAULT_QUAD) -> float:
    """∫₀^∞ e^{−λz} Π̄(z) dz by quadrature; equals Φ(λ)/λ."""
    lam = _require_positive("lambda", lam)

    def integrand(z: float) -> float:
        return math.exp(-lam * z) * p.a * exp_integral_e1(p.b * z) if z > 0 else 0.0

    value, _ = integrate_pieces(integrand, 0.0, math.inf, q, breakpoints=(1.0 / p.b,),
                                label="tail Laplace transform")
    return value


# Variance Gamma

def factor_params(p: VgParams) -> FactorPair:
    """Gain rate √(θ²/4+b) − θ/2 and loss rate √(θ²/4+b) + θ/2."""
    root = math.sqrt(0.25 * p.theta * p.theta + p.b)
    half = 0.5 * p.theta
    # r₋ = b / r₊ avoids cancellation when θ > 0 dominates.
    if half >= 0:
        loss_rate = root + half
        gain_rate = p.b / loss_rate
    else:
        gain_rate = root - half
        loss_rate = p.b / gain_rate
    return FactorPair(gain=GammaParams(p.a, gain_rate), loss=GammaParams(p.a, loss_rate),
                      parent=p)


def _log_prefactor(p: VgParams, t: float) -> float:
    """ln[b^{at} π^{−½} Γ(at)^{−1} (2√b)^{−ν}], ν = at − ½."""
    shape = p.a * t
    nu = shape - 0.5
    return (shape * math.log(p.b) - 0.5 * _LOG_PI - ln_gamma(shape)
            - nu * (math.log(2.0) + 0.5 * math.log(p.b)))


def vg_density_at_origin(p: VgParams, t: float) -> Density:
    """p(t, 0): the finite limit for at > ½, DIVERGENT for at < ½."""
    shape = p.a * _require_time(t)
    if math.isclose(shape, 0.5, rel_tol=1e-12, abs_tol=0.0):
        raise BoundaryError(f"density at x = 0 is log-divergent at the boundary at = 1/2 (at={shape})")
    if shape < 0.5:
        return DIVERGENT
    log_value = (0.5 * math.log(p.b) + ln_gamma(shape - 0.5) - math.log(2.0)
                 - 0.5 * _LOG_PI - ln_gamma(shape))
    return math.exp(log_value)


def vg_density(p: VgParams, t: float, x: float,
               accuracy: Accuracy = DEFAULT_ACCURACY) -> Density:
    """Closed-form density of the driftless process through K_{at−½}."""
    p.require_driftless("vg_density")
    t = _require_time(t)
    x = float(x)
    if x == 0.0:
        return vg_density_at_origin(p, t)
    ax = abs(x)
    nu = p.a * t - 0.5
    sqrt_b = math.sqrt(p.b)
    log_value = _log_prefactor(p, t) + nu * math.log(ax) + log_bessel_k(nu, ax * sqrt_b, accuracy)
    return math.exp(log_value)


def vg_density_grid(p: VgParams, t: float, xs: Iterable[float],
                    accuracy: Accuracy = DEFAULT_ACCURACY) -> np.ndarray:
    """vg_density on an array of points; a divergent origin is an error here."""
    values = []
    for x in np.asarray(xs, dtype=float).ravel():
        value = vg_density(p, t, x, accuracy)
        if value is DIVERGENT:
            raise DomainError(f"density diverges at x = 0 for at = {p.a * t}")
        values.append(value)
    return np.asarray(values, dtype=float)


def vg_density_dx(p: VgParams, t: float, x: float, order: int = 1,
                  accuracy: Accuracy = DEFAULT_ACCURACY) -> float:
    """First or second x-derivative of the closed-form density, x ≠ 0.

    With c the closed-form prefactor, s = √b and z = s|x|:
        p′ = −sign(x) c s^{1−ν} z^ν K_{ν−1}(z)
        p″ = c s^{2−ν} z^{ν−1} (z K_{ν−2}(z) − K_{ν−1}(z))
    """
    p.require_driftless("vg_density_dx")
    t = _require_time(t)
    if order not in (1, 2):
        raise DomainError(f"order must be 1 or 2, got {order}")
    x = float(x)
    if x == 0.0:
        raise DomainError("the density is not differentiable at x = 0")
    nu = p.a * t - 0.5
    log_s = 0.5 * math.log(p.b)
    z = abs(x) * math.sqrt(p.b)
    log_z = math.log(z)
    log_k1 = log_bessel_k(nu - 1.0, z, accuracy)
    log_c = _log_prefactor(p, t)
    if order == 1:
        return -math.copysign(1.0, x) * math.exp(log_c + (1.0 - nu) * log_s + nu * log_z + log_k1)
    log_k2 = log_bessel_k(nu - 2.0, z, accuracy)
    bracket = z * math.exp(log_k2 - log_k1) - 1.0
    if bracket == 0.0:
        return 0.0
    log_abs = log_c + (2.0 - nu) * log_s + (nu - 1.0) * log_z + log_k1 + math.log(abs(bracket))
    return math.copysign(math.exp(log_abs), bracket)


def brownian_log_kernel(s: float, x: float, theta: float = 0.0) -> float:
    """ln g^θ(s, x) = −(x − θs)²/4s − ½ ln(4πs)."""
    shift = x - theta * s
    return -shift * shift / (4.0 * s) - 0.5 * math.log(4.0 * math.pi * s)


def vg_density_quadrature(p: VgParams, t: float, x: float,
                          q: QuadConfig = DEFAULT_QUAD) -> Density:
    """p^θ(t, x) = ∫₀^∞ g^θ(s, x) h(t, s) ds by adaptive quadrature.

    Canonical evaluator for θ ≠ 0 and the oracle for the closed form.
    """
    t = _require_time(t)
    x = float(x)
    shape = p.a * t
    if x == 0.0:
        if math.isclose(shape, 0.5, rel_tol=1e-12, abs_tol=0.0):
            raise BoundaryError(f"density at x = 0 is log-divergent at at = 1/2 (at={shape})")
        if shape < 0.5:
            return DIVERGENT
    clock = p.subordinator

    def integrand(s: float) -> float:
        if s <= 0.0:
            return 0.0
        return math.exp(brownian_log_kernel(s, x, p.theta) + gamma_log_density(clock, t, s))

    mean = shape / p.b
    saddle = abs(x) / (2.0 * math.sqrt(0.25 * p.theta * p.theta + p.b))
    value, error = integrate_pieces(integrand, 0.0, math.inf, q, breakpoints=(mean, saddle),
                                    label="subordination integral")
    logger.debug("vg_density_quadrature(t=%g, x=%g) = %.17g (error %.2g)", t, x, value, error)
    return max(value, 0.0)


def vg_char(p: VgParams, t: float, xi):
    """E[e^{iξX_t}] = (1 − iξθ/b + ξ²/b)^{−at}, principal branch."""
    t = _require_time(t, allow_zero=True)
    xi = np.asarray(xi, dtype=float)
    base = 1.0 - 1j * xi * p.theta / p.b + xi * xi / p.b
    value = np.power(base, -p.a * t)
    return complex(value) if value.ndim == 0 else value


def vg_log_symbol(p: VgParams, xi: float) -> complex:
    """a ln(1 − iξθ/b + ξ²/b), so that vg_char = exp(−t · symbol)."""
    return p.a * cmath.log(complex(1.0 + xi * xi / p.b, -xi * p.theta / p.b))
