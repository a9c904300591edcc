"""
Special functions behind the Variance Gamma densities.

ln Γ, Γ, the modified Bessel function of the second kind K_ν (real order,
positive argument) and the exponential integral E₁. Everything here is a pure
function of its arguments and none of it calls scipy.
"""

import math
import logging
from dataclasses import dataclass
from typing import Any, Dict, Tuple, Union

import numpy as np

from .errors import ConvergenceError, DomainError, RangeError

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.5772156649015329

# Largest/smallest exponent whose exp() is a normal double.
_LOG_MAX = 709.782712893384
_LOG_MIN = -708.3964185322641

# Lanczos coefficients (g = 671/128, 14 terms).
_LANCZOS_COEFFS = (
    57.1562356658629235, -59.5979603554754912, 14.1360979747417471,
    -0.491913816097620199, 0.339946499848118887e-4, 0.465236289270485756e-4,
    -0.983744753048795646e-4, 0.158088703224912494e-3, -0.210264441724104883e-3,
    0.217439618115212643e-3, -0.164318106536763890e-3, 0.844182239838527433e-4,
    -0.261908384015814087e-4, 0.368991826595316234e-5,
)

# Taylor coefficients c_k of 1/Γ(z) = Σ c_k z^k, k = 1..26.
_RECIP_GAMMA_COEFFS = (
    1.0, 0.5772156649015329, -0.6558780715202538, -0.0420026350340952,
    0.1665386113822915, -0.0421977345555443, -0.0096219715278770,
    0.0072189432466630, -0.0011651675918591, -0.0002152416741149,
    0.0001280502823882, -0.0000201348547807, -0.0000012504934821,
    0.0000011330272320, -0.0000002056338417, 0.0000000061160950,
    0.0000000050020075, -0.0000000011812746, 0.0000000001043427,
    0.0000000000077823, -0.0000000000036968, 0.0000000000005100,
    -0.0000000000000206, -0.0000000000000054, 0.0000000000000014,
    0.0000000000000001,
)

_FPMIN = 1e-300
_RESCALE = 1e280
_LOG_RESCALE = math.log(_RESCALE)


@dataclass(frozen=True)
class Accuracy:
    """Stopping rule for the series and continued fractions in this module."""
    rel_tol: float = 1e-12
    max_terms: int = 500

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")

    @property
    def eps(self) -> float:
        """Per-term convergence threshold, never below machine epsilon."""
        return max(float(np.finfo(float).eps), self.rel_tol * 1e-4)

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> "Accuracy":
        special = config.get('special', {})
        return cls(rel_tol=float(special.get('rel_tol', cls.rel_tol)),
                   max_terms=int(special.get('max_terms', cls.max_terms)))


DEFAULT_ACCURACY = Accuracy()


def _check_positive(name: str, x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"{name} must be a positive finite number, got {x}")
    return x


def _zeta_minus_one(k: int, cut: int = 30) -> float:
    """ζ(k) − 1 = Σ_{n≥2} n^{−k}: direct sum below `cut`, Euler-Maclaurin tail."""
    head = sum(n ** -float(k) for n in range(2, cut))
    n = float(cut)
    tail = n ** (1 - k) / (k - 1) + 0.5 * n ** -k
    rising, power = float(k), n ** (-k - 1)
    for j, bernoulli_term in enumerate(_EULER_MACLAURIN):
        tail += bernoulli_term * rising * power
        rising *= (k + 2 * j + 1) * (k + 2 * j + 2)
        power /= n * n
    return head + tail


# B_{2j}/(2j)! for j = 1..4.
_EULER_MACLAURIN = (1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0)

# ln Γ(2 + z) = (1 − γ) z + Σ_{k≥2} (−1)^k (ζ(k) − 1) z^k / k, |z| < 2.
_LN_GAMMA_TWO_COEFFS = tuple((-1) ** k * _zeta_minus_one(k) / k for k in range(2, 40))
_NEAR_ZERO_RADIUS = 0.2


def _ln_gamma_two(z: float) -> float:
    """ln Γ(2 + z) for |z| ≤ _NEAR_ZERO_RADIUS, relative accuracy kept near z = 0."""
    total = 0.0
    for coeff in reversed(_LN_GAMMA_TWO_COEFFS):
        total = (total + coeff) * z
    return ((1.0 - EULER_GAMMA) + total) * z


def ln_gamma(x: float) -> float:
    """Natural logarithm of Γ(x) for x > 0.

    Near the zeros at 1 and 2 a power series about 2 is used, so the error
    stays relative there.
    """
    x = _check_positive("ln_gamma argument", x)
    if x == 1.0 or x == 2.0:
        return 0.0
    if abs(x - 2.0) < _NEAR_ZERO_RADIUS:
        return _ln_gamma_two(x - 2.0)
    if abs(x - 1.0) < _NEAR_ZERO_RADIUS:
        z = x - 1.0
        return _ln_gamma_two(z) - math.log1p(z)
    y = x
    tmp = x + 5.24218750000000000
    tmp = (x + 0.5) * math.log(tmp) - tmp
    ser = 0.999999999999997092
    for coeff in _LANCZOS_COEFFS:
        y += 1.0
        ser += coeff / y
    return tmp + math.log(2.5066282746310005 * ser / x)


def gamma(x: float) -> float:
    """Γ(x) for x > 0; RangeError once the value leaves double range."""
    log_value = ln_gamma(x)
    if log_value > _LOG_MAX:
        raise RangeError(f"gamma({x}) overflows")
    return math.exp(log_value)


def _recip_gamma_pair(mu: float) -> Tuple[float, float, float, float]:
    """Return gam1, gam2, 1/Γ(1+μ), 1/Γ(1−μ) for |μ| <= 1/2 (Temme's auxiliaries)."""
    even = 0.0
    odd = 0.0
    power = 1.0
    mu2 = mu * mu
    for k in range(0, len(_RECIP_GAMMA_COEFFS), 2):
        odd += _RECIP_GAMMA_COEFFS[k] * power
        if k + 1 < len(_RECIP_GAMMA_COEFFS):
            even += _RECIP_GAMMA_COEFFS[k + 1] * power
        power *= mu2
    # 1/Γ(1±μ) = odd ± μ·even
    gam1 = -even
    gam2 = odd
    return gam1, gam2, odd + mu * even, odd - mu * even


def _temme_series(mu: float, x: float, accuracy: Accuracy) -> Tuple[float, float]:
    """K_μ(x), K_{μ+1}(x) for |μ| <= 1/2 and x <= 2."""
    eps = accuracy.eps
    x2 = 0.5 * x
    pimu = math.pi * mu
    fact = 1.0 if abs(pimu) < eps else pimu / math.sin(pimu)
    d = -math.log(x2)
    e = mu * d
    fact2 = 1.0 if abs(e) < eps else math.sinh(e) / e
    gam1, gam2, gampl, gammi = _recip_gamma_pair(mu)
    ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
    total = ff
    e = math.exp(e)
    p = 0.5 * e / gampl
    q = 0.5 / (e * gammi)
    c = 1.0
    d = x2 * x2
    total1 = p
    mu2 = mu * mu
    for i in range(1, accuracy.max_terms + 1):
        ff = (i * ff + p + q) / (i * i - mu2)
        c *= d / i
        p /= i - mu
        q /= i + mu
        delta = c * ff
        total += delta
        total1 += c * (p - i * ff)
        if abs(delta) < abs(total) * eps:
            return total, total1 * 2.0 / x
    raise ConvergenceError(f"K series did not converge for mu={mu}, x={x}", estimate=abs(delta))


def _steed_cf2(mu: float, x: float, accuracy: Accuracy) -> Tuple[float, float]:
    """e^x·K_μ(x), e^x·K_{μ+1}(x) for |μ| <= 1/2 and x > 2 (Steed's CF2)."""
    eps = accuracy.eps
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25 - mu * mu
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    max_iter = max(accuracy.max_terms, 10000)
    for i in range(1, max_iter + 1):
        a -= 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < eps:
            h = a1 * h
            k_mu = math.sqrt(math.pi / (2.0 * x)) / s
            return k_mu, k_mu * (mu + x + 0.5 - h) / x
    raise ConvergenceError(f"K continued fraction did not converge for mu={mu}, x={x}",
                           estimate=abs(dels / s))


def log_bessel_k(nu: float, x: float, accuracy: Accuracy = DEFAULT_ACCURACY) -> float:
    """ln K_ν(x) for real ν and x > 0, free of overflow in the recurrence.

    K is even in ν, so the order is normalized to |ν| on entry.
    """
    x = _check_positive("bessel_k argument", x)
    nu = abs(float(nu))
    if not math.isfinite(nu):
        raise DomainError("bessel_k order must be finite")
    nl = int(nu + 0.5)
    mu = nu - nl
    if x <= 2.0:
        k_mu, k_mu1 = _temme_series(mu, x, accuracy)
        log_scale = 0.0
    else:
        k_mu, k_mu1 = _steed_cf2(mu, x, accuracy)
        log_scale = -x
    two_over_x = 2.0 / x
    for i in range(1, nl + 1):
        k_next = (mu + i) * two_over_x * k_mu1 + k_mu
        k_mu, k_mu1 = k_mu1, k_next
        if k_mu1 > _RESCALE:
            k_mu /= _RESCALE
            k_mu1 /= _RESCALE
            log_scale += _LOG_RESCALE
    return math.log(k_mu) + log_scale


def bessel_k(nu: float, x: float, accuracy: Accuracy = DEFAULT_ACCURACY) -> float:
    """Modified Bessel function of the second kind K_ν(x).

    Temme's series for x <= 2, Steed's continued fraction above, then forward
    recurrence in the order. Raises RangeError instead of returning inf or 0.
    """
    log_value = log_bessel_k(nu, x, accuracy)
    if log_value > _LOG_MAX:
        raise RangeError(f"K_{nu}({x}) overflows (log value {log_value:.6g})")
    if log_value < _LOG_MIN:
        raise RangeError(f"K_{nu}({x}) underflows (log value {log_value:.6g})")
    return math.exp(log_value)


def bessel_k_derivative(nu: float, x: float, accuracy: Accuracy = DEFAULT_ACCURACY) -> float:
    """K'_ν(x) = −(K_{ν−1}(x) + K_{ν+1}(x)) / 2."""
    return -0.5 * (bessel_k(nu - 1.0, x, accuracy) + bessel_k(nu + 1.0, x, accuracy))


def _e1_series(x: np.ndarray, accuracy: Accuracy) -> np.ndarray:
    eps = accuracy.eps
    total = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, accuracy.max_terms + 1):
        term = term * (-x / k)
        contribution = term / k
        total += contribution
        if np.all(np.abs(contribution) <= eps * np.abs(total)):
            return -EULER_GAMMA - np.log(x) - total
    raise ConvergenceError("E1 series did not converge",
                           estimate=float(np.max(np.abs(contribution))))


def _e1_scaled_continued_fraction(x: np.ndarray, accuracy: Accuracy) -> np.ndarray:
    """e^x·E₁(x) for x > 1 by modified Lentz on the even continued fraction."""
    eps = accuracy.eps
    b = x + 1.0
    c = np.full_like(x, 1.0 / _FPMIN)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, accuracy.max_terms + 1):
        an = -float(i * i)
        b = b + 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= eps
        if not active.any():
            return h
    raise ConvergenceError("E1 continued fraction did not converge",
                           estimate=float(np.max(np.abs(delta - 1.0))))


def exp_integral_e1(x: Union[float, np.ndarray],
                    accuracy: Accuracy = DEFAULT_ACCURACY) -> Union[float, np.ndarray]:
    """Exponential integral E₁(x) = ∫ₓ^∞ e^{−z}/z dz for x > 0.

    Accepts a scalar or an array; the power series is used for x <= 1 and the
    continued fraction above.
    """
    values = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
        raise DomainError("exp_integral_e1 requires finite x > 0")
    flat = values.reshape(-1)
    out = np.empty_like(flat)
    small = flat <= 1.0
    if small.any():
        out[small] = _e1_series(flat[small], accuracy)
    if (~small).any():
        large = flat[~small]
        out[~small] = _e1_scaled_continued_fraction(large, accuracy) * np.exp(-large)
    if values.ndim == 0:
        return float(out[0])
    return out.reshape(values.shape)


def log_exp_integral_e1(x: Union[float, np.ndarray],
                        accuracy: Accuracy = DEFAULT_ACCURACY) -> Union[float, np.ndarray]:
    """ln E₁(x), finite even where E₁ itself underflows."""
    values = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
        raise DomainError("log_exp_integral_e1 requires finite x > 0")
    flat = values.reshape(-1)
    out = np.empty_like(flat)
    small = flat <= 1.0
    if small.any():
        out[small] = np.log(_e1_series(flat[small], accuracy))
    if (~small).any():
        large = flat[~small]
        out[~small] = np.log(_e1_scaled_continued_fraction(large, accuracy)) - large
    if values.ndim == 0:
        return float(out[0])
    return out.reshape(values.shape)
