"""
Generalized Weyl derivatives and the Phillips operator applied to test functions.

    𝒟⁺u(x) = ∫₀^∞ u′(x − s) Π̄(s) ds
    𝒟⁻u(x) = −∫₀^∞ u′(x + s) Π̄(s) ds
    −Φ(−Δ)u(x) = a ∫₀^∞ (G_y u(x) − u(x)) e^{−by}/y dy

with Π̄(s) = a E₁(bs) and G_y the heat semigroup of variance 2y. The symbols
are Fourier multipliers for f̂(ξ) = ∫ e^{iξx} f(x) dx, so on a plane wave
e^{iξx} the Weyl operators multiply by weyl_plus_symbol(−ξ) and
weyl_minus_symbol(−ξ).

Operators never cache; a Func1D's callables must be safe to call from
several threads.
"""

import cmath
import math
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np

from .errors import DomainError, IntegrabilityError
from .model import GammaParams
from .quadrature import (DEFAULT_QUAD, QuadConfig, gauss_hermite, gaussian_cutoff,
                         integrate_pieces)
from .special_fn import exp_integral_e1

logger = logging.getLogger(__name__)

# Lower end of the log-substituted kernel region, relative to ln(1/b).
_LOG_SPAN = 40.0

# Largest Gaussian spread 2√y handed to the Hermite rule for a decaying u.
_HERMITE_MAX_SPREAD = 1.0
_SUPPORT_PIECES = 16


@dataclass(frozen=True)
class Func1D:
    """A real test function u with its derivatives and a decay declaration.

    `first` / `second` are analytic derivatives; when absent, central
    differences with step fd_step·max(1, |x|) are used. The declared bound is
    |u(x)| ≤ decay_constant · e^{−decay_rate |x|}. `breakpoints` lists points
    where u or u′ is not smooth.
    """
    value: Callable[[float], float]
    first: Optional[Callable[[float], float]] = None
    second: Optional[Callable[[float], float]] = None
    decay_constant: float = 1.0
    decay_rate: float = 0.0
    breakpoints: Tuple[float, ...] = field(default_factory=tuple)
    fd_step: float = 1e-5
    name: str = "u"

    def __post_init__(self):
        if self.decay_constant <= 0 or self.decay_rate < 0:
            raise DomainError("decay bound needs decay_constant > 0 and decay_rate >= 0")

    def __call__(self, x: float) -> float:
        return float(self.value(x))

    def _step(self, x: float) -> float:
        return self.fd_step * max(1.0, abs(x))

    def d1(self, x: float) -> float:
        if self.first is not None:
            return float(self.first(x))
        h = self._step(x)
        return (self.value(x + h) - self.value(x - h)) / (2.0 * h)

    def d2(self, x: float) -> float:
        if self.second is not None:
            return float(self.second(x))
        h = self._step(x)
        if self.first is not None:
            return (self.first(x + h) - self.first(x - h)) / (2.0 * h)
        h = math.sqrt(h)
        return (self.value(x + h) - 2.0 * self.value(x) + self.value(x - h)) / (h * h)

    def check_derivative(self, points: Iterable[float], rel_tol: float = 1e-5,
                         floor: float = 1e-8) -> bool:
        """Analytic first derivative against central differences of the value."""
        if self.first is None:
            return True
        for x in points:
            h = self._step(x)
            numeric = (self.value(x + h) - self.value(x - h)) / (2.0 * h)
            exact = float(self.first(x))
            if abs(numeric - exact) > rel_tol * max(abs(exact), floor):
                logger.debug("%s: derivative mismatch at x=%g (%g vs %g)",
                             self.name, x, exact, numeric)
                return False
        return True

    def within_decay_bound(self, y: float) -> bool:
        bound = self.decay_constant * math.exp(-self.decay_rate * abs(y))
        return abs(self.value(y)) <= bound * (1.0 + 1e-9) + 1e-300

    def reflected(self) -> "Func1D":
        """ũ(y) = u(−y)."""
        value, first, second = self.value, self.first, self.second
        return replace(
            self,
            value=lambda y: value(-y),
            first=None if first is None else (lambda y: -first(-y)),
            second=None if second is None else (lambda y: second(-y)),
            breakpoints=tuple(-c for c in self.breakpoints),
            name=f"{self.name}(-x)",
        )

    def shifted(self, c: float) -> "Func1D":
        """u(· − c); the decay constant grows by e^{rate·|c|}."""
        value, first, second = self.value, self.first, self.second
        return replace(
            self,
            value=lambda y: value(y - c),
            first=None if first is None else (lambda y: first(y - c)),
            second=None if second is None else (lambda y: second(y - c)),
            decay_constant=self.decay_constant * math.exp(self.decay_rate * abs(c)),
            breakpoints=tuple(b + c for b in self.breakpoints),
            name=f"{self.name}(x-{c:g})",
        )

    def scaled_sum(self, alpha: float, other: "Func1D", beta: float) -> "Func1D":
        """αu + βv, for linearity checks."""
        u, v = self, other
        return Func1D(
            value=lambda y: alpha * u(y) + beta * v(y),
            first=lambda y: alpha * u.d1(y) + beta * v.d1(y),
            second=lambda y: alpha * u.d2(y) + beta * v.d2(y),
            decay_constant=abs(alpha) * u.decay_constant + abs(beta) * v.decay_constant,
            decay_rate=min(u.decay_rate, v.decay_rate),
            breakpoints=tuple(sorted(set(u.breakpoints) | set(v.breakpoints))),
            fd_step=min(u.fd_step, v.fd_step),
            name=f"{alpha:g}*{u.name}+{beta:g}*{v.name}",
        )

    @classmethod
    def gaussian(cls) -> "Func1D":
        """e^{−x²}."""
        return cls(value=lambda x: math.exp(-x * x),
                   first=lambda x: -2.0 * x * math.exp(-x * x),
                   second=lambda x: (4.0 * x * x - 2.0) * math.exp(-x * x),
                   decay_constant=math.exp(1.0), decay_rate=2.0, name="exp(-x^2)")

    @classmethod
    def cosine(cls, xi: float) -> "Func1D":
        """cos(ξx), the real part of a plane wave."""
        return cls(value=lambda x: math.cos(xi * x),
                   first=lambda x: -xi * math.sin(xi * x),
                   second=lambda x: -xi * xi * math.cos(xi * x),
                   name=f"cos({xi:g}x)")

    @classmethod
    def sine(cls, xi: float) -> "Func1D":
        """sin(ξx), the imaginary part of a plane wave."""
        return cls(value=lambda x: math.sin(xi * x),
                   first=lambda x: xi * math.cos(xi * x),
                   second=lambda x: -xi * xi * math.sin(xi * x),
                   name=f"sin({xi:g}x)")

    @classmethod
    def constant(cls, c: float) -> "Func1D":
        return cls(value=lambda x: c, first=lambda x: 0.0, second=lambda x: 0.0,
                   decay_constant=max(abs(c), 1e-300), name=f"{c:g}")


# Fourier symbols

def weyl_plus_symbol(p: GammaParams, xi: float) -> complex:
    """a ln(1 − iξ/b)."""
    return p.a * cmath.log(complex(1.0, -xi / p.b))


def weyl_minus_symbol(p: GammaParams, xi: float) -> complex:
    """a ln(1 + iξ/b)."""
    return p.a * cmath.log(complex(1.0, xi / p.b))


def phillips_symbol(p: GammaParams, xi: float) -> float:
    """−a ln(1 + ξ²/b)."""
    return -p.a * math.log1p(xi * xi / p.b)


# Kernel integrals

def _scan_points(p: GammaParams, upper: float) -> np.ndarray:
    return np.geomspace(1e-3 / p.b, upper, 64)


def _truncation_point(p: GammaParams, sup_derivative: float, q: QuadConfig) -> float:
    """S with a·e^{−bS}/(bS)·sup|u′| below tail_cut·abs_tol (E₁(z) < e^{−z}/z)."""
    target = q.tail_cut * q.abs_tol / max(p.a * sup_derivative, 1e-300)
    z = 1.0
    while math.exp(-z) / z > target:
        z += 1.0
    return max(z / p.b, 1.0 / p.b)


def _check_decay(u: Func1D, points: Iterable[float]) -> None:
    for y in points:
        if not u.within_decay_bound(y):
            raise IntegrabilityError(
                f"{u.name} violates its declared decay bound at y={y:g} "
                f"(|u|={abs(u(y)):.3g}, bound {u.decay_constant:g}*exp(-{u.decay_rate:g}|y|))")


def _kernel_integral(p: GammaParams, derivative: Callable[[float], float],
                     s_breaks: List[float], q: QuadConfig, label: str) -> float:
    """∫₀^∞ derivative(s) · a E₁(bs) ds.

    (0, 1/b] is integrated in v = ln s, which turns the logarithmic kernel
    singularity into an exponentially small weight; (1/b, S] is split on a
    doubling grid and S is chosen from the E₁ tail bound.
    """
    inner_end = 1.0 / p.b
    sup = max(abs(derivative(s)) for s in _scan_points(p, 64.0 / p.b))
    upper = _truncation_point(p, sup, q)

    def inner(v: float) -> float:
        s = math.exp(v)
        return derivative(s) * p.a * exp_integral_e1(p.b * s) * s

    v_min = math.log(inner_end) - _LOG_SPAN
    v_breaks = [math.log(s) for s in s_breaks if 0.0 < s < inner_end]
    inner_value, _ = integrate_pieces(inner, v_min, math.log(inner_end), q,
                                      breakpoints=v_breaks, label=label)

    def outer(s: float) -> float:
        return derivative(s) * p.a * exp_integral_e1(p.b * s)

    doubling = []
    edge = 2.0 * inner_end
    while edge < upper:
        doubling.append(edge)
        edge *= 2.0
    outer_value, _ = integrate_pieces(outer, inner_end, upper, q,
                                      breakpoints=doubling + list(s_breaks), label=label)
    return inner_value + outer_value


def weyl_plus(p: GammaParams, u: Func1D, x: float, q: QuadConfig = DEFAULT_QUAD) -> float:
    """𝒟⁺u(x) = ∫₀^∞ u′(x − s) a E₁(bs) ds."""
    _check_decay(u, [x - s for s in _scan_points(p, 64.0 / p.b)])
    s_breaks = [x - c for c in u.breakpoints if c < x]
    return _kernel_integral(p, lambda s: u.d1(x - s), s_breaks, q, label="weyl_plus")


def weyl_minus(p: GammaParams, u: Func1D, x: float, q: QuadConfig = DEFAULT_QUAD) -> float:
    """𝒟⁻u(x) = −∫₀^∞ u′(x + s) a E₁(bs) ds."""
    _check_decay(u, [x + s for s in _scan_points(p, 64.0 / p.b)])
    s_breaks = [c - x for c in u.breakpoints if c > x]
    return -_kernel_integral(p, lambda s: u.d1(x + s), s_breaks, q, label="weyl_minus")


def _defining_form(p: GammaParams, u: Func1D, x: float, q: QuadConfig,
                   direction: float, step: float) -> float:
    """Central difference in x of ∫₀^∞ u(x ∓ s) Π̄(s) ds."""

    def primitive(y: float) -> float:
        s_breaks = [direction * (y - c) for c in u.breakpoints if direction * (y - c) > 0]
        return _kernel_integral(p, lambda s: u(y - direction * s), s_breaks, q,
                                label="weyl defining form")

    return (primitive(x + step) - primitive(x - step)) / (2.0 * step)


def weyl_plus_defining_form(p: GammaParams, u: Func1D, x: float,
                            q: QuadConfig = DEFAULT_QUAD, step: float = 1e-3) -> float:
    """∂ₓ ∫_{−∞}^x u(s) Π̄(x − s) ds, derivative taken outside the integral."""
    return _defining_form(p, u, x, q, 1.0, step)


def weyl_minus_defining_form(p: GammaParams, u: Func1D, x: float,
                             q: QuadConfig = DEFAULT_QUAD, step: float = 1e-3) -> float:
    """−∂ₓ ∫_x^∞ u(s) Π̄(s − x) ds, derivative taken outside the integral."""
    return -_defining_form(p, u, x, q, -1.0, step)


# Phillips operator

def _support_radius(u: Func1D, q: QuadConfig) -> float:
    """R with ∫_{|z|>R} C e^{−κ|z|} dz below tail_cut·abs_tol."""
    target = 0.5 * q.tail_cut * q.abs_tol * u.decay_rate
    return max(math.log(u.decay_constant / target), 1.0) / u.decay_rate


def _heat_on_support(u: Func1D, x: float, y: float, q: QuadConfig) -> float:
    """G_y u(x) integrated in z over the support implied by the decay bound.

    The kernel is at most (4πy)^{−½} ≤ 1, so the discarded mass is bounded by
    that of C e^{−κ|z|} beyond R.
    """
    radius = _support_radius(u, q)
    four_y = 4.0 * y
    grid = np.linspace(-radius, radius, _SUPPORT_PIECES + 1)[1:-1]
    breaks = list(grid) + [x, 0.0] + list(u.breakpoints)
    value, _ = integrate_pieces(lambda z: math.exp(-(x - z) ** 2 / four_y) * u(z),
                                -radius, radius, q, breakpoints=breaks,
                                label="heat semigroup")
    return value / math.sqrt(math.pi * four_y)


def heat_semigroup(u: Func1D, x: float, y: float, q: QuadConfig = DEFAULT_QUAD) -> float:
    """G_y u(x) = ∫ e^{−(x−z)²/4y}/√(4πy) u(z) dz.

    With z = x − 2√y·w this is π^{−½} ∫ e^{−w²} u(x − 2√y w) dw: Gauss-Hermite
    for smooth u, piecewise adaptive quadrature on |w| ≤ W when u has
    breakpoints. Once 2√y exceeds the unit length scale of a decaying u the
    peak of u is too narrow in w, and the integral is taken in z instead.
    """
    if y < 0:
        raise DomainError(f"semigroup time must be >= 0, got {y}")
    if y == 0:
        return u(x)
    scale = 2.0 * math.sqrt(y)
    if u.decay_rate > 0 and scale > _HERMITE_MAX_SPREAD:
        return _heat_on_support(u, x, y, q)
    if not u.breakpoints:
        nodes, weights = gauss_hermite(q.hermite_nodes)
        total = sum(w * u(x - scale * node) for node, w in zip(nodes, weights))
        return total / math.sqrt(math.pi)
    cutoff = gaussian_cutoff(q)
    w_breaks = [(x - c) / scale for c in u.breakpoints]
    value, _ = integrate_pieces(lambda w: math.exp(-w * w) * u(x - scale * w), -cutoff, cutoff,
                                q, breakpoints=w_breaks, label="heat semigroup")
    return value / math.sqrt(math.pi)


def phillips_apply(p: GammaParams, u: Func1D, x: float, q: QuadConfig = DEFAULT_QUAD) -> float:
    """−Φ(−Δ)u(x) = a ∫₀^∞ (G_y u(x) − u(x)) e^{−by}/y dy.

    On (0, taylor_guard] the bracket is replaced by y·u″(x), which contributes
    a u″(x)(1 − e^{−b·guard})/b.
    """
    guard = q.taylor_guard
    _check_decay(u, [x + sign * s for s in _scan_points(p, 64.0 / p.b) for sign in (-1.0, 1.0)])
    near = p.a * u.d2(x) * (-math.expm1(-p.b * guard)) / p.b
    ux = u(x)
    inner_q = replace(q, abs_tol=max(q.abs_tol * 1e-3, 1e-14), rel_tol=max(q.rel_tol * 1e-3, 1e-13))

    def integrand(y: float) -> float:
        return p.a * (heat_semigroup(u, x, y, inner_q) - ux) * math.exp(-p.b * y) / y

    # y ~ (x − c)² puts the Gaussian bulk on a breakpoint.
    y_breaks = [(x - c) ** 2 / 4.0 for c in u.breakpoints if (x - c) ** 2 / 4.0 > guard]
    y_breaks.append(1.0 / p.b)
    far, _ = integrate_pieces(integrand, guard, math.inf, q, breakpoints=y_breaks,
                              label="phillips_apply")
    return near + far
