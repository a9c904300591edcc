"""
Grid checks of the evolution equations satisfied by the VG density.

Each check evaluates the left- and right-hand side of one equation on a
(t, x) grid and packages the pointwise residuals in a ResidualReport. A
numerical failure at a single point is recorded in `failures` and leaves the
rest of the report intact.
"""

import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, PreconditionError, VgError
from .model import (VgParams, factor_params, vg_char, vg_density, vg_density_at_origin,
                    vg_density_dx, vg_density_grid, vg_density_quadrature, vg_log_symbol)
from .operators import (Func1D, phillips_apply, phillips_symbol, weyl_minus,
                        weyl_minus_symbol, weyl_plus, weyl_plus_symbol)
from .quadrature import DEFAULT_QUAD, QuadConfig
from .special_fn import bessel_k, bessel_k_derivative

logger = logging.getLogger(__name__)

RESIDUAL_FLOOR = 1e-12
DEFAULT_PUNCTURE = 0.05


class EquationId(str, Enum):
    TIME_NONLOCAL = "time_nonlocal"
    DRIFTED_NONLOCAL = "drifted_nonlocal"
    SPACE_ODE = "space_ode"
    PHILLIPS = "phillips"
    BEGHIN_SHIFT = "beghin_shift"


# Acceptance tolerance on max_rel for each equation.
TOLERANCES: Dict[EquationId, float] = {
    EquationId.TIME_NONLOCAL: 1e-4,
    EquationId.DRIFTED_NONLOCAL: 1e-3,
    EquationId.SPACE_ODE: 1e-9,
    EquationId.PHILLIPS: 1e-4,
    EquationId.BEGHIN_SHIFT: 1e-9,
}


@dataclass(frozen=True)
class Grid2D:
    """Ascending positive times and ascending points outside (−δ, δ).

    A single point per axis is accepted: the checks difference in time with
    their own stencil around each t and never across grid nodes, so a grid
    is only a list of evaluation points.
    """
    t_values: Tuple[float, ...]
    x_values: Tuple[float, ...]
    puncture: float = DEFAULT_PUNCTURE

    def __post_init__(self):
        object.__setattr__(self, 't_values', tuple(float(t) for t in self.t_values))
        object.__setattr__(self, 'x_values', tuple(float(x) for x in self.x_values))
        if not self.t_values or not self.x_values:
            raise DomainError("a grid needs at least one point per axis")
        if any(not (math.isfinite(t) and t > 0) for t in self.t_values):
            raise DomainError(f"grid times must be positive, got {self.t_values}")
        if any(not math.isfinite(x) for x in self.x_values):
            raise DomainError(f"grid points must be finite, got {self.x_values}")
        if any(b <= a for a, b in zip(self.t_values, self.t_values[1:])):
            raise DomainError("grid times must be strictly ascending")
        if any(b <= a for a, b in zip(self.x_values, self.x_values[1:])):
            raise DomainError("grid points must be strictly ascending")
        if self.puncture < 0:
            raise DomainError(f"puncture must be >= 0, got {self.puncture}")
        inside = [x for x in self.x_values if abs(x) < self.puncture or x == 0.0]
        if inside:
            raise DomainError(f"grid points {inside} fall in the punctured zone |x| < {self.puncture}")

    def points(self) -> List[Tuple[float, float]]:
        """(t, x) pairs in report order: t outer, x inner."""
        return [(t, x) for t in self.t_values for x in self.x_values]

    @property
    def size(self) -> int:
        return len(self.t_values) * len(self.x_values)


@dataclass
class ResidualReport:
    equation_id: EquationId
    grid: Grid2D
    lhs: np.ndarray
    rhs: np.ndarray
    abs_residual: np.ndarray
    rel_residual: np.ndarray
    max_abs: float
    max_rel: float
    tolerances_used: Dict[str, Any]
    tolerance: float
    failures: Dict[int, str] = field(default_factory=dict)

    @classmethod
    def build(cls, equation_id: EquationId, grid: Grid2D, lhs: Sequence[float],
              rhs: Sequence[float], q: Optional[QuadConfig] = None,
              scale: Optional[Sequence[float]] = None,
              failures: Optional[Dict[int, str]] = None) -> "ResidualReport":
        """Assemble a report; `scale` overrides the max(|lhs|, |rhs|) normalization."""
        lhs = np.asarray(lhs, dtype=float)
        rhs = np.asarray(rhs, dtype=float)
        abs_residual = np.abs(lhs - rhs)
        if scale is None:
            scale = np.maximum(np.abs(lhs), np.abs(rhs))
        scale = np.maximum(np.asarray(scale, dtype=float), RESIDUAL_FLOOR)
        rel_residual = abs_residual / scale
        finite = np.isfinite(abs_residual)
        max_abs = float(np.max(abs_residual[finite])) if finite.any() else math.nan
        max_rel = float(np.max(rel_residual[finite])) if finite.any() else math.nan
        return cls(
            equation_id=equation_id, grid=grid, lhs=lhs, rhs=rhs,
            abs_residual=abs_residual, rel_residual=rel_residual,
            max_abs=max_abs, max_rel=max_rel,
            tolerances_used=(q or DEFAULT_QUAD).snapshot(),
            tolerance=TOLERANCES[equation_id],
            failures=dict(failures or {}),
        )

    @property
    def passed(self) -> bool:
        return not self.failures and math.isfinite(self.max_rel) and self.max_rel <= self.tolerance

    def to_rows(self) -> List[Dict[str, Any]]:
        rows = []
        for index, (t, x) in enumerate(self.grid.points()):
            rows.append({
                't': t, 'x': x,
                'lhs': float(self.lhs[index]), 'rhs': float(self.rhs[index]),
                'abs_residual': float(self.abs_residual[index]),
                'rel_residual': float(self.rel_residual[index]),
                'failure': self.failures.get(index, ''),
            })
        return rows

    def summary(self) -> Dict[str, Any]:
        return {
            'equation': self.equation_id.value,
            'points': self.grid.size,
            'max_abs': self.max_abs,
            'max_rel': self.max_rel,
            'tolerance': self.tolerance,
            'failures': len(self.failures),
            'passed': self.passed,
        }


def _time_step(t: float, time_step: Optional[float]) -> float:
    return time_step if time_step is not None else max(1e-4, 1e-4 * t)


def _require_bounded(p: VgParams, grid: Grid2D, time_step: float = 0.0) -> None:
    t_min = grid.t_values[0] - time_step
    if p.a * t_min <= 0.5:
        raise PreconditionError(
            f"equation checks need at > 1/2 on the whole grid (a={p.a}, t={t_min:g})")


def _decay_constant(p: VgParams, t: float, rate: float) -> float:
    """sup_x p(t, x) e^{rate|x|} for the driftless density, rate < √b.

    The envelope x^{at−1} e^{−(√b − rate)x} peaks near (at − 1)/(√b − rate);
    a log grid reaching well past that point is scanned and the maximum padded
    by a quarter.
    """
    gap = math.sqrt(p.b) - rate
    crest = max(p.a * t - 1.0, 0.0) / gap
    xs = np.geomspace(1e-6, 4.0 * crest + 50.0 / gap, 512)
    scanned = float(np.max(vg_density_grid(p, t, xs) * np.exp(rate * xs)))
    return 1.25 * max(float(vg_density_at_origin(p, t)), scanned)


def density_slice(p: VgParams, t: float) -> Func1D:
    """x ↦ p(t, x) with analytic derivatives; the origin is a breakpoint.

    Declares decay at half the tail rate √b.
    """
    p.require_driftless("density_slice")

    def value(x: float) -> float:
        return float(vg_density(p, t, x))

    def first(x: float) -> float:
        return 0.0 if x == 0.0 else vg_density_dx(p, t, x, 1)

    def second(x: float) -> float:
        return 0.0 if x == 0.0 else vg_density_dx(p, t, x, 2)

    rate = 0.5 * math.sqrt(p.b)
    return Func1D(value=value, first=first, second=second,
                  decay_constant=_decay_constant(p, t, rate), decay_rate=rate,
                  breakpoints=(0.0,), name=f"p({t:g},x)")


def _evaluate(grid: Grid2D, pointwise: Callable[[float, float], Tuple[float, float]],
              label: str) -> Tuple[List[float], List[float], Dict[int, str]]:
    lhs, rhs, failures = [], [], {}
    for index, (t, x) in enumerate(grid.points()):
        try:
            left, right = pointwise(t, x)
        except VgError as e:
            logger.warning("%s: point (t=%g, x=%g) failed: %s", label, t, x, e)
            failures[index] = f"{type(e).__name__}: {e}"
            left, right = math.nan, math.nan
        lhs.append(left)
        rhs.append(right)
    return lhs, rhs, failures


def _central_time_derivative(density: Callable[[float], float], t: float, h: float) -> float:
    return (density(t + h) - density(t - h)) / (2.0 * h)


def check_time_nonlocal(p: VgParams, grid: Grid2D, q: QuadConfig = DEFAULT_QUAD,
                        time_step: Optional[float] = None) -> ResidualReport:
    """∂ₜp = −(𝒟⁺_{a,√b} + 𝒟⁻_{a,√b}) p on the grid."""
    p.require_driftless("check_time_nonlocal")
    _require_bounded(p, grid, _time_step(grid.t_values[0], time_step))
    rates = factor_params(p)

    def pointwise(t: float, x: float) -> Tuple[float, float]:
        h = _time_step(t, time_step)
        left = _central_time_derivative(lambda s: float(vg_density(p, s, x)), t, h)
        u = density_slice(p, t)
        right = -(weyl_plus(rates.gain, u, x, q) + weyl_minus(rates.loss, u, x, q))
        return left, right

    lhs, rhs, failures = _evaluate(grid, pointwise, "time_nonlocal")
    report = ResidualReport.build(EquationId.TIME_NONLOCAL, grid, lhs, rhs, q, failures=failures)
    logger.info("time_nonlocal: max_abs=%.3g max_rel=%.3g", report.max_abs, report.max_rel)
    return report


def _drifted_density(p: VgParams, t: float, x: float, q: QuadConfig) -> float:
    value = vg_density_quadrature(p, t, x, q)
    if not isinstance(value, float):
        raise DomainError(f"drifted density diverges at (t={t}, x={x})")
    return value


def drifted_slice(p: VgParams, t: float, q: QuadConfig) -> Func1D:
    """x ↦ p^θ(t, x) by quadrature, derivative by finite differences.

    Differences never straddle the kink at the origin: within one step of it
    they are taken one-sided, away from 0.
    """

    def value(x: float) -> float:
        return _drifted_density(p, t, x, q)

    def first(x: float) -> float:
        h = 1e-3 * max(1.0, abs(x))
        if abs(x) >= h:
            return (value(x + h) - value(x - h)) / (2.0 * h)
        if x == 0.0:
            return 0.5 * (_one_sided(value, x, h) + _one_sided(value, x, -h))
        return _one_sided(value, x, math.copysign(h, x))

    # p^θ(t, x) = e^{θx/2} (b/b′)^{at} p_{b′}(t, x) with b′ = b + θ²/4.
    pair = factor_params(p)
    rate = 0.5 * min(pair.gain.b, pair.loss.b)
    shifted = VgParams(p.a, p.b + 0.25 * p.theta * p.theta)
    constant = ((p.b / shifted.b) ** (p.a * t)
                * _decay_constant(shifted, t, rate + 0.5 * abs(p.theta)))
    return Func1D(value=value, first=first, decay_constant=constant, decay_rate=rate,
                  breakpoints=(0.0,), fd_step=1e-3, name=f"p_theta({t:g},x)")


def _one_sided(func: Callable[[float], float], x: float, h: float) -> float:
    """Second-order difference using x, x + h, x + 2h (h may be negative)."""
    return (-3.0 * func(x) + 4.0 * func(x + h) - func(x + 2.0 * h)) / (2.0 * h)


def check_drifted_nonlocal(p: VgParams, grid: Grid2D, q: QuadConfig = DEFAULT_QUAD,
                           time_step: Optional[float] = None) -> ResidualReport:
    """∂ₜp^θ = −(𝒟⁺_{a,r₋} + 𝒟⁻_{a,r₊}) p^θ, both sides from the subordination integral.

    For θ = 0 this delegates to check_time_nonlocal, so the two reports coincide.
    """
    if not p.drifted:
        report = check_time_nonlocal(p, grid, q, time_step)
        report.equation_id = EquationId.DRIFTED_NONLOCAL
        report.tolerance = TOLERANCES[EquationId.DRIFTED_NONLOCAL]
        return report
    _require_bounded(p, grid, _time_step(grid.t_values[0], time_step))
    rates = factor_params(p)
    inner_q = q.tightened(100.0)

    def pointwise(t: float, x: float) -> Tuple[float, float]:
        h = _time_step(t, time_step)
        left = _central_time_derivative(lambda s: _drifted_density(p, s, x, inner_q), t, h)
        u = drifted_slice(p, t, inner_q)
        right = -(weyl_plus(rates.gain, u, x, q) + weyl_minus(rates.loss, u, x, q))
        return left, right

    lhs, rhs, failures = _evaluate(grid, pointwise, "drifted_nonlocal")
    report = ResidualReport.build(EquationId.DRIFTED_NONLOCAL, grid, lhs, rhs, q,
                                  failures=failures)
    logger.info("drifted_nonlocal: max_abs=%.3g max_rel=%.3g", report.max_abs, report.max_rel)
    return report


def check_space_ode(p: VgParams, grid: Grid2D) -> ResidualReport:
    """x p″ − (2at − 2) p′ − b x p = 0, all terms in closed form.

    LHS is x p″, RHS is (2at − 2) p′ + b x p; residuals are normalized by the
    largest of the three term magnitudes.
    """
    p.require_driftless("check_space_ode")
    scale: List[float] = []

    def pointwise(t: float, x: float) -> Tuple[float, float]:
        dens = float(vg_density(p, t, x))
        d1 = vg_density_dx(p, t, x, 1)
        d2 = vg_density_dx(p, t, x, 2)
        terms = (x * d2, (2.0 * p.a * t - 2.0) * d1, p.b * x * dens)
        scale.append(max(abs(term) for term in terms))
        return terms[0], terms[1] + terms[2]

    lhs, rhs, failures = _evaluate(grid, pointwise, "space_ode")
    scale_full, it = [], iter(scale)
    for index in range(grid.size):
        scale_full.append(math.nan if index in failures else next(it))
    report = ResidualReport.build(EquationId.SPACE_ODE, grid, lhs, rhs, None,
                                  scale=scale_full, failures=failures)
    logger.info("space_ode: max_abs=%.3g max_rel=%.3g", report.max_abs, report.max_rel)
    return report


def check_phillips_eq(p: VgParams, grid: Grid2D, q: QuadConfig = DEFAULT_QUAD,
                      time_step: Optional[float] = None) -> ResidualReport:
    """∂ₜp = −Φ(−Δ) p with the Gamma law (a, b)."""
    p.require_driftless("check_phillips_eq")
    _require_bounded(p, grid, _time_step(grid.t_values[0], time_step))
    clock = p.subordinator

    def pointwise(t: float, x: float) -> Tuple[float, float]:
        h = _time_step(t, time_step)
        left = _central_time_derivative(lambda s: float(vg_density(p, s, x)), t, h)
        right = phillips_apply(clock, density_slice(p, t), x, q)
        return left, right

    lhs, rhs, failures = _evaluate(grid, pointwise, "phillips")
    report = ResidualReport.build(EquationId.PHILLIPS, grid, lhs, rhs, q, failures=failures)
    logger.info("phillips: max_abs=%.3g max_rel=%.3g", report.max_abs, report.max_rel)
    return report


def check_beghin_shift(p: VgParams, t: float, x_values: Sequence[float]) -> ResidualReport:
    """∂²ₓp(t, x) = b (p(t, x) − p(t − 1/a, x)), valid for at > 1."""
    p.require_driftless("check_beghin_shift")
    shape = p.a * t
    if not shape > 1.0 or not p.a * (t - 1.0 / p.a) > 0:
        raise PreconditionError(
            f"the time-shift equation holds only for at > 1 and a(t - 1/a) > 0 (at={shape:g})")
    grid = Grid2D((t,), tuple(x_values))
    earlier = t - 1.0 / p.a

    def pointwise(s: float, x: float) -> Tuple[float, float]:
        left = vg_density_dx(p, s, x, 2)
        right = p.b * (float(vg_density(p, s, x)) - float(vg_density(p, earlier, x)))
        return left, right

    lhs, rhs, failures = _evaluate(grid, pointwise, "beghin_shift")
    report = ResidualReport.build(EquationId.BEGHIN_SHIFT, grid, lhs, rhs, None, failures=failures)
    logger.info("beghin_shift: max_abs=%.3g max_rel=%.3g", report.max_abs, report.max_rel)
    return report


def bessel_ode_residual(nu: float, z: float) -> float:
    """z²K″ + zK′ − (z² + ν²)K with K″ from the recurrence for K′."""
    k = bessel_k(nu, z)
    k1 = bessel_k_derivative(nu, z)
    # K″_ν = (K_{ν−2} + 2K_ν + K_{ν+2}) / 4
    k2 = 0.25 * (bessel_k(abs(nu - 2.0), z) + 2.0 * k + bessel_k(nu + 2.0, z))
    return z * z * k2 + z * k1 - (z * z + nu * nu) * k


def fourier_residual(equation_id: EquationId, p: VgParams, t: float, xi: float) -> float:
    """|LHS − RHS| of the equation's Fourier-side identity, all closed form."""
    equation_id = EquationId(equation_id)
    xi = float(xi)
    p_hat = vg_char(p, t, xi)
    d_dt = -vg_log_symbol(p, xi) * p_hat
    if equation_id is EquationId.TIME_NONLOCAL:
        p.require_driftless("time_nonlocal")
        rates = factor_params(p)
        rhs = -(weyl_plus_symbol(rates.gain, xi) + weyl_minus_symbol(rates.loss, xi)) * p_hat
    elif equation_id is EquationId.DRIFTED_NONLOCAL:
        rates = factor_params(p)
        rhs = -(weyl_plus_symbol(rates.gain, xi) + weyl_minus_symbol(rates.loss, xi)) * p_hat
    elif equation_id is EquationId.PHILLIPS:
        p.require_driftless("phillips")
        rhs = phillips_symbol(p.subordinator, xi) * p_hat
    elif equation_id is EquationId.BEGHIN_SHIFT:
        # −ξ² p̂(t) = b (p̂(t) − p̂(t − 1/a))
        p.require_driftless("beghin_shift")
        if t < 1.0 / p.a:
            raise PreconditionError(f"the time-shift identity needs t >= 1/a (t={t:g}, a={p.a:g})")
        return abs(-xi * xi * p_hat - p.b * (p_hat - vg_char(p, t - 1.0 / p.a, xi)))
    else:
        # x p″ − (2at−2)p′ − bxp = 0 becomes (ξ² + b) ∂_ξ p̂ + 2atξ p̂ = 0.
        p.require_driftless("space_ode")
        d_xi = -2.0 * p.a * t * xi / p.b / (1.0 + xi * xi / p.b) * p_hat
        return abs((xi * xi + p.b) * d_xi + 2.0 * p.a * t * xi * p_hat)
    return abs(d_dt - rhs)


def initial_condition_residual(p: VgParams, xi: float) -> float:
    """|p̂(0, ξ) − 1|: the Fourier form of p(0, x) = δ(x)."""
    return abs(vg_char(p, 0.0, xi) - 1.0)
