"""
Adaptive quadrature shared by the density oracle, the operators and the CDF.

All semi-infinite integrals in the package go through `integrate_pieces`,
which splits the range at caller supplied breakpoints and hands each piece to
scipy's adaptive Gauss-Kronrod routine (QUADPACK).
"""

import math
import logging
from dataclasses import asdict, dataclass, replace
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

# QUADPACK estimates are pessimistic; anything within this factor of the
# requested tolerance is accepted.
_ESTIMATE_SLACK = 10.0


@dataclass(frozen=True)
class QuadConfig:
    """Tolerances and truncation policy for every numerical integral."""
    abs_tol: float = 1e-9
    rel_tol: float = 1e-8
    max_subdivisions: int = 200
    tail_cut: float = 1e-12
    hermite_nodes: int = 80
    taylor_guard: float = 1e-4

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError(
                f"quadrature tolerances must be positive, got abs_tol={self.abs_tol}, "
                f"rel_tol={self.rel_tol}")
        if not 0 < self.tail_cut < 1:
            raise DomainError(f"tail_cut must lie in (0, 1), got {self.tail_cut}")
        if self.max_subdivisions < 10:
            raise DomainError(f"max_subdivisions must be >= 10, got {self.max_subdivisions}")
        if self.hermite_nodes < 2:
            raise DomainError(f"hermite_nodes must be >= 2, got {self.hermite_nodes}")
        if not self.taylor_guard > 0:
            raise DomainError(f"taylor_guard must be positive, got {self.taylor_guard}")

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> "QuadConfig":
        section = config.get('quadrature', {})
        return cls(
            abs_tol=float(section.get('abs_tol', cls.abs_tol)),
            rel_tol=float(section.get('rel_tol', cls.rel_tol)),
            max_subdivisions=int(section.get('max_subdivisions', cls.max_subdivisions)),
            tail_cut=float(section.get('tail_cut', cls.tail_cut)),
            hermite_nodes=int(section.get('hermite_nodes', cls.hermite_nodes)),
            taylor_guard=float(section.get('taylor_guard', cls.taylor_guard)),
        )

    def tightened(self, factor: float) -> "QuadConfig":
        """Copy with both tolerances divided by `factor`."""
        return replace(self, abs_tol=self.abs_tol / factor, rel_tol=self.rel_tol / factor)

    def snapshot(self) -> Dict[str, Any]:
        return asdict(self)


DEFAULT_QUAD = QuadConfig()


def integrate_interval(func: Callable[[float], float], lower: float, upper: float,
                       config: QuadConfig, abs_tol: Optional[float] = None,
                       label: str = "integral") -> Tuple[float, float]:
    """Integrate `func` over [lower, upper] (upper may be inf).

    Returns (value, error_estimate). Raises ConvergenceError when QUADPACK
    reports a failure and its error estimate misses the tolerance.
    """
    if lower == upper:
        return 0.0, 0.0
    abs_tol = config.abs_tol if abs_tol is None else abs_tol
    result = integrate.quad(func, lower, upper, epsabs=abs_tol, epsrel=config.rel_tol,
                            limit=config.max_subdivisions, full_output=1)
    value, error = float(result[0]), float(result[1])
    if not math.isfinite(value):
        raise ConvergenceError(f"{label} on [{lower}, {upper}] is not finite", estimate=error)
    if len(result) > 3:
        target = max(abs_tol, config.rel_tol * abs(value))
        if error > _ESTIMATE_SLACK * target:
            raise ConvergenceError(
                f"{label} on [{lower}, {upper}] did not converge: {result[3]}",
                estimate=error)
        logger.debug("%s on [%g, %g] accepted with warning (error %.3g)",
                     label, lower, upper, error)
    return value, error


def split_edges(lower: float, upper: float, breakpoints: Iterable[float]) -> List[float]:
    """Sorted edges lower < ... < upper, keeping breakpoints strictly inside."""
    inner = sorted({float(c) for c in breakpoints if lower < c < upper and math.isfinite(c)})
    return [lower] + inner + [upper]


def integrate_pieces(func: Callable[[float], float], lower: float, upper: float,
                     config: QuadConfig, breakpoints: Iterable[float] = (),
                     label: str = "integral") -> Tuple[float, float]:
    """Integrate piecewise between consecutive edges; the last edge may be inf.

    The absolute tolerance is shared evenly between the pieces.
    """
    edges = split_edges(lower, upper, breakpoints)
    pieces = len(edges) - 1
    total, error = 0.0, 0.0
    for left, right in zip(edges[:-1], edges[1:]):
        value, err = integrate_interval(func, left, right, config,
                                        abs_tol=config.abs_tol / pieces, label=label)
        total += value
        error += err
    return total, error


def gauss_hermite(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for ∫ e^{−w²} f(w) dw."""
    return np.polynomial.hermite.hermgauss(nodes)


def gaussian_cutoff(config: QuadConfig) -> float:
    """W such that the Gaussian mass beyond |w| > W is below tail_cut·abs_tol."""
    return math.sqrt(-math.log(config.tail_cut * config.abs_tol))
