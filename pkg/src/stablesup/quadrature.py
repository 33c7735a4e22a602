"""Trapezoid quadrature on exponentially spaced rays and sinh contours.

All integrals in this package are reduced to integrals over the real line
of functions analytic in a strip |Im y| < d.  For those the uniform-step
trapezoid rule converges geometrically: with step zeta the discretization
error is bounded by H*exp(-2*pi*d/zeta)/(1-exp(-2*pi*d/zeta)) where H is
the strip-edge L1 norm.  Planning splits a tolerance eps into eps/2 for
the discretization error and eps/4 for each truncated tail.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ContourError, PlanError, StableSupError


@dataclass(frozen=True)
class ErrorBudget:
    """Tolerance eps, strip half-width d, strip-edge norm estimate h_norm."""

    eps: float
    d: float
    h_norm: float

    def __post_init__(self) -> None:
        if not (self.eps > 0.0 and self.d > 0.0 and self.h_norm > 0.0):
            raise ValueError("eps, d and h_norm must all be positive")


@dataclass(frozen=True)
class TrapezoidPlan:
    """Step and one-sided node counts for sum_{j=-n_minus}^{n_plus} g(j*zeta)."""

    zeta: float
    n_minus: int
    n_plus: int

    def __post_init__(self) -> None:
        if not self.zeta > 0.0:
            raise ValueError("zeta must be positive")
        if self.n_minus < 0 or self.n_plus < 0:
            raise ValueError("node counts must be >= 0")

    @property
    def n_total(self) -> int:
        return self.n_minus + self.n_plus + 1


@dataclass(frozen=True)
class RaySpec:
    """A ray exp(i*omega + y), y real, traversed in the direction of
    increasing y when orientation = +1 and decreasing y when -1."""

    omega: float
    orientation: int

    def __post_init__(self) -> None:
        if not (-math.pi < self.omega < math.pi):
            raise ValueError("omega must lie in (-pi, pi)")
        if self.orientation not in (-1, 1):
            raise ValueError("orientation must be +1 or -1")


@dataclass(frozen=True)
class SinhContour:
    """Bromwich contour q(y) = sigma_l + i*b_l*sinh(i*omega_l + y).

    It crosses the real axis at q(0) = sigma_l - b_l*sin(omega_l), which
    must stay positive so that every singularity of the transform is to
    the left of the contour.
    """

    sigma_l: float
    b_l: float
    omega_l: float

    def __post_init__(self) -> None:
        if not self.b_l > 0.0:
            raise ValueError("b_l must be positive")
        if not (0.0 < self.omega_l < math.pi / 2.0):
            raise ValueError("omega_l must lie in (0, pi/2)")
        if not self.sigma_l - self.b_l * math.sin(self.omega_l) > 0.0:
            raise ContourError(
                "sinh contour crosses the real axis at "
                f"{self.sigma_l - self.b_l * math.sin(self.omega_l):.3g} <= 0"
            )


class Tail:
    """One-sided tail bound of an integrand in the y variable."""

    def min_nodes(self, zeta: float, eps_quarter: float) -> int:
        raise NotImplementedError


@dataclass(frozen=True)
class ExpTail(Tail):
    """|g(y)| <= coeff * exp(-beta*|y|) moving outward along this tail."""

    coeff: float
    beta: float

    def min_nodes(self, zeta: float, eps_quarter: float) -> int:
        if not self.beta > 0.0:
            raise PlanError(f"tail does not decay: exponential rate {self.beta} <= 0")
        if self.coeff <= eps_quarter:
            return 0
        return math.ceil(math.log(self.coeff / eps_quarter) / (self.beta * zeta))


@dataclass(frozen=True)
class SuperExpTail(Tail):
    """|g(y)| <= coeff * exp(poly*|y| - rate*exp(kappa*|y|)) outward."""

    coeff: float
    rate: float
    kappa: float
    poly: float = 0.0

    def min_nodes(self, zeta: float, eps_quarter: float) -> int:
        if not (self.rate > 0.0 and self.kappa > 0.0):
            raise PlanError("super-exponential tail needs positive rate and kappa")
        target = math.log(max(self.coeff / eps_quarter, 1.0))
        if target == 0.0:
            return 0
        # Solve rate*exp(kappa*y) - poly*y = target by fixed point on y.
        y = math.log(max(target, 1.0) / self.rate + 1.0) / self.kappa
        for _ in range(60):
            y_new = math.log((target + max(self.poly, 0.0) * y) / self.rate + 1.0) / self.kappa
            if abs(y_new - y) < 1e-12 * (1.0 + abs(y)):
                y = y_new
                break
            y = y_new
        return math.ceil(y / zeta) + 4


@dataclass(frozen=True)
class CustomTail(Tail):
    """log_majorant(t) bounds ln|g| at outward distance t >= 0."""

    log_majorant: Callable[[float], float]

    def min_nodes(self, zeta: float, eps_quarter: float) -> int:
        target = math.log(eps_quarter)
        n = 1
        while n < (1 << 22):
            if self.log_majorant(n * zeta) <= target:
                break
            n *= 2
        else:
            raise PlanError("custom tail majorant never reaches the tolerance")
        lo, hi = n // 2, n
        while lo < hi:
            mid = (lo + hi) // 2
            if self.log_majorant(mid * zeta) <= target:
                hi = mid
            else:
                lo = mid + 1
        return hi


@dataclass(frozen=True)
class DecaySpec:
    """Tail bounds of an integrand toward y -> -inf (left) and y -> +inf."""

    left: Tail
    right: Tail


def plan_step(budget: ErrorBudget) -> float:
    """Largest zeta whose strip discretization error fits in eps/2.

    Solves h_norm*r/(1-r) = eps/2 with r = exp(-2*pi*d/zeta), i.e.
    zeta = 2*pi*d / ln(1 + 2*h_norm/eps).
    """
    zeta = 2.0 * math.pi * budget.d / math.log1p(2.0 * budget.h_norm / budget.eps)
    r = math.exp(-2.0 * math.pi * budget.d / zeta)
    residual = budget.h_norm * r / (1.0 - r)
    if not residual <= budget.eps / 2.0 * (1.0 + 1e-9):
        raise PlanError(f"step planning residual {residual:.3e} exceeds eps/2")
    return zeta


def plan_truncation(decay: DecaySpec, zeta: float, eps: float) -> TrapezoidPlan:
    """Minimal node counts with each truncated tail below eps/4."""
    if not (zeta > 0.0 and eps > 0.0):
        raise ValueError("zeta and eps must be positive")
    n_minus = decay.left.min_nodes(zeta, eps / 4.0)
    n_plus = decay.right.min_nodes(zeta, eps / 4.0)
    if max(n_minus, n_plus) > (1 << 22):
        raise PlanError(f"truncation needs {max(n_minus, n_plus)} nodes; tail decay too weak")
    return TrapezoidPlan(zeta=zeta, n_minus=n_minus, n_plus=n_plus)


def trapezoid_sum(plan: TrapezoidPlan, g) -> complex:
    """zeta * sum_{j=-n_minus}^{n_plus} g(j), in fixed ascending-j order.

    g is either a callable on the node index j or a sequence of values
    laid out ascending in j.  Accumulation is compensated (exact fsum on
    real and imaginary parts), so the result does not depend on chunking.
    """
    js = range(-plan.n_minus, plan.n_plus + 1)
    if callable(g):
        vals = []
        for j in js:
            try:
                vals.append(complex(g(j)))
            except StableSupError:
                raise
            except Exception as exc:
                raise StableSupError(f"integrand evaluation failed at node j={j}: {exc}") from exc
    else:
        vals = [complex(v) for v in g]
        if len(vals) != plan.n_total:
            raise ValueError(f"expected {plan.n_total} node values, got {len(vals)}")
    re = math.fsum(v.real for v in vals)
    im = math.fsum(v.imag for v in vals)
    return plan.zeta * complex(re, im)


def exp_ray_nodes(ray: RaySpec, plan: TrapezoidPlan) -> tuple[np.ndarray, np.ndarray]:
    """Nodes xi_j = exp(i*omega + j*zeta) and weights for integrating in xi.

    The weight carries the change of variables d(xi) = xi dy and the
    traversal direction: w_j = orientation * zeta * xi_j.
    """
    j = np.arange(-plan.n_minus, plan.n_plus + 1, dtype=float)
    nodes = np.exp(1j * ray.omega + j * plan.zeta)
    weights = ray.orientation * plan.zeta * nodes
    return nodes, weights


def sinh_nodes(contour: SinhContour, plan: TrapezoidPlan) -> tuple[np.ndarray, np.ndarray]:
    """Folded nodes and weights of the sinh-deformed Bromwich contour.

    Returns q_j = sigma_l + i*b_l*sinh(i*omega_l + j*zeta) for
    j = 0..n_plus and weights w_j = zeta*b_l*cosh(i*omega_l + j*zeta),
    halved at j = 0.  The conjugate half j < 0 is folded into the real
    part taken by the caller: q(-y) = conj(q(y)) and real-valued originals
    have conj-symmetric transforms.
    """
    if not contour.sigma_l - contour.b_l * math.sin(contour.omega_l) > 0.0:
        raise ContourError("sinh contour crosses the real axis left of the origin")
    j = np.arange(0, plan.n_plus + 1, dtype=float)
    u = 1j * contour.omega_l + j * plan.zeta
    q = contour.sigma_l + 1j * contour.b_l * np.sinh(u)
    w = plan.zeta * contour.b_l * np.cosh(u)
    w[0] *= 0.5
    return q, w


def h_norm_probe(
    f: Callable[[complex], complex],
    d: float,
    y_lo: float,
    y_hi: float,
    n: int = 16,
) -> float:
    """Crude strip-edge L1 estimate of f over |Im y| = d, floored at 1.

    Sixteen probe nodes per edge suffice because the estimate only enters
    the step size through a logarithm.
    """
    ys = np.linspace(y_lo, y_hi, n)
    total = 0.0
    for sign in (1.0, -1.0):
        vals = [abs(f(complex(y, sign * d))) for y in ys]
        total += (y_hi - y_lo) * float(np.mean(vals))
    return max(1.0, total)
