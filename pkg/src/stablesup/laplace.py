"""Numerical inversion of Laplace transforms.

Three backends with very different accuracy/price points:

* sinh_bromwich_invert: trapezoid rule on a sinh-deformed Bromwich
  contour.  Near machine precision when the transform is analytic in a
  cone |arg(q - sigma_l)| <= pi/2 + gamma0 and decays like 1/|q|.
* gwr_invert: Gaver functionals accelerated by the Wynn rho algorithm.
  Only needs the transform on the real half-line q >= 0.25; double
  precision caps it near 1e-7..1e-9 because the extrapolation amplifies
  transform noise by roughly 1e7, so transform values must be supplied at
  close to machine accuracy.
* gaver_stehfest: classical Stehfest weights, a cheap cross-check with a
  ceiling around 1e-4..1e-6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from .charexp import ConeSpec, StableParams
from .errors import PlanError
from .quadrature import (
    CustomTail,
    DecaySpec,
    ErrorBudget,
    ExpTail,
    SinhContour,
    TrapezoidPlan,
    plan_step,
    plan_truncation,
    sinh_nodes,
)

LN2 = math.log(2.0)


@dataclass(frozen=True)
class GwrConfig:
    """two_m Gaver terms (transform sampled at (j+l)*ln2/T + shift_a)."""

    two_m: int = 16
    shift_a: float | None = None

    def __post_init__(self) -> None:
        if self.two_m < 2:
            raise ValueError("two_m must be >= 2")


class GwrResult(NamedTuple):
    value: float
    degraded: bool


def _gaver_shift(T: float, shift_a: float | None) -> float:
    # Keep the smallest sampled abscissa at or above 0.25 so transforms
    # with slow small-q behaviour stay well conditioned; undone by e^{aT}.
    if shift_a is not None:
        return shift_a
    return max(0.0, 0.25 - LN2 / T)


def gaver_functionals(transform: Callable[[float], float], T: float, n_terms: int, shift: float) -> list[float]:
    qs = {k: float(transform(shift + k * LN2 / T)) for k in range(1, 2 * n_terms + 1)}
    out = []
    for j in range(1, n_terms + 1):
        acc = math.fsum((-1.0) ** l * math.comb(j, l) * qs[j + l] for l in range(j + 1))
        out.append(j * LN2 / T * math.comb(2 * j, j) * acc)
    return out


def _wynn_rho(seq: list[float]) -> tuple[float, bool]:
    # rho_k columns over the sequence.  Only even columns are estimates
    # (odd ones are auxiliary reciprocals).  Deep columns eventually run
    # on amplified rounding noise of the input samples, so instead of
    # always trusting the deepest column, collect the anchored estimates
    # rho^1_{2i} and return the one where successive columns settle.
    n = len(seq)
    prev2 = [0.0] * (n + 1)  # rho_{-1}
    prev = list(seq)  # rho_0
    cands = [seq[0]]
    for k in range(1, n):
        cur = []
        broke = False
        for i in range(n - k):
            den = prev[i + 1] - prev[i]
            if den == 0.0 or not math.isfinite(den):
                broke = True
                break
            v = prev2[i + 1] + k / den
            if not math.isfinite(v):
                broke = True
                break
            cur.append(v)
        if broke or not cur:
            break
        if k % 2 == 0:
            cands.append(cur[0])
        prev2, prev = prev, cur
    if len(cands) == 1:
        # Constant sequences short-circuit at the first reciprocal; the
        # lone functional is already the limit when the input is exact,
        # but there is no way to estimate its error.
        return cands[0], True
    diffs = [abs(b - a) for a, b in zip(cands, cands[1:])]
    i_best = min(range(len(diffs)), key=diffs.__getitem__)
    value = cands[i_best + 1]
    degraded = diffs[i_best] > 1e-4 * max(abs(value), 1e-30)
    return value, degraded


def gwr_invert(transform: Callable[[float], float], T: float, config: GwrConfig = GwrConfig()) -> GwrResult:
    """Gaver sequence + Wynn rho extrapolation at time T > 0."""
    if not T > 0.0:
        raise ValueError("T must be positive")
    a = _gaver_shift(T, config.shift_a)
    shifted = gaver_functionals(transform, T, config.two_m, a)
    value, degraded = _wynn_rho(shifted)
    return GwrResult(value * math.exp(a * T), degraded)


def _stehfest_weights(m: int) -> list[float]:
    # Exact rational arithmetic; the weights are huge and alternating.
    weights = []
    for k in range(1, 2 * m + 1):
        acc = Fraction(0)
        for j in range((k + 1) // 2, min(k, m) + 1):
            acc += (
                Fraction(j) ** (m + 1)
                / math.factorial(m)
                * math.comb(m, j)
                * math.comb(2 * j, j)
                * math.comb(j, k - j)
            )
        weights.append(float((-1) ** (m + k) * acc))
    return weights


def gaver_stehfest(transform: Callable[[float], float], T: float, m: int = 8) -> float:
    """Classical Stehfest inversion with 2*m real samples."""
    if not T > 0.0:
        raise ValueError("T must be positive")
    w = _stehfest_weights(m)
    return LN2 / T * math.fsum(w[k - 1] * float(transform(k * LN2 / T)) for k in range(1, 2 * m + 1))


@dataclass(frozen=True)
class BromwichConfig:
    contour: SinhContour
    plan: TrapezoidPlan


def choose_contour(
    params: StableParams,
    T: float,
    cone: ConeSpec,
    eps: float,
    vbound: Callable[[complex], float] | None = None,
) -> BromwichConfig:
    """Sinh contour and trapezoid plan sized for tolerance eps at time T.

    cone must come from admissible_cone(params, for_complex_q=True);
    vbound optionally majorizes |transform(q)| (default 2/|q|).
    """
    if not cone.for_complex_q:
        raise ValueError("choose_contour needs a complex-q cone")
    if vbound is None:
        vbound = lambda q: 2.0 / abs(q)
    omega_l = cone.gamma0 / 2.0
    sigma_l = max(cone.sigma, 1.0 / T)
    b_l = sigma_l / (2.0 * math.sin(omega_l))
    contour = SinhContour(sigma_l=sigma_l, b_l=b_l, omega_l=omega_l)

    def log_majorant(t: float) -> float:
        u = 1j * omega_l + t
        q = sigma_l + 1j * b_l * np.sinh(u)
        w = b_l * abs(np.cosh(u))
        return T * q.real + math.log(max(w * vbound(q) / math.pi, 1e-300))

    d = 0.95 * min(omega_l, cone.gamma0 - omega_l)
    # Probe the strip-edge norm of the full inversion integrand.
    t_guess = math.log(2.0 * math.log(4.0 / eps) / (T * b_l * math.sin(omega_l * 0.05) + 1e-300) + math.e)
    ys = np.linspace(0.0, max(t_guess, 2.0), 16)
    h_total = 0.0
    for v in (d, -d):
        vals = []
        for y in ys:
            u = 1j * (omega_l + v) + y
            q = sigma_l + 1j * b_l * np.sinh(u)
            w = b_l * abs(np.cosh(u))
            log_val = q.real * T + math.log(max(w * vbound(q) / math.pi, 1e-300))
            vals.append(math.exp(min(log_val, 600.0)))
        h_total += 2.0 * max(t_guess, 2.0) * float(np.mean(vals))
    h_norm = max(1.0, h_total)

    zeta = plan_step(ErrorBudget(eps=eps, d=d, h_norm=h_norm))
    decay = DecaySpec(left=ExpTail(0.0, 1.0), right=CustomTail(log_majorant))
    n_plus = decay.right.min_nodes(zeta, eps / 4.0)
    plan = TrapezoidPlan(zeta=zeta, n_minus=0, n_plus=n_plus)
    return BromwichConfig(contour=contour, plan=plan)


def sinh_bromwich_invert(
    transform: Callable[[complex], complex],
    T: float,
    config: BromwichConfig,
) -> float:
    """Folded sinh-contour inversion: (1/pi) * sum Re(w_j e^{q_j T} V(q_j))."""
    qs, ws = sinh_nodes(config.contour, config.plan)
    terms = []
    for q, w in zip(qs, ws):
        terms.append((w * np.exp(q * T) * complex(transform(complex(q)))).real)
    return math.fsum(terms) / math.pi


def transform_tolerance(config: BromwichConfig, T: float, eps: float) -> float:
    """Per-node transform tolerance so inversion noise stays below eps/2."""
    qs, ws = sinh_nodes(config.contour, config.plan)
    amp = float(np.sum(np.abs(ws * np.exp(qs * T)))) / math.pi
    return eps / (2.0 * max(amp, 1.0))
