"""Independent reference values: closed forms and Monte Carlo.

Nothing here touches the contour machinery; these routines exist so the
transform pipeline can be checked against answers obtained another way:
the Cauchy law, the exponential supremum of spectrally one-sided
processes, and direct path simulation with Chambers-Mallows-Stuck
increments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq
from scipy.special import gamma as _gamma

from .charexp import StableParams, derived, psi
from .errors import RegimeError, StableSupError


def cauchy_cdf(y, params: StableParams, T: float) -> np.ndarray:
    """P(X_T <= y) for the symmetric alpha = 1 case in closed form."""
    if params.alpha != 1.0 or params.c_plus != params.c_minus:
        raise RegimeError("closed-form cdf requires alpha = 1 with symmetric jumps")
    d = derived(params)
    scale = d.sigma_z * T
    loc = params.mu * T
    return 0.5 + np.arctan((np.asarray(y, dtype=float) - loc) / scale) / math.pi


def one_sided_beta_root(params: StableParams, q: float) -> float:
    """Root beta > 0 of mu*beta + c_minus*Gamma(-alpha)*beta^alpha = q.

    Requires c_plus = 0 (no positive jumps), so exp(beta*X_t) has finite
    expectation and the supremum at an exponential time is Exp(beta).
    """
    if params.c_plus != 0.0:
        raise RegimeError("exponential supremum law needs c_plus = 0")
    if q <= 0.0:
        raise ValueError("q must be positive")
    alpha = params.alpha
    g = _gamma(-alpha) if alpha != 1.0 else None
    if alpha == 1.0:
        raise RegimeError("alpha = 1 one-sided case not supported by this oracle")

    def kappa(b: float) -> float:
        return params.mu * b + params.c_minus * g * b**alpha

    hi = 1.0
    while kappa(hi) < q:
        hi *= 2.0
        if hi > 1e12:
            raise StableSupError("failed to bracket the ladder exponent root")
    lo = 0.0
    return float(brentq(lambda b: kappa(b) - q, lo, hi, xtol=1e-300, rtol=1e-14))


def one_sided_sup_factor(params: StableParams, q: float, xi) -> np.ndarray:
    """Closed-form positive factor beta/(beta - i*xi) for c_plus = 0."""
    beta = one_sided_beta_root(params, q)
    return beta / (beta - 1j * np.asarray(xi, dtype=complex))

def one_sided_sup_exceedance(params: StableParams, q: float, h: float) -> float:
    """P(sup at exponential(q) time > h) = exp(-beta(q)*h) for c_plus = 0."""
    return math.exp(-one_sided_beta_root(params, q) * max(h, 0.0))


def sample_stable(params: StableParams, t: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw X_t by the Chambers-Mallows-Stuck method."""
    d = derived(params)
    alpha = params.alpha
    u = rng.uniform(-math.pi / 2.0, math.pi / 2.0, size)
    w = rng.standard_exponential(size)
    if alpha != 1.0:
        beta = d.beta_z
        tb = beta * math.tan(math.pi * alpha / 2.0)
        b0 = math.atan(tb) / alpha
        s0 = (1.0 + tb * tb) ** (1.0 / (2.0 * alpha))
        core = (
            s0
            * np.sin(alpha * (u + b0))
            / np.cos(u) ** (1.0 / alpha)
            * (np.cos(u - alpha * (u + b0)) / w) ** ((1.0 - alpha) / alpha)
        )
        sigma_t = (d.re_c * t) ** (1.0 / alpha)
        return sigma_t * core + params.mu * t
    beta = d.beta_z
    half_pi = math.pi / 2.0
    core = (2.0 / math.pi) * (
        (half_pi + beta * u) * np.tan(u)
        - beta * np.log((half_pi * w * np.cos(u)) / (half_pi + beta * u))
    )
    c = d.sigma_z * t
    shift = (2.0 * beta / math.pi) * c * math.log(c) if c > 0 else 0.0
    return c * core + shift + params.mu * t


def validate_cf(params: StableParams, t: float, samples: np.ndarray, n_points: int = 8) -> float:
    """Worst empirical-vs-exact characteristic function gap on a xi grid.

    Raises if the gap exceeds 4/sqrt(n), which a correct sampler passes
    with overwhelming probability.
    """
    n = len(samples)
    scale = max(1e-12, float(np.median(np.abs(samples))))
    xis = np.linspace(0.2, 2.5, n_points) / scale
    worst = 0.0
    for xi in xis:
        ecf = np.mean(np.exp(1j * xi * samples))
        exact = np.exp(-t * psi(params, np.array([xi + 0.0j]))[0])
        worst = max(worst, abs(ecf - exact))
    if worst > 4.0 / math.sqrt(n):
        raise StableSupError(f"increment sampler failed the characteristic function check: {worst:.3g}")
    return worst


@dataclass(frozen=True)
class McConfig:
    n_paths: int = 100_000
    n_steps: int = 256
    seed: int = 20240813
    chunk: int = 20_000


@dataclass(frozen=True)
class McEstimate:
    mean: float
    se: float
    bias_bound: float

    def compatible(self, value: float, n_sigma: float = 3.0) -> bool:
        return abs(value - self.mean) <= n_sigma * self.se + self.bias_bound


def _walk_functionals(
    params: StableParams,
    T: float,
    n_paths: int,
    n_steps: int,
    seed: int,
    chunk: int,
    fns: dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]],
) -> dict[str, tuple[float, float]]:
    dt = T / n_steps
    sums = {k: 0.0 for k in fns}
    sqs = {k: 0.0 for k in fns}
    done = 0
    stream = 0
    while done < n_paths:
        m = min(chunk, n_paths - done)
        rng = np.random.Generator(np.random.Philox(key=seed, counter=stream))
        stream += 1
        inc = sample_stable(params, dt, rng, m * n_steps).reshape(m, n_steps)
        paths = np.cumsum(inc, axis=1)
        x_T = paths[:, -1]
        x_bar = np.maximum(paths.max(axis=1), 0.0)
        for k, fn in fns.items():
            v = fn(x_T, x_bar)
            sums[k] += float(np.sum(v))
            sqs[k] += float(np.sum(v * v))
        done += m
    out = {}
    for k in fns:
        mean = sums[k] / n_paths
        var = max(sqs[k] / n_paths - mean * mean, 0.0)
        out[k] = (mean, math.sqrt(var / n_paths))
    return out


def mc_functionals(
    params: StableParams,
    T: float,
    fns: dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]],
    config: McConfig = McConfig(),
) -> dict[str, McEstimate]:
    """Path-simulation estimates of E[fn(X_T, sup X)] with bias envelopes.

    The discrete-time supremum misses intra-step excursions, biasing sup
    functionals; estimates at n and 2n steps give a Richardson-style
    envelope |V_2n - V_n| * r/(r-1) with rate r = 2^(1/alpha).
    """
    coarse = _walk_functionals(params, T, config.n_paths, config.n_steps, config.seed, config.chunk, fns)
    fine = _walk_functionals(
        params, T, config.n_paths, 2 * config.n_steps, config.seed + 7_777_777, config.chunk, fns
    )
    r = 2.0 ** (1.0 / params.alpha)
    out = {}
    for k in fns:
        gap = abs(fine[k][0] - coarse[k][0])
        envelope = gap * r / (r - 1.0) + 2.0 * (coarse[k][1] + fine[k][1])
        out[k] = McEstimate(mean=fine[k][0], se=fine[k][1], bias_bound=envelope)
    return out


def mc_standard_functionals(x: float, a: float) -> dict[str, Callable]:
    """Indicators for the three basic distribution functions started at x."""
    return {
        "cpdf_x": lambda xt, xb: (x + xt <= a).astype(float),
        "cpdf_sup": lambda xt, xb: (x + xb <= a).astype(float),
    }


def mc_joint_functional(x: float, a1: float, a2: float) -> Callable:
    return lambda xt, xb: ((x + xt <= a1) & (x + xb <= a2)).astype(float)


def mc_exchange_functional(x1: float, x2: float, beta: float, lam: float) -> Callable:
    def fn(xt: np.ndarray, xb: np.ndarray) -> np.ndarray:
        m = np.maximum(x2, x1 + xb)
        return np.maximum(beta * (x1 + xt) - m, 0.0) * np.exp(-lam * m)

    return fn
