"""High-level distribution and expectation evaluators.

Cumulative distributions of the process at a fixed time and of its
running maximum, their joint law, and damped exchange-type expectations
of the pair (position, running maximum).  Every quantity is assembled
from integrals over exponentially spaced nodes on deformed rays — either
of the characteristic exponent alone (marginal law) or of the Wiener-
Hopf factor residuals (everything involving the running maximum) — and
the time domain is reached by a direct Fourier integral, by a
sinh-deformed Bromwich contour, or by Gaver extrapolation.

The marginal-law integrals subtract the resolvent of a Brownian motion
with matched quadratic symbol and restore it in closed form: the
difference kernel vanishes at the origin, which removes the indicator
pole and lets both rays pass through zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .charexp import (
    ConeSpec,
    Regime,
    StableParams,
    admissible_cone,
    classify,
    derived,
    psi,
    psi0,
    sinh_bromwich_allowed,
)
from .errors import PlanError, RegimeError, StableSupError
from .laplace import (
    LN2,
    GwrConfig,
    _gaver_shift,
    choose_contour,
    gwr_invert,
    transform_tolerance,
)
from .quadrature import (
    CustomTail,
    DecaySpec,
    ErrorBudget,
    ExpTail,
    SuperExpTail,
    Tail,
    TrapezoidPlan,
    plan_step,
    plan_truncation,
    sinh_nodes,
)
from .whf import FactorBatch, WhfGrids, build_grids, factor_batch, factors_at

__all__ = [
    "Method",
    "EvalRequest",
    "PayoffTransform",
    "cpdf_x",
    "cpdf_sup",
    "cpdf_sup_transform",
    "joint_v1_transform",
    "joint_cpdf",
    "exchange_expectation",
    "general_expectation",
    "exchange_payoff_transform",
    "indicator_payoff_transform",
]

_TWO_PI = 2.0 * math.pi
# Node pairs where both ray variables are below this modulus are dropped
# from the double sums: both factor residuals vanish there while the
# 1/(eta - xi1) kernel would amplify pure rounding noise.
_NODE_DROP = 1e-12
# Gaver extrapolation amplifies per-sample transform errors by up to six
# orders of magnitude at the depths its column selection can reach, so
# the samples are always evaluated at machine accuracy; the extrapolation
# depth, not the sample tolerance, then limits the inverted value.
_GWR_EPS = 2e-15
_CHUNK_ROWS = 512


class Method(Enum):
    """Route from the Laplace/Fourier domain to the time domain."""

    SINH_BROMWICH = "sinh-bromwich"
    GWR = "gwr"
    DIRECT_FOURIER = "direct-fourier"


@dataclass(frozen=True)
class EvalRequest:
    """Process, horizon, inversion backend and target tolerance."""

    params: StableParams
    T: float
    method: Method = Method.SINH_BROMWICH
    eps: float = 1e-10

    def __post_init__(self) -> None:
        if not isinstance(self.params, StableParams):
            raise TypeError("params must be a StableParams instance")
        if not isinstance(self.method, Method):
            raise TypeError("method must be a Method enum value")
        if not (self.T > 0.0 and math.isfinite(self.T)):
            raise ValueError(f"T must be positive and finite, got {self.T}")
        if not (0.0 < self.eps <= 1e-2):
            raise ValueError(f"eps must lie in (0, 1e-2], got {self.eps}")
        if self.method is Method.SINH_BROMWICH and not sinh_bromwich_allowed(self.params):
            raise RegimeError(
                "sinh-Bromwich inversion needs a sector bound on the symbol that "
                f"the regime '{classify(self.params).value}' does not provide; use GWR"
            )


# ---------------------------------------------------------------------------
# Laplace inversion jobs
# ---------------------------------------------------------------------------


@dataclass
class _Job:
    """One inversion plan: the q nodes and how node values become V(T)."""

    kind: str  # "sinh" or "gwr"
    qs: np.ndarray
    eps_t: float
    cone: ConeSpec
    invert: Callable[[np.ndarray], float]
    q_abs_range: tuple[float, float]
    # Widest |arg q| reached by the q nodes; it bounds how far the poles
    # of the Brownian comparison kernel can rotate off the imaginary axis.
    arg_q_max: float


def _require_laplace(req: EvalRequest, what: str) -> None:
    if req.method is Method.DIRECT_FOURIER:
        raise RegimeError(f"{what} needs a Laplace inversion backend (sinh-Bromwich or GWR)")


def _make_job(req: EvalRequest) -> _Job:
    params, T, eps = req.params, req.T, req.eps
    if req.method is Method.SINH_BROMWICH:
        cone = admissible_cone(params, for_complex_q=True)
        config = choose_contour(params, T, cone, eps)
        qs, ws = sinh_nodes(config.contour, config.plan)
        eps_t = transform_tolerance(config, T, eps)
        phase = np.exp(qs * T) * ws

        def invert(vals: np.ndarray) -> float:
            return float(np.sum((phase * np.asarray(vals)).real)) / math.pi

        q_abs = np.abs(qs)
        return _Job(
            kind="sinh",
            qs=qs,
            eps_t=eps_t,
            cone=cone,
            invert=invert,
            q_abs_range=(float(q_abs.min()), float(q_abs.max())),
            arg_q_max=math.pi / 2.0 + config.contour.omega_l,
        )

    if req.method is Method.GWR:
        cone = admissible_cone(params, for_complex_q=False)
        cfg = GwrConfig()
        shift = _gaver_shift(T, cfg.shift_a)
        ladder = shift + (LN2 / T) * np.arange(1, 2 * cfg.two_m + 1, dtype=float)
        eps_t = _GWR_EPS

        def invert(vals: np.ndarray) -> float:
            arr = np.asarray(vals)

            def transform(q: float) -> float:
                i = int(np.argmin(np.abs(ladder - q)))
                if abs(ladder[i] - q) > 1e-8 * (1.0 + abs(q)):
                    raise StableSupError(f"Gaver node {q} missing from the precomputed ladder")
                return float(arr[i].real)

            return gwr_invert(transform, T, cfg).value

        return _Job(
            kind="gwr",
            qs=ladder.astype(complex),
            eps_t=eps_t,
            cone=cone,
            invert=invert,
            q_abs_range=(float(ladder.min()), float(ladder.max())),
            arg_q_max=0.0,
        )

    raise RegimeError("direct Fourier evaluation defines no Laplace job")


# ---------------------------------------------------------------------------
# Grid and factor caching
# ---------------------------------------------------------------------------

_GRIDS_CACHE: dict = {}


def _grids_for(params: StableParams, job: _Job) -> WhfGrids:
    key = (
        params,
        job.kind,
        round(math.log10(job.eps_t), 4),
        round(math.log10(job.q_abs_range[0]), 4),
        round(math.log10(job.q_abs_range[1]), 4),
    )
    grids = _GRIDS_CACHE.get(key)
    if grids is None:
        grids = build_grids(
            params,
            job.cone,
            ErrorBudget(eps=job.eps_t, d=1.0, h_norm=1.0),
            q_abs_range=job.q_abs_range,
        )
        if len(_GRIDS_CACHE) > 64:
            _GRIDS_CACHE.clear()
        _GRIDS_CACHE[key] = grids
    return grids


def _factors(params: StableParams, grids: WhfGrids, qs: np.ndarray) -> FactorBatch:
    key = ("batch", qs.tobytes())
    fb = grids._factor_memo.get(key)
    if fb is None:
        fb = factor_batch(params, grids, qs)
        grids._factor_memo[key] = fb
    return fb


# ---------------------------------------------------------------------------
# Small-argument kernels and elementary closed forms
# ---------------------------------------------------------------------------


def _series(z: np.ndarray, coeffs: Sequence[float]) -> np.ndarray:
    acc = np.zeros_like(z)
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


_E2_COEFFS = [1.0 / math.factorial(k + 2) for k in range(16)]
_PHI1_COEFFS = [1.0 / math.factorial(k + 1) for k in range(16)]
_PHI2T_COEFFS = [(k + 1.0) / math.factorial(k + 2) for k in range(16)]


def _e2(z: np.ndarray) -> np.ndarray:
    """(exp(z) - 1 - z) / z^2 without cancellation near z = 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 0.4
    out = np.empty_like(z)
    out[small] = _series(z[small], _E2_COEFFS)
    zb = z[~small]
    out[~small] = (np.exp(zb) - 1.0 - zb) / (zb * zb)
    return out


def _phi1(z: np.ndarray) -> np.ndarray:
    """(exp(z) - 1) / z without cancellation near z = 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 0.4
    out = np.empty_like(z)
    out[small] = _series(z[small], _PHI1_COEFFS)
    zb = z[~small]
    out[~small] = (np.exp(zb) - 1.0) / zb
    return out


def _phi2t(z: np.ndarray) -> np.ndarray:
    """(exp(z)(z - 1) + 1) / z^2 without cancellation near z = 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 0.4
    out = np.empty_like(z)
    out[small] = _series(z[small], _PHI2T_COEFFS)
    zb = z[~small]
    out[~small] = (np.exp(zb) * (zb - 1.0) + 1.0) / (zb * zb)
    return out


def _lin_exp_moment(slope: float, bias: float, c: np.ndarray, y0: float, y1: float) -> np.ndarray:
    """integral_{y0}^{y1} (slope*y + bias) * exp(c*y) dy, vectorized in c."""
    dy = y1 - y0
    if dy <= 0.0:
        return np.zeros_like(c)
    z = c * dy
    head = (slope * y0 + bias) * dy * _phi1(z) + slope * dy * dy * _phi2t(z)
    return np.exp(c * y0) * head


def _norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


# ---------------------------------------------------------------------------
# Generic two-ray quadrature through the origin
# ---------------------------------------------------------------------------


def _pair_nodes(omega: float, plan: TrapezoidPlan) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and signed weights of the two-ray contour through the origin.

    The contour runs from -exp(-i*omega)*inf up to 0 and out to
    exp(i*omega)*inf; the weights carry the d(xi) = xi d(y) Jacobian and
    the traversal direction, so sum(weights * f(nodes)) approximates the
    contour integral of f.
    """
    j = np.arange(-plan.n_minus, plan.n_plus + 1, dtype=float)
    r = np.exp(j * plan.zeta)
    right = np.exp(1j * omega) * r
    left = -np.exp(-1j * omega) * r
    nodes = np.concatenate([right, left])
    weights = np.concatenate([plan.zeta * right, -plan.zeta * left])
    return nodes, weights


def _edge_norm(
    magnitude: Callable[[np.ndarray], np.ndarray],
    omega: float,
    d: float,
    y_lo: float,
    y_hi: float,
) -> float:
    """Estimated strip-edge L1 norm of a two-ray integrand.

    magnitude maps node arrays to |integrand| including the |xi| measure
    factor; the probe sweeps both strip edges of both rays (a strip
    shift y -> y + i*v rotates both rays by v).
    """
    ys = np.linspace(y_lo, y_hi, 48)
    r = np.exp(ys)
    total = 0.0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for v in {d, -d}:
            xi_right = np.exp(1j * (omega + v)) * r
            xi_left = -np.exp(-1j * (omega - v)) * r
            for xi in (xi_right, xi_left):
                vals = np.asarray(magnitude(xi), dtype=float)
                vals = np.where(np.isfinite(vals), vals, 1e280)
                total += float(np.mean(vals)) * (y_hi - y_lo)
    return max(total, 1.0)


def _pair_plan(
    eps: float,
    d: float,
    omega: float,
    left: Tail,
    right: Tail,
    magnitude: Callable[[np.ndarray], np.ndarray] | None,
) -> TrapezoidPlan:
    """Step size from a probed strip norm, truncation from tail bounds.

    If the integrand explodes on the strip edges (possible for strongly
    skewed symbols), the half-width shrinks until the edge norm is
    commensurate with the on-ray norm.
    """
    rough = plan_truncation(DecaySpec(left=left, right=right), 1.0, eps)
    y_lo, y_hi = -float(rough.n_minus + 2), float(rough.n_plus + 2)
    h_norm = 1.0
    if magnitude is not None:
        on_ray = _edge_norm(magnitude, omega, 0.0, y_lo, y_hi)
        for _ in range(10):
            h_norm = _edge_norm(magnitude, omega, d, y_lo, y_hi)
            if h_norm <= 1e6 * on_ray:
                break
            d *= 0.5
        else:
            raise PlanError(
                "integrand keeps exploding on every strip width; the contour "
                "cannot be thickened for trapezoid error control"
            )
    zeta = plan_step(ErrorBudget(eps=eps, d=d, h_norm=h_norm))
    return plan_truncation(DecaySpec(left=left, right=right), zeta, eps)


# ---------------------------------------------------------------------------
# cpdf of X_T
# ---------------------------------------------------------------------------


def _direct_angles(params: StableParams, x_prime: float) -> tuple[float, float]:
    """Ray angle and strip half-width for the direct Fourier correction.

    Keeps the stable symbol, the Brownian comparison kernel, and the
    x'-phase all decaying on the swept sector.  For the asymmetric
    alpha = 1 symbol the xi*log(xi) term forces the rotation sign; the
    incompatible sign of x' is rejected.
    """
    d = derived(params)
    regime = classify(params)
    if regime is Regime.ALPHA1_ASYMMETRIC:
        skew = params.c_plus - params.c_minus
        if x_prime * skew > 0.0:
            raise RegimeError(
                "direct Fourier route unavailable: the asymmetric alpha = 1 "
                "symbol only admits rotation against its skew, and the sign "
                "of x + mu*T - a points the phase the other way"
            )
        if x_prime == 0.0:
            return 0.0, 0.008
        omega = math.copysign(math.pi / 16.0, x_prime)
        return omega, 0.7 * abs(omega)
    # Sector budget: |phi0| + alpha*theta < pi/2 keeps Re psi0 > 0 and
    # 2*theta < pi/2 keeps the Brownian kernel decaying.
    theta_max = min(0.9 * (math.pi / 2.0 - abs(d.phi0)) / params.alpha, 0.95 * math.pi / 4.0)
    if x_prime == 0.0:
        return 0.0, min(math.pi / 16.0, 0.9 * theta_max)
    cone = admissible_cone(params, for_complex_q=False)
    side = math.copysign(1.0, x_prime)
    half = cone.gamma_plus / 2.0 if side > 0 else abs(cone.gamma_minus) / 2.0
    omega = side * min(math.pi / 8.0, half, 0.6 * theta_max)
    d_strip = min(0.8 * abs(omega), 0.9 * (theta_max - abs(omega)))
    return omega, max(d_strip, 1e-4)


def _cpdf_x_direct(params: StableParams, T: float, x: float, a: float, eps: float) -> float:
    d = derived(params)
    g = d.c_abs
    x_prime = x + params.mu * T - a
    sigma_g = math.sqrt(2.0 * g * T)
    base = _norm_cdf(-x_prime / sigma_g)
    omega, d_strip = _direct_angles(params, x_prime)

    def integrand(xi: np.ndarray) -> np.ndarray:
        bracket = np.exp(-T * psi0(params, xi)) - np.exp(-T * g * xi * xi)
        return np.exp(1j * x_prime * xi) * bracket / (1j * xi)

    def magnitude(xi: np.ndarray) -> np.ndarray:
        return np.abs(integrand(xi) * xi)

    # Near zero the bracket opens like T*(g*xi^2 - psi0(xi)); the safety
    # factors absorb the logarithmic correction at alpha = 1.
    left = ExpTail(coeff=50.0 * (2.0 * T * (d.c_abs + g) + 1.0), beta=0.9 * min(params.alpha, 1.999))

    # Outward majorant in closed form: scaling gives psi0(u*e^t) =
    # e^{alpha*t}*psi0(u), plus a t*e^t log correction at alpha = 1 whose
    # real part is the same on both rays; the phase and the comparison
    # Gaussian scale as e^t and e^{2t}.  Plain real arithmetic keeps the
    # probe finite at any distance.
    u_right = complex(math.cos(omega), math.sin(omega))
    u_left = -complex(math.cos(-omega), math.sin(-omega))
    re0_right = float(psi0(params, np.array([u_right]), branch=1.0)[0].real)
    re0_left = float(psi0(params, np.array([u_left]), branch=-1.0)[0].real)
    slope1 = (
        -(2.0 * d.beta_z / math.pi) * d.sigma_z * math.sin(omega) if params.alpha == 1.0 else 0.0
    )
    gauss_re = g * math.cos(2.0 * omega)
    alpha = params.alpha
    rays = (
        (float((1j * x_prime * u_right).real), re0_right),
        (float((1j * x_prime * u_left).real), re0_left),
    )

    def log_right(t: float) -> float:
        et = math.exp(min(t, 700.0))
        eat = math.exp(min(alpha * t, 700.0))
        worst = -1e300
        for ph, re0 in rays:
            stable = re0 * eat + slope1 * t * et
            m = (ph * et if ph != 0.0 else 0.0) + math.log(2.0) - T * min(stable, gauss_re * et * et)
            worst = max(worst, m)
        return worst

    plan = _pair_plan(eps, d_strip, omega, left, CustomTail(log_majorant=log_right), magnitude)
    nodes, weights = _pair_nodes(omega, plan)
    corr = np.sum(weights * integrand(nodes)) / _TWO_PI
    value = base - float(corr.real)
    return min(max(value, 0.0), 1.0) if -1e-6 < value < 1.0 + 1e-6 else value


def _laplace_ray_angle(params: StableParams, job: _Job, side: float) -> float:
    """Signed ray angle for kernel-difference integrals under a job.

    Capped at half the factorization cone on the chosen side and at half
    the angular gap to the Brownian comparison poles, which sit within
    arg_q_max/2 of the imaginary axis.
    """
    cone = job.cone
    gap_cap = 0.5 * max(0.03, math.pi / 2.0 - job.arg_q_max / 2.0)
    if side > 0:
        return min(math.pi / 8.0, cone.gamma_plus / 2.0, gap_cap)
    return -min(math.pi / 8.0, abs(cone.gamma_minus) / 2.0, gap_cap)


def _gaussian_pole_gap(job: _Job, omega: float) -> float:
    """Angular margin between the tilted rays and the comparison poles."""
    return math.pi / 2.0 - job.arg_q_max / 2.0 - abs(omega)


def _kernel_diff_integral(
    params: StableParams,
    job: _Job,
    shift_exp: float,
    prefactor: Callable[[np.ndarray], np.ndarray],
    omega: float,
    left: Tail,
    right: Tail,
) -> np.ndarray:
    """(1/2pi) * integral of prefactor(xi) e^{i*shift_exp*xi} K_diff(q, xi).

    K_diff(q, xi) = 1/(q + psi(xi)) - 1/(q + g*xi^2 - i*mu*xi) vanishes
    at xi = 0, so prefactors with an origin pole stay integrable.
    Returns the (n_q,) vector over the job's q nodes.
    """
    g = derived(params).c_abs
    mu = params.mu
    qs = job.qs

    def kdiff(xi: np.ndarray) -> np.ndarray:
        ps = psi(params, xi)[:, None]
        pg = (g * xi * xi - 1j * mu * xi)[:, None]
        return 1.0 / (qs[None, :] + ps) - 1.0 / (qs[None, :] + pg)

    def magnitude(xi: np.ndarray) -> np.ndarray:
        pre = prefactor(xi) * np.exp(1j * shift_exp * xi)
        return np.abs(pre) * np.max(np.abs(kdiff(xi)), axis=1) * np.abs(xi)

    gap = _gaussian_pole_gap(job, omega)
    if gap <= 1e-3:
        raise RegimeError("no ray angle separates the inversion contour from the kernel poles")
    d_strip = 0.6 * min(gap, abs(omega) if omega != 0.0 else math.pi / 8.0, math.pi / 8.0)
    d_strip = max(d_strip, 5e-3)
    plan = _pair_plan(job.eps_t, d_strip, omega, left, right, magnitude)
    nodes, weights = _pair_nodes(omega, plan)
    pre = prefactor(nodes) * np.exp(1j * shift_exp * nodes)
    vals = (weights * pre)[:, None] * kdiff(nodes)
    return vals.sum(axis=0) / _TWO_PI


def _cpdf_x_laplace(req: EvalRequest, job: _Job, x: float, a: float) -> float:
    params = req.params
    d = derived(params)
    g = d.c_abs
    sigma_g = math.sqrt(2.0 * g * req.T)
    base = _norm_cdf((a - x - params.mu * req.T) / sigma_g)
    x_shift = x - a
    side = math.copysign(1.0, x_shift) if x_shift != 0.0 else -1.0
    omega = _laplace_ray_angle(params, job, side)

    def prefactor(xi: np.ndarray) -> np.ndarray:
        return 1.0 / (1j * xi)

    q_lo = job.q_abs_range[0]
    coeff = 200.0 * (d.c_abs + g + abs(params.mu)) * (1.0 + 1.0 / (q_lo * q_lo))
    left = ExpTail(coeff=coeff, beta=0.9 * min(params.alpha, 1.999))
    if x_shift == 0.0:
        right: Tail = ExpTail(coeff=coeff, beta=0.9 * params.alpha)
    else:
        right = SuperExpTail(
            coeff=coeff, rate=abs(x_shift) * math.sin(abs(omega)), kappa=1.0, poly=1.0
        )
    corr = _kernel_diff_integral(params, job, x_shift, prefactor, omega, left, right)
    return base - job.invert(corr)


def cpdf_x(req: EvalRequest, x: float, a: float) -> float:
    """P[x + X_T <= a] via the backend selected in the request."""
    for name, v in (("x", x), ("a", a)):
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite")
    if req.method is Method.DIRECT_FOURIER:
        return _cpdf_x_direct(req.params, req.T, x, a, req.eps)
    job = _make_job(req)
    value = _cpdf_x_laplace(req, job, x, a)
    return min(max(value, 0.0), 1.0) if -1e-6 < value < 1.0 + 1e-6 else value


# ---------------------------------------------------------------------------
# cpdf of the running maximum
# ---------------------------------------------------------------------------


def _sup_exceedance_batch(grids: WhfGrids, fb: FactorBatch, a_minus_x: float) -> np.ndarray:
    """Exceedance transform over a barrier, one value per q column.

    Pairs the residual of the upper factor with the indicator transform;
    the indicator's 1/(i*eta) cancels the ray Jacobian, leaving pure
    step weights.
    """
    eta = grids.xi_minus_stacked()
    w = grids.weights_minus()
    phase = np.exp(-1j * a_minus_x * eta)
    terms = (w * phase)[:, None] * fb.mod_plus_m
    # Extended-precision reduction: the column sums cancel heavily at
    # large q and real-q batches feed noise-amplifying inversion.
    total = terms.astype(np.complex256).sum(axis=0).astype(np.complex128)
    return total / (2j * math.pi)


def cpdf_sup_transform(
    params: StableParams, grids: WhfGrids, q: complex, a_minus_x: float
) -> complex:
    """Laplace-domain exceedance of the running maximum over a barrier.

    Returns the probability that the running maximum at an independent
    exponential time with rate q exceeds the barrier distance a_minus_x
    (for complex q, the analytic continuation of that transform).
    """
    if not (a_minus_x >= 0.0):
        raise ValueError(f"a_minus_x must be >= 0, got {a_minus_x}")
    fb = factors_at(params, grids, complex(q))
    return complex(_sup_exceedance_batch(grids, fb, a_minus_x)[0])


def cpdf_sup(req: EvalRequest, x: float, a: float) -> float:
    """P[x + max of X over [0, T] <= a] via the requested Laplace backend."""
    if not (a >= x):
        raise ValueError(f"cpdf_sup needs a >= x, got a - x = {a - x}")
    _require_laplace(req, "cpdf_sup")
    job = _make_job(req)
    grids = _grids_for(req.params, job)
    fb = _factors(req.params, grids, job.qs)
    vals = _sup_exceedance_batch(grids, fb, a - x) / job.qs
    value = 1.0 - job.invert(vals)
    return min(max(value, 0.0), 1.0) if -1e-6 < value < 1.0 + 1e-6 else value


# ---------------------------------------------------------------------------
# Joint law of (X_T, running maximum)
# ---------------------------------------------------------------------------


def _joint_v1_batch(
    grids: WhfGrids, fb: FactorBatch, x1: float, a1: float, a2: float
) -> np.ndarray:
    """q times the transform of the barrier-crossing correction V1.

    Double ray sum of e^{i(x1-a2)eta} mod+(eta) e^{i(a2-a1)xi1}
    mod-(xi1) / (eta - xi1); the inner integrand's explicit 1/xi1
    cancels one Jacobian factor.  The kernel is q-independent, so the
    inner contraction is a chunked matrix product shared by all columns.
    """
    eta = grids.xi_minus_stacked()
    xi1 = grids.xi_plus_stacked()
    w_eta = grids.weights_minus() * eta * np.exp(1j * (x1 - a2) * eta)
    w_xi = grids.weights_plus() * np.exp(1j * (a2 - a1) * xi1)
    inner_src = w_xi[:, None] * fb.mod_minus_p
    small_eta = np.abs(eta) < _NODE_DROP
    small_xi = np.abs(xi1) < _NODE_DROP
    acc = np.zeros(fb.qs.size, dtype=complex)
    for lo in range(0, eta.size, _CHUNK_ROWS):
        hi = min(lo + _CHUNK_ROWS, eta.size)
        kern = 1.0 / (eta[lo:hi, None] - xi1[None, :])
        if small_xi.any() and small_eta[lo:hi].any():
            kern[np.ix_(small_eta[lo:hi], small_xi)] = 0.0
        inner = kern @ inner_src
        acc += (w_eta[lo:hi, None] * fb.mod_plus_m[lo:hi] * inner).sum(axis=0)
    return acc / (_TWO_PI * _TWO_PI)


def joint_v1_transform(
    params: StableParams,
    grids: WhfGrids,
    q: complex,
    x1: float,
    a1: float,
    a2: float,
) -> complex:
    """q times the Laplace transform of the joint-law correction term.

    The correction subtracts, from the marginal cpdf at a1, the paths
    whose running maximum has crossed the higher barrier a2.  Requires
    a1 < a2 and x1 <= a2.
    """
    if not (a1 < a2):
        raise ValueError(f"joint_v1_transform needs a1 < a2, got a1 - a2 = {a1 - a2}")
    if not (x1 <= a2):
        raise ValueError(f"joint_v1_transform needs x1 <= a2, got x1 - a2 = {x1 - a2}")
    fb = factors_at(params, grids, complex(q))
    return complex(_joint_v1_batch(grids, fb, x1, a1, a2)[0])


def joint_cpdf(req: EvalRequest, x1: float, x2: float, a1: float, a2: float) -> float:
    """P[x1 + X_T <= a1 and max(x2, x1 + running max of X) <= a2].

    The value does not depend on x2 within its admissible range
    x1 <= x2 <= a2.  When a1 = a2, the position constraint is implied by
    the maximum constraint and the evaluation delegates to cpdf_sup.
    """
    if not (x1 <= x2):
        raise ValueError(f"joint_cpdf needs x1 <= x2, got x1 - x2 = {x1 - x2}")
    if not (x2 <= a2):
        raise ValueError(f"joint_cpdf needs x2 <= a2, got x2 - a2 = {x2 - a2}")
    if not (a1 <= a2):
        raise ValueError(f"joint_cpdf needs a1 <= a2, got a1 - a2 = {a1 - a2}")
    if a1 == a2:
        return cpdf_sup(req, x1, a2)
    _require_laplace(req, "joint_cpdf")
    job = _make_job(req)
    grids = _grids_for(req.params, job)
    fb = _factors(req.params, grids, job.qs)
    v1 = job.invert(_joint_v1_batch(grids, fb, x1, a1, a2) / job.qs)
    vx = _cpdf_x_laplace(req, job, x1, a1)
    value = vx - v1
    return min(max(value, 0.0), 1.0) if -1e-6 < value < 1.0 + 1e-6 else value


# ---------------------------------------------------------------------------
# Brownian comparison resolvent in closed form
# ---------------------------------------------------------------------------


def _gaussian_roots(
    params: StableParams, qs: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decay roots and discriminant of the comparison resolvent kernel.

    The kernel of q/(q + g*xi^2 - i*mu*xi) is q*e^{-r_plus*z}/disc for
    z > 0 and q*e^{-r_minus*z}/disc for z < 0, with Re r_plus > 0 and
    Re r_minus < 0 on every admissible q node.
    """
    g = derived(params).c_abs
    mu = params.mu
    disc = np.sqrt(mu * mu + 4.0 * g * qs)
    r_plus = (mu + disc) / (2.0 * g)
    r_minus = -2.0 * qs / (mu + disc)
    return r_plus, r_minus, disc


def _gaussian_indicator_above(params: StableParams, qs: np.ndarray, u: float) -> np.ndarray:
    """Comparison-resolvent exceedance of a barrier at distance u below x.

    Value of the resolvent applied to the indicator of (b, inf),
    evaluated at a point x with u = x - b.
    """
    r_plus, r_minus, disc = _gaussian_roots(params, qs)
    if u >= 0.0:
        return 1.0 - qs * np.exp(-r_plus * u) / (r_plus * disc)
    return -qs * np.exp(-r_minus * u) / (r_minus * disc)


# ---------------------------------------------------------------------------
# Generic expectations of (position, floored running maximum)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PayoffTransform:
    """Fourier data of a payoff of (position, floored running maximum).

    terms lists (shift, evaluator) pairs: the transform of the payoff
    slice at the floor is sum_k e^{-i*shift_k*xi} * evaluator_k(xi).
    bounds = (alpha0, delta) declare the growth envelope
    |evaluator_k(xi)| <= C * (|xi|^{alpha0-1} for |xi| <= 1,
    |xi|^{delta-1} for |xi| >= 1) on the swept rays; the envelope is
    probed numerically at evaluation time and violations raise.

    diagonal(xi1, eta) must return the mixed transform

        integral over y in (floor, inf) of
            e^{i*(floor-y)*eta} e^{i*y*xi1} fhat1(xi1, y) dy

    as an (eta.size, xi1.size) array, where fhat1(xi1, y) is the
    first-argument transform of the payoff slice at maximum level y.
    Pass None when the slice transform does not depend on the maximum
    above the floor; the mixed term of the expectation then cancels
    exactly.  When diagonal is present, every shift must satisfy
    shift <= floor so the frozen-slice counterterm stays bounded on the
    upper rays.

    gaussian_term1(params, qs, x1) must return the closed-form resolvent
    expectation of the floor slice under the Brownian comparison kernel
    of the given process; it anchors the kernel-difference evaluation of
    the marginal term.
    """

    terms: tuple[tuple[float, Callable[[np.ndarray], np.ndarray]], ...]
    bounds: tuple[float, float]
    floor: float
    diagonal: Callable[[np.ndarray, np.ndarray], np.ndarray] | None
    gaussian_term1: Callable[[StableParams, np.ndarray, float], np.ndarray]

    def __post_init__(self) -> None:
        alpha0, delta = self.bounds
        if not (math.isfinite(alpha0) and math.isfinite(delta)):
            raise ValueError("bounds must be finite")
        if not self.terms:
            raise ValueError("payoff needs at least one transform term")
        if self.diagonal is not None:
            for shift, _ in self.terms:
                if shift > self.floor + 1e-12 * (1.0 + abs(self.floor)):
                    raise ValueError(
                        "every transform shift must stay at or below the floor "
                        f"when a mixed term is present, got shift {shift} > "
                        f"floor {self.floor}"
                    )


def _bound_shape(r: np.ndarray, alpha0: float, delta: float) -> np.ndarray:
    return np.where(r <= 1.0, r ** (alpha0 - 1.0), r ** (delta - 1.0))


def _validate_payoff_bounds(payoff: PayoffTransform, omegas: Sequence[float]) -> None:
    """Probe each evaluator's growth envelope on the rays it will sweep."""
    alpha0, delta = payoff.bounds
    r_mid = np.logspace(-1.0, 1.0, 9)
    r_far = np.logspace(-6.0, 6.0, 25)
    shape_mid = _bound_shape(r_mid, alpha0, delta)
    shape_far = _bound_shape(r_far, alpha0, delta)
    for omega in omegas:
        for phase in (np.exp(1j * omega), -np.exp(-1j * omega)):
            for k, (_, gk) in enumerate(payoff.terms):
                mid = np.abs(np.asarray(gk(r_mid * phase), dtype=complex))
                if not np.all(np.isfinite(mid)):
                    raise ValueError(f"payoff term {k} is not finite on the integration rays")
                scale = float(np.max(mid / shape_mid))
                far = np.abs(np.asarray(gk(r_far * phase), dtype=complex))
                limit = np.maximum(50.0 * max(scale, 1e-300) * shape_far, 1e-280)
                if not np.all(far <= limit):
                    worst = float(np.max(far / limit))
                    raise ValueError(
                        f"payoff term {k} violates its declared growth bounds "
                        f"(alpha0={alpha0}, delta={delta}) on the ray at angle "
                        f"{omega:.3f} by a factor {worst:.2e}"
                    )


def _term1_kernel_difference(
    params: StableParams, job: _Job, payoff: PayoffTransform, x1: float
) -> np.ndarray:
    """Marginal term of the pair expectation over the job's q nodes.

    Each transform term integrates against the stable-minus-Brownian
    kernel difference on rays tilted toward its own decay side; the
    subtracted Brownian resolvent is restored in closed form.
    """
    alpha0, delta = payoff.bounds
    alpha = params.alpha
    rate_left = alpha0 + alpha
    if rate_left <= 1e-9:
        raise RegimeError(
            "marginal payoff term diverges at the origin: "
            f"alpha0 + alpha = {rate_left:.3g} <= 0"
        )
    rate_right = alpha - delta
    if rate_right <= 1e-9:
        raise RegimeError(
            f"marginal payoff term tails diverge: alpha - delta = {rate_right:.3g} <= 0"
        )
    total = np.asarray(payoff.gaussian_term1(params, job.qs, x1), dtype=complex)
    d = derived(params)
    q_lo = job.q_abs_range[0]
    coeff0 = 50.0 * (d.c_abs + abs(params.mu) + 1.0) * (1.0 + 1.0 / (q_lo * q_lo))
    for shift, gk in payoff.terms:
        x_sh = x1 - shift
        side = math.copysign(1.0, x_sh) if x_sh != 0.0 else -1.0
        omega = _laplace_ray_angle(params, job, side)
        probe = np.abs(np.asarray(gk(np.exp(1j * omega) * np.ones(1)), dtype=complex))
        coeff = coeff0 * float(max(probe[0], 1.0))
        left = ExpTail(coeff=coeff, beta=0.9 * rate_left)
        if x_sh == 0.0:
            right: Tail = ExpTail(coeff=coeff, beta=0.9 * rate_right)
        else:
            right = SuperExpTail(
                coeff=coeff, rate=abs(x_sh) * math.sin(abs(omega)), kappa=1.0, poly=1.0
            )

        def prefactor(xi: np.ndarray, _gk=gk) -> np.ndarray:
            return np.asarray(_gk(xi), dtype=complex)

        total += job.qs * _kernel_diff_integral(params, job, x_sh, prefactor, omega, left, right)
    return total


def _term2_mixed(
    grids: WhfGrids, fb: FactorBatch, payoff: PayoffTransform, x1: float
) -> np.ndarray:
    """Mixed term of the pair expectation over the q columns.

    Double ray sum of the diagonal transform minus the frozen-slice
    counterterm, contracted against both factor residuals.
    """
    if payoff.diagonal is None:
        return np.zeros(fb.qs.size, dtype=complex)
    x2 = payoff.floor
    eta = grids.xi_minus_stacked()
    xi1 = grids.xi_plus_stacked()
    w_eta = grids.weights_minus() * eta * np.exp(1j * (x1 - x2) * eta)
    w_xi = grids.weights_plus() * xi1
    # Frozen-slice transform carrying its floor phase, so each factor of
    # the counterterm stays bounded on the upper rays.
    fhat_floor = np.zeros_like(xi1)
    for shift, gk in payoff.terms:
        fhat_floor += np.exp(1j * (x2 - shift) * xi1) * np.asarray(gk(xi1), dtype=complex)
    small_eta = np.abs(eta) < _NODE_DROP
    small_xi = np.abs(xi1) < _NODE_DROP
    inner_src = w_xi[:, None] * fb.mod_minus_p
    acc = np.zeros(fb.qs.size, dtype=complex)
    for lo in range(0, eta.size, _CHUNK_ROWS):
        hi = min(lo + _CHUNK_ROWS, eta.size)
        eta_blk = eta[lo:hi]
        dmat = np.asarray(payoff.diagonal(xi1, eta_blk), dtype=complex)
        if dmat.shape != (eta_blk.size, xi1.size):
            raise ValueError(
                f"diagonal evaluator returned shape {dmat.shape}, expected "
                f"{(eta_blk.size, xi1.size)}"
            )
        bracket = dmat - fhat_floor[None, :] / (1j * (eta_blk[:, None] - xi1[None, :]))
        if small_xi.any() and small_eta[lo:hi].any():
            bracket[np.ix_(small_eta[lo:hi], small_xi)] = 0.0
        inner = bracket @ inner_src
        acc += (w_eta[lo:hi, None] * fb.mod_plus_m[lo:hi] * inner).sum(axis=0)
    return acc / (_TWO_PI * _TWO_PI)


def general_expectation(req: EvalRequest, x1: float, x2: float, payoff: PayoffTransform) -> float:
    """E[f(x1 + X_T, max(x2, x1 + running max of X))] from transforms.

    The Laplace transform splits into a marginal term (payoff slice at
    the floor against the resolvent kernel difference plus its Brownian
    closed form) and a mixed term (double ray integral of the diagonal
    transform bracket against both factor residuals); the requested
    backend inverts the sum.
    """
    if not (x1 <= x2):
        raise ValueError(f"general_expectation needs x1 <= x2, got x1 - x2 = {x1 - x2}")
    if abs(payoff.floor - x2) > 1e-12 * (1.0 + abs(x2)):
        raise ValueError(
            f"payoff was built for floor {payoff.floor} but the evaluation floor is {x2}"
        )
    _require_laplace(req, "general_expectation")
    job = _make_job(req)
    grids = _grids_for(req.params, job)
    omegas = (grids.omega_plus, grids.omega_minus, math.pi / 8.0, -math.pi / 8.0)
    _validate_payoff_bounds(payoff, omegas)
    fb = _factors(req.params, grids, job.qs)
    term1 = _term1_kernel_difference(req.params, job, payoff, x1)
    term2 = _term2_mixed(grids, fb, payoff, x1)
    return job.invert((term1 + term2) / job.qs)


# ---------------------------------------------------------------------------
# Exchange expectation (dedicated fast path)
# ---------------------------------------------------------------------------


def _exchange_term2(
    grids: WhfGrids, fb: FactorBatch, beta: float, lam: float, x1: float, x2: float
) -> np.ndarray:
    """Mixed exchange term via its closed bracket, over the q columns.

    The bracket collects the diagonal-minus-frozen transform of the
    exchange payoff in a cancellation-free form; it is independent of q,
    so one chunked matrix product serves every column.
    """
    c2 = 1.0 - 1.0 / beta
    cb = beta * c2 * c2
    eta = grids.xi_minus_stacked()
    xi1 = grids.xi_plus_stacked()
    w_eta = grids.weights_minus() * eta * np.exp(1j * (x1 - x2) * eta)
    w_xi = grids.weights_plus() * xi1
    e2_xi = _e2(1j * c2 * x2 * xi1)
    inner_src = w_xi[:, None] * fb.mod_minus_p
    small_eta = np.abs(eta) < _NODE_DROP
    small_xi = np.abs(xi1) < _NODE_DROP
    acc = np.zeros(fb.qs.size, dtype=complex)
    for lo in range(0, eta.size, _CHUNK_ROWS):
        hi = min(lo + _CHUNK_ROWS, eta.size)
        eta_blk = eta[lo:hi]
        s = lam + 1j * eta_blk
        s_prime = s[:, None] - 1j * c2 * xi1[None, :]
        head = (x2 * x2) * (s * s)[:, None] * e2_xi[None, :] + (x2 * s + 1.0)[:, None]
        bracket = head / ((s * s)[:, None] * s_prime)
        bracket -= (x2 * x2) * e2_xi[None, :] / (1j * (eta_blk[:, None] - xi1[None, :]))
        if small_xi.any() and small_eta[lo:hi].any():
            bracket[np.ix_(small_eta[lo:hi], small_xi)] = 0.0
        inner = bracket @ inner_src
        acc += (w_eta[lo:hi, None] * fb.mod_plus_m[lo:hi] * inner).sum(axis=0)
    return cb * math.exp(-lam * x2) * acc / (_TWO_PI * _TWO_PI)


def _exchange_slice_gaussian(
    params: StableParams, qs: np.ndarray, beta: float, lam: float, x1: float, x2: float
) -> np.ndarray:
    """Brownian-resolvent expectation of the exchange floor slice.

    The slice is (beta*y - x2) * e^{-lam*x2} on [x2/beta, x2]; the
    resolvent kernel splits at x1 into its two exponential branches.
    """
    if x2 == 0.0:
        return np.zeros_like(qs)
    damp = math.exp(-lam * x2)
    r_plus, r_minus, disc = _gaussian_roots(params, qs)
    lo, hi = x2 / beta, x2
    out = np.zeros_like(qs)
    if x1 > lo:
        out = out + np.exp(-r_plus * x1) * _lin_exp_moment(beta, -x2, r_plus, lo, min(x1, hi))
    if x1 < hi:
        out = out + np.exp(-r_minus * x1) * _lin_exp_moment(beta, -x2, r_minus, max(x1, lo), hi)
    return damp * qs / disc * out


def _exchange_term1_below(
    grids: WhfGrids, fb: FactorBatch, beta: float, lam: float, x1: float, x2: float
) -> np.ndarray:
    """Marginal exchange term for x1 at or below the lower slice edge.

    The slice transform is entire and all combined phases decay on the
    lower rays, so the plain resolvent kernel rides the stored factor
    grids with no Brownian subtraction.
    """
    c2 = 1.0 - 1.0 / beta
    cb = beta * c2 * c2
    eta = grids.xi_minus_stacked()
    w = grids.weights_minus() * eta
    ghat = cb * x2 * x2 * math.exp(-lam * x2) * _e2(1j * c2 * x2 * eta)
    pre = w * ghat * np.exp(1j * (x1 - x2) * eta)
    kern = fb.qs[None, :] / (fb.qs[None, :] + grids.psi_minus_stacked()[:, None])
    return (pre[:, None] * kern).sum(axis=0) / _TWO_PI


def _exchange_term1_interior(
    params: StableParams, job: _Job, beta: float, lam: float, x1: float, x2: float
) -> np.ndarray:
    """Marginal exchange term for x1 inside the slice support (alpha > 1).

    The slice transform splits by shift; each piece carries a double
    origin pole, so it integrates against the stable-minus-Brownian
    kernel difference on its own decay side while the Brownian closed
    form restores the subtracted part.
    """
    if params.alpha <= 1.0:
        raise RegimeError(
            "the marginal exchange term with x1 inside the slice support needs "
            "alpha > 1: the split transform pieces diverge at the origin "
            "otherwise; keep x1 at or below floor/strike_ratio"
        )
    damp = math.exp(-lam * x2)
    qs = job.qs
    total = _exchange_slice_gaussian(params, qs, beta, lam, x1, x2).astype(complex)
    d = derived(params)
    q_lo = job.q_abs_range[0]
    coeff = 50.0 * damp * (beta + x2 + 1.0) * (d.c_abs + 1.0) * (1.0 + 1.0 / (q_lo * q_lo))
    pieces: list[tuple[float, Callable[[np.ndarray], np.ndarray]]] = [
        (x2, lambda xi: damp * ((beta - 1.0) * x2 / (-1j * xi) + beta / (xi * xi))),
        (x2 / beta, lambda xi: -damp * beta / (xi * xi)),
    ]
    alpha = params.alpha
    for shift, pk in pieces:
        x_sh = x1 - shift
        side = math.copysign(1.0, x_sh) if x_sh != 0.0 else -1.0
        omega = _laplace_ray_angle(params, job, side)
        left = ExpTail(coeff=coeff, beta=0.9 * (alpha - 1.0))
        if x_sh == 0.0:
            right: Tail = ExpTail(coeff=coeff, beta=0.9 * alpha)
        else:
            right = SuperExpTail(
                coeff=coeff, rate=abs(x_sh) * math.sin(abs(omega)), kappa=1.0, poly=1.0
            )
        total += qs * _kernel_diff_integral(params, job, x_sh, pk, omega, left, right)
    return total


def exchange_expectation(
    req: EvalRequest, x1: float, x2: float, beta_strike: float, lam: float
) -> float:
    """E[(beta_strike*(x1+X_T) - M)+ * e^{-lam*M}], M = max(x2, x1 + sup X).

    The payoff exchanges a leveraged position against the floored
    running maximum, damped in the maximum.  The undamped case lam = 0
    is finite only for alpha > 1.  The floor must satisfy x2 >= 0: the
    ray representation needs the slice support on the floor's side of
    the origin.
    """
    if not (x1 <= x2):
        raise ValueError(f"exchange_expectation needs x1 <= x2, got x1 - x2 = {x1 - x2}")
    if not (beta_strike > 1.0):
        raise ValueError(f"beta_strike must exceed 1, got {beta_strike}")
    if not (lam >= 0.0):
        raise ValueError(f"lam must be >= 0, got {lam}")
    if lam == 0.0 and req.params.alpha <= 1.0:
        raise RegimeError(
            "undamped exchange expectation diverges for alpha <= 1: the upper "
            "tail of the position is too heavy for an integrable payoff"
        )
    if x2 < 0.0:
        raise ValueError(
            "exchange_expectation needs x2 >= 0: the ray representation of the "
            "mixed term requires the slice support at or above the origin"
        )
    _require_laplace(req, "exchange_expectation")
    job = _make_job(req)
    grids = _grids_for(req.params, job)
    fb = _factors(req.params, grids, job.qs)
    term2 = _exchange_term2(grids, fb, beta_strike, lam, x1, x2)
    if x2 == 0.0:
        term1 = np.zeros_like(term2)
    elif x1 <= x2 / beta_strike:
        term1 = _exchange_term1_below(grids, fb, beta_strike, lam, x1, x2)
    else:
        term1 = _exchange_term1_interior(req.params, job, beta_strike, lam, x1, x2)
    return job.invert((term1 + term2) / job.qs)


# ---------------------------------------------------------------------------
# Ready-made payoff transforms
# ---------------------------------------------------------------------------


def exchange_payoff_transform(beta_strike: float, lam: float, x2: float) -> PayoffTransform:
    """Transform bundle of the damped exchange payoff at floor x2.

    Feeds general_expectation.  The split transform terms carry a double
    origin pole, so the marginal term converges only for alpha > 1 (the
    dedicated exchange_expectation path lifts that restriction when
    x1 <= x2/beta_strike by keeping the terms combined).
    """
    if not (beta_strike > 1.0):
        raise ValueError(f"beta_strike must exceed 1, got {beta_strike}")
    if not (lam >= 0.0):
        raise ValueError(f"lam must be >= 0, got {lam}")
    if x2 < 0.0:
        raise ValueError("the exchange payoff transform needs x2 >= 0")
    beta = beta_strike
    c2 = 1.0 - 1.0 / beta
    damp = math.exp(-lam * x2)

    def g_main(xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=complex)
        return damp * ((beta - 1.0) * x2 / (-1j * xi) + beta / (xi * xi))

    def g_low(xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=complex)
        return -damp * beta / (xi * xi)

    def diagonal(xi1: np.ndarray, eta: np.ndarray) -> np.ndarray:
        xi_row = np.asarray(xi1, dtype=complex)[None, :]
        s = (lam + 1j * np.asarray(eta, dtype=complex))[:, None]
        s_prime = s - 1j * c2 * xi_row
        lin = (beta - 1.0) / (-1j * xi_row)
        quad = beta / (xi_row * xi_row)
        return damp * (
            lin * (x2 / s + 1.0 / (s * s))
            + quad / s
            - quad * np.exp(1j * x2 * c2 * xi_row) / s_prime
        )

    def gaussian_term1(params: StableParams, qs: np.ndarray, x1: float) -> np.ndarray:
        return _exchange_slice_gaussian(params, qs, beta, lam, x1, x2)

    return PayoffTransform(
        terms=((x2, g_main), (x2 / beta, g_low)),
        bounds=(-1.0, 0.0),
        floor=x2,
        diagonal=diagonal,
        gaussian_term1=gaussian_term1,
    )


def indicator_payoff_transform(a1: float, a2: float, x2: float) -> PayoffTransform:
    """Transform bundle of 1{position <= a1} * 1{maximum <= a2} at floor x2.

    Uses the pathwise bound position <= maximum to truncate the slice at
    its own maximum level, which keeps every phase bounded on the swept
    rays.  Requires x2 <= a2 (the expectation is identically zero
    otherwise and needs no transform machinery).
    """
    if not (x2 <= a2):
        raise ValueError("indicator payoff expects x2 <= a2; the value is 0 otherwise")
    b = min(a1, x2)

    def g_ind(xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=complex)
        return 1.0 / (-1j * xi)

    def diagonal(xi1: np.ndarray, eta: np.ndarray) -> np.ndarray:
        xi_row = np.asarray(xi1, dtype=complex)[None, :]
        eta_col = np.asarray(eta, dtype=complex)[:, None]
        dmat = np.zeros((eta_col.size, xi_row.shape[1]), dtype=complex)
        if a1 > x2:
            # Maximum levels y in [x2, min(a1, a2)]: the slice edge is y
            # itself, and the xi1 phases cancel pointwise.
            up = min(a1, a2)
            if up > x2:
                seg = (1.0 - np.exp(1j * (x2 - up) * eta_col)) / (1j * eta_col)
                dmat = dmat + seg / (-1j * xi_row)
            lo2 = up
        else:
            lo2 = x2
        if a2 > lo2:
            # Maximum levels y in [lo2, a2]: the slice edge is frozen at a1.
            e_hi = np.exp(1j * (x2 - a2) * eta_col + 1j * (a2 - a1) * xi_row)
            e_lo = np.exp(1j * (x2 - lo2) * eta_col + 1j * (lo2 - a1) * xi_row)
            dmat = dmat + (e_hi - e_lo) / (1j * (xi_row - eta_col)) / (-1j * xi_row)
        return dmat

    def gaussian_term1(params: StableParams, qs: np.ndarray, x1: float) -> np.ndarray:
        return 1.0 - _gaussian_indicator_above(params, qs, x1 - b)

    return PayoffTransform(
        terms=((b, g_ind),),
        bounds=(0.0, 0.0),
        floor=x2,
        diagonal=diagonal,
        gaussian_term1=gaussian_term1,
    )
