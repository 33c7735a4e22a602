"""Characteristic exponents of one-dimensional stable processes.

Parametrization: the process X has E exp(i*xi*X_T) = exp(-T*psi(xi)) for
real xi, with

    psi(xi) = -i*mu*xi + psi0(xi),

where psi0 is the drift-free part fixed by the index ``alpha`` and the
jump weights ``c_plus``, ``c_minus`` (upward / downward jump intensity
scales, both >= 0, not both zero).

For alpha != 1,

    psi0(xi) = C_plus * xi**alpha          on the right half-plane,
    psi0(xi) = C_minus * (-xi)**alpha      on the left half-plane,

with principal-branch powers and

    C_plus  = -Gamma(-alpha) * ((c_plus + c_minus)*cos(pi*alpha/2)
                                - i*(c_plus - c_minus)*sin(pi*alpha/2)),
    C_minus = conj(C_plus).

Both halves are analytic off the imaginary axis; for two-sided processes
the imaginary axis is a genuine branch cut, so every evaluation carries an
explicit half-plane choice.

For alpha == 1,

    psi0(xi) = sigma_z*|xi|*(1 + i*(2*beta_z/pi)*sign(xi)*ln|xi|),
    sigma_z  = (c_plus + c_minus)*pi/2,
    beta_z   = (c_plus - c_minus)/(c_plus + c_minus),

continued off the real axis ray-by-ray with the same half-plane rule.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import RegimeError


@dataclass(frozen=True)
class StableParams:
    """Index, jump weights and drift of a stable process."""

    alpha: float
    c_plus: float
    c_minus: float
    mu: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 2.0):
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if self.c_plus < 0.0 or self.c_minus < 0.0:
            raise ValueError("jump weights c_plus, c_minus must be >= 0")
        if self.c_plus + self.c_minus <= 0.0:
            raise ValueError("at least one of c_plus, c_minus must be positive")
        if not all(map(math.isfinite, (self.alpha, self.c_plus, self.c_minus, self.mu))):
            raise ValueError("parameters must be finite")


class Regime(enum.Enum):
    ALPHA_GT1 = "alpha>1"
    ALPHA_LT1_ZERO_DRIFT = "alpha<1, mu=0"
    ALPHA_LT1_POS_DRIFT = "alpha<1, mu>0"
    ALPHA_LT1_NEG_DRIFT = "alpha<1, mu<0"
    ALPHA1_SYMMETRIC = "alpha=1, symmetric jumps"
    ALPHA1_ASYMMETRIC = "alpha=1, asymmetric jumps"


# Regimes whose symbol admits the complex-q contour bound needed by the
# sinh-deformed Bromwich inversion.
SINH_CAPABLE = frozenset(
    {Regime.ALPHA_GT1, Regime.ALPHA_LT1_ZERO_DRIFT, Regime.ALPHA1_SYMMETRIC}
)

# Regimes with a two-sided Wiener-Hopf factorization evaluated by this
# package (everything except the alpha=1 asymmetric case, whose symbol has
# no usable sector bound).
WHF_CAPABLE = frozenset(set(Regime) - {Regime.ALPHA1_ASYMMETRIC})


def classify(params: StableParams) -> Regime:
    """Map parameters to the evaluation regime that governs method choice."""
    if params.alpha > 1.0:
        return Regime.ALPHA_GT1
    if params.alpha == 1.0:
        if params.c_plus == params.c_minus:
            return Regime.ALPHA1_SYMMETRIC
        return Regime.ALPHA1_ASYMMETRIC
    if params.mu == 0.0:
        return Regime.ALPHA_LT1_ZERO_DRIFT
    return Regime.ALPHA_LT1_POS_DRIFT if params.mu > 0.0 else Regime.ALPHA_LT1_NEG_DRIFT


def sinh_bromwich_allowed(params: StableParams) -> bool:
    """True when the symbol admits the sinh-deformed Bromwich contour."""
    return classify(params) in SINH_CAPABLE


@dataclass(frozen=True)
class DerivedConstants:
    """Constants derived from StableParams that the whole package shares.

    alpha_plus / alpha_minus are the algebraic decay exponents of the two
    Wiener-Hopf factors at infinity (supremum / infimum factor).  A zero
    exponent means the factor tends to a nonzero constant; the monotone
    corner cases where a factor is identically 1 carry a triviality flag.
    delta_*_prior are planning priors for the decay exponents of the
    residual factors after the exponential-symbol subtraction; the realized
    exponents are measured by a slope fit at grid-build time.
    """

    alpha: float
    C_plus: complex
    C_minus: complex
    c_abs: float
    re_c: float
    phi0: float
    sigma_z: float
    beta_z: float
    alpha_plus: float
    alpha_minus: float
    trivial_plus: bool
    trivial_minus: bool
    delta_plus_prior: float
    delta_minus_prior: float


@lru_cache(maxsize=256)
def _derived_cached(alpha: float, c_plus: float, c_minus: float, mu: float) -> DerivedConstants:
    sigma_z = (c_plus + c_minus) * math.pi / 2.0
    beta_z = (c_plus - c_minus) / (c_plus + c_minus)
    if alpha != 1.0:
        g = math.gamma(-alpha)
        C_plus = -g * complex(
            (c_plus + c_minus) * math.cos(math.pi * alpha / 2.0),
            -(c_plus - c_minus) * math.sin(math.pi * alpha / 2.0),
        )
    else:
        # Leading ray coefficient for the symmetric case; the asymmetric
        # alpha=1 symbol has no single power coefficient.
        C_plus = complex(sigma_z, 0.0)
    C_minus = C_plus.conjugate()
    c_abs = abs(C_plus)
    phi0 = math.atan2(C_plus.imag, C_plus.real)

    params = StableParams(alpha, c_plus, c_minus, mu)
    regime = classify(params)

    trivial_minus = alpha < 1.0 and c_minus == 0.0 and mu >= 0.0
    trivial_plus = alpha < 1.0 and c_plus == 0.0 and mu <= 0.0

    if regime in (Regime.ALPHA_GT1, Regime.ALPHA_LT1_ZERO_DRIFT):
        alpha_plus = alpha / 2.0 - phi0 / math.pi
        alpha_minus = alpha / 2.0 + phi0 / math.pi
    elif regime is Regime.ALPHA1_SYMMETRIC:
        phi0_eff = -math.atan2(mu, sigma_z)
        alpha_plus = 0.5 - phi0_eff / math.pi
        alpha_minus = 0.5 + phi0_eff / math.pi
    elif regime is Regime.ALPHA_LT1_POS_DRIFT:
        alpha_plus, alpha_minus = 1.0, 0.0
    elif regime is Regime.ALPHA_LT1_NEG_DRIFT:
        alpha_plus, alpha_minus = 0.0, 1.0
    else:  # alpha=1 asymmetric: no factorization exponents
        alpha_plus = alpha_minus = math.nan

    # Clamp tiny negatives from rounding.
    if not math.isnan(alpha_plus):
        alpha_plus = max(0.0, min(1.0, alpha_plus))
        alpha_minus = max(0.0, min(1.0, alpha_minus))

    def prior(exponent: float, trivial: bool) -> float:
        if trivial:
            return math.inf
        if math.isnan(exponent):
            return math.nan
        if exponent > 0.0:
            return min(exponent, 1.0)
        return min(1.0 - alpha, 1.0)

    return DerivedConstants(
        alpha=alpha,
        C_plus=C_plus,
        C_minus=C_minus,
        c_abs=c_abs,
        re_c=C_plus.real,
        phi0=phi0,
        sigma_z=sigma_z,
        beta_z=beta_z,
        alpha_plus=alpha_plus,
        alpha_minus=alpha_minus,
        trivial_plus=trivial_plus,
        trivial_minus=trivial_minus,
        delta_plus_prior=prior(alpha_plus, trivial_plus),
        delta_minus_prior=prior(alpha_minus, trivial_minus),
    )


def derived(params: StableParams) -> DerivedConstants:
    return _derived_cached(params.alpha, params.c_plus, params.c_minus, params.mu)


def _branch_of(xi: np.ndarray) -> np.ndarray:
    # Half-plane selector: +1 right, -1 left.  Points on the imaginary axis
    # get the right branch; for one-sided processes both branches agree
    # there, two-sided evaluations never ask for axis points.
    return np.where(np.real(xi) >= 0.0, 1.0, -1.0)


def psi0(params: StableParams, xi, branch=None) -> np.ndarray:
    """Drift-free symbol on a given half-plane branch.

    branch: +1 for the right half-plane continuation, -1 for the left one,
    or None to pick by the sign of Re(xi) elementwise.
    """
    d = derived(params)
    xi = np.asarray(xi, dtype=complex)
    b = _branch_of(xi) if branch is None else np.broadcast_to(np.asarray(branch, dtype=float), xi.shape)
    z = np.where(b > 0, xi, -xi)
    out = np.empty(xi.shape, dtype=complex)
    nz = z != 0
    with np.errstate(divide="ignore", invalid="ignore"):
        logz = np.where(nz, np.log(np.where(nz, z, 1.0)), 0.0)
        if params.alpha != 1.0:
            coeff = np.where(b > 0, d.C_plus, d.C_minus)
            out = np.where(nz, coeff * np.exp(params.alpha * logz), 0.0)
        else:
            slope = 2.0 * d.beta_z / math.pi
            val = d.sigma_z * z * (1.0 + 1j * np.where(b > 0, slope, -slope) * logz)
            out = np.where(nz, val, 0.0)
    return out


def psi(params: StableParams, xi, branch=None) -> np.ndarray:
    """Full symbol psi(xi) = -i*mu*xi + psi0(xi) on the chosen branch."""
    xi = np.asarray(xi, dtype=complex)
    return -1j * params.mu * xi + psi0(params, xi, branch)


@dataclass(frozen=True)
class ConeSpec:
    """Admissible ray angles for deformed contours.

    Rays xi = exp(i*omega + y) with omega in (gamma_minus, 0) or
    (0, gamma_plus) keep q + psi(xi) away from the negative real axis:
    for every real q > 0 when ``for_complex_q`` is False, and for every q
    in the cone {sigma + r*exp(i*theta): r >= 0, |theta| <= pi/2 + gamma0}
    when True (the widest shape a sinh-deformed Bromwich contour takes).
    The opening gamma0 is certified for the default sinh-mode ray angles
    omega_pm = gamma_pm/2; ``sigma`` is the minimal right abscissa that
    makes the complex-q guarantee hold at that opening.
    """

    gamma_plus: float
    gamma_minus: float
    gamma0: float
    sigma: float
    for_complex_q: bool

    @property
    def omega_plus_default(self) -> float:
        return self.gamma_plus / 2.0 if self.for_complex_q else min(math.pi / 8.0, 0.6 * self.gamma_plus)

    @property
    def omega_minus_default(self) -> float:
        return self.gamma_minus / 2.0 if self.for_complex_q else max(-math.pi / 8.0, 0.6 * self.gamma_minus)


def _interval_abs_affine(a: float, b: float, c: float) -> tuple[float, float]:
    # Solution interval of |a + b*w| <= c in w, for b != 0.
    lo = (-c - a) / b
    hi = (c - a) / b
    return (lo, hi) if lo <= hi else (hi, lo)


def admissible_cone(params: StableParams, for_complex_q: bool = True) -> ConeSpec:
    """Compute the admissible ray-angle cone for this process.

    Raises RegimeError when the requested q-domain admits no cone
    straddling the real axis (complex q needs alpha > 1, or alpha < 1 with
    zero drift, or the symmetric alpha = 1 case; real q only excludes the
    asymmetric alpha = 1 case).
    """
    regime = classify(params)
    d = derived(params)
    alpha = params.alpha

    if alpha != 1.0:
        alpha_eff, phi0_eff = alpha, d.phi0
    else:
        if regime is Regime.ALPHA1_ASYMMETRIC:
            raise RegimeError("no admissible contour cone: alpha = 1 with asymmetric jumps")
        alpha_eff, phi0_eff = 1.0, -math.atan2(params.mu, d.sigma_z)

    half = math.pi / 2.0
    if for_complex_q:
        if regime not in SINH_CAPABLE:
            raise RegimeError(
                "complex-q contours need alpha > 1, or alpha < 1 with zero drift, "
                f"or symmetric alpha = 1; got {regime.value}"
            )
        lo, hi = _interval_abs_affine(phi0_eff, alpha_eff, half)
        lo = max(lo, -half + 0.05)
        hi = min(hi, half - 0.05)
    else:
        if regime not in WHF_CAPABLE:
            raise RegimeError(f"no usable contour cone for regime {regime.value}")
        lo, hi = _interval_abs_affine(phi0_eff, alpha_eff, math.pi - 0.1)
        if params.mu != 0.0 and alpha != 1.0:
            # Along a ray, Im psi vanishes at most once; at that radius
            # Re psi >= 0 iff |phi0 + (alpha-1)*omega| <= pi/2, which keeps
            # q + psi off the cut for every real q > 0.
            if alpha != 1.0:
                l2, h2 = _interval_abs_affine(d.phi0, alpha - 1.0, half - 0.05)
                lo, hi = max(lo, l2), min(hi, h2)
        lo = max(lo, -half + 0.05)
        hi = min(hi, half - 0.05)

    width = hi - lo
    if width <= 0.0 or hi <= 0.0 or lo >= 0.0:
        raise RegimeError(f"admissible ray cone does not straddle the real axis for {regime.value}")

    margin = min(0.1, width / 4.0)
    gamma_plus = hi - margin
    gamma_minus = lo + margin
    if not (gamma_plus > 0.0 > gamma_minus):
        raise RegimeError(f"admissible ray cone degenerates after margins for {regime.value}")

    if not for_complex_q:
        return ConeSpec(gamma_plus, gamma_minus, 0.0, 0.0, False)

    # q-cone opening at the default sinh ray angles omega_pm = gamma_pm/2:
    # q + psi(xi) != 0 needs |arg psi| <= pi/2 - gamma0 - margin where the
    # symbol dominates, because -q has |arg| >= pi/2 - gamma0 throughout
    # the cone and modulus >= sigma*cos(gamma0) near its apex.
    m_arg = 0.1
    worst = max(
        abs(phi0_eff + alpha_eff * gamma_plus / 2.0),
        abs(phi0_eff + alpha_eff * gamma_minus / 2.0),
    )
    gamma0 = min(half - m_arg - worst, 1.2)
    if gamma0 <= 0.02:
        raise RegimeError(f"complex-q cone opening degenerates for {regime.value}")
    sigma = _twist_shift(params, gamma_minus / 2.0, gamma_plus / 2.0, gamma0)
    return ConeSpec(gamma_plus, gamma_minus, gamma0, sigma, True)


def _twist_shift(params: StableParams, omega_lo: float, omega_hi: float, gamma0: float) -> float:
    """Right abscissa pushing the q-cone clear of -psi on the swept sectors.

    Where |arg psi| stays below pi/2 - gamma0 (minus a margin), the cone
    opening alone separates q from -psi.  The drift can twist arg psi
    beyond that threshold only on a bounded set; its image lies in a thin
    sliver along the imaginary axis (Re psi >= -dip, modulus <= M), and a
    shift of dip + M*tan(gamma0) moves every cone point of that modulus
    past the sliver.  M and dip are measured on a dense log-radius grid
    along sample rays through the swept sectors.
    """
    if params.mu == 0.0 or params.alpha == 1.0:
        # arg(psi) is constant along each ray: no twisted zone to cover.
        return 1e-8
    d = derived(params)
    theta_c = math.pi / 2.0 - gamma0 - 0.04
    # Radii are scaled by the drift/jump crossover; the zone where the
    # drift can dominate the argument sits within a few decades of it.
    r_cross = (abs(params.mu) / d.c_abs) ** (1.0 / (params.alpha - 1.0))
    r_cross = min(max(r_cross, 1e-150), 1e150)
    radii = r_cross * np.logspace(-15.0, 15.0, 601)
    dip = 0.0
    m_twist = 0.0
    for omega in np.linspace(omega_lo, omega_hi, 65):
        vals = psi(params, radii * complex(math.cos(omega), math.sin(omega)))
        re_min = float(np.min(vals.real))
        dip = max(dip, -re_min)
        bad = np.abs(np.angle(vals)) > theta_c
        if np.any(bad):
            m_twist = max(m_twist, float(np.max(np.abs(vals[bad]))))
    return dip + 1.3 * m_twist * math.tan(gamma0) + 1e-9
