"""Wiener-Hopf factors of q + psi on deformed two-ray contours.

The positive factor (characteristic function of the running supremum at an
independent exponential time) and the negative factor (running infimum)
are evaluated through

    ln phi_plus(q, xi)  = +(1/(2*pi*i)) * int_{L-} xi*ln(1+psi(eta)/q) / (eta*(xi-eta)) deta,
    ln phi_minus(q, xi) = -(1/(2*pi*i)) * int_{L+} xi*ln(1+psi(eta)/q) / (eta*(xi-eta)) deta,

where L+ is the union of the rays arg(eta) = omega_plus and
arg(eta) = pi - omega_plus (omega_plus > 0) and L- the mirrored pair below
the real axis; each contour is traversed left to right, i.e. inward along
the left ray and outward along the right ray.  In the log variable
eta = exp(i*omega + y) the measure deta/eta becomes dy, and on the uniform
y-grids the Cauchy kernel xi/(xi - eta) depends only on the node index
difference, so evaluating a factor on a whole target family is a Toeplitz
correlation done by FFT; no dense kernel matrices are formed.

phi_plus is analytic above L-, phi_minus below L+; on the remaining grid
the complementary factor comes from the exact identity
phi_plus*phi_minus = q/(q+psi).  Factors tend to a_pm at infinity
(nonzero only when the corresponding decay exponent alpha_pm vanishes)
and the residual after subtracting a_pm + (1-a_pm)/(1 -+ i*xi) decays
algebraically; that residual ("mod" factor) is what the distribution
integrals consume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .charexp import ConeSpec, Regime, StableParams, classify, derived, psi
from .errors import BranchCutError, ContourError, PlanError, RegimeError
from .quadrature import ErrorBudget, plan_step

TWO_PI_I = 2.0j * math.pi


def _log1p_c(z: np.ndarray) -> np.ndarray:
    # Complex log1p: series below 1e-4 keeps absolute accuracy ~1e-20 for
    # the small-|psi/q| nodes where np.log(1+z) would floor at 1e-16.
    # Preserves extended-precision dtypes.
    z = np.asarray(z)
    if z.dtype != np.complex256:
        z = z.astype(complex)
    small = np.abs(z) < 1e-4
    zs = np.where(small, z, z.dtype.type(0.0))
    series = zs * (1.0 + zs * (-0.5 + zs * (1.0 / 3.0 - 0.25 * zs)))
    big = np.where(small, z.dtype.type(1.0), 1.0 + z)
    return np.where(small, series, np.log(big))


def _check_branch(z: np.ndarray, what: str) -> None:
    # z holds (q+psi)/q along one ray, shaped (n,) or (n, n_q).  The
    # admissible cone keeps z off (-inf, 0]; verify, and also reject any
    # sign flip of Im z while Re z <= 0 between neighbouring nodes, which
    # would mean the principal log jumped branches along the ray.
    if np.any((z.real <= 0.0) & (z.imag == 0.0)):
        raise BranchCutError(f"{what}: symbol ratio landed on the negative real axis")
    bad = z.real <= 0.0
    if not bad.any():
        return
    s = np.sign(z.imag)
    cross = (s[:-1] * s[1:] < 0) & (bad[:-1] | bad[1:])
    if cross.any():
        raise BranchCutError(f"{what}: principal log branch crossing along a ray")


class _PairConv:
    """FFT correlation of one (target ray, source ray) Cauchy kernel.

    out[i] = sum_j g((j-i)*zeta) v[j]  with
    g(t) = 1/(1 - (u_s/u_t)*exp(t)),
    which is xi_i/(xi_i - eta_j) for xi_i = u_t*exp(s_i), eta_j = u_s*exp(y_j)
    on grids sharing the step and left endpoint.  The ray directions u_t,
    u_s are distinct, so the denominator never vanishes.
    """

    def __init__(self, u_t: complex, u_s: complex, n_t: int, n_s: int, zeta: float):
        k = np.arange(-(n_t - 1), n_s, dtype=float)
        t = k * zeta
        # Beyond t ~ 300 the kernel is below 1e-130; write 0 instead of
        # letting exp overflow to inf and poison the FFT with NaNs.
        far = t > 300.0
        g = np.where(far, 0.0, 1.0 / (1.0 - (u_s / u_t) * np.exp(np.where(far, 0.0, t))))
        self.n_t = n_t
        self.n_s = n_s
        self._u_t = complex(u_t)
        self._u_s = complex(u_s)
        self._zeta = float(zeta)
        n_full = (n_t + n_s - 1) + n_s - 1
        self.nfft = 1 << max(1, int(math.ceil(math.log2(n_full))))
        self.ghat = np.fft.fft(g, self.nfft)
        self._ghat_ld: np.ndarray | None = None

    def _ghat_longdouble(self) -> np.ndarray:
        # Extended-precision kernel spectrum, built on first use.  FFT
        # round-off is the accuracy floor of the whole factor pipeline at
        # real q, where Laplace inversion amplifies any node-incoherent
        # error by many orders of magnitude.
        if self._ghat_ld is None:
            k = np.arange(-(self.n_t - 1), self.n_s)
            t = k.astype(np.longdouble) * np.longdouble(self._zeta)
            far = t > 300.0
            ratio = np.complex256(self._u_s) / np.complex256(self._u_t)
            one = np.complex256(1.0)
            et = np.exp(np.where(far, np.longdouble(0.0), t)).astype(np.complex256)
            g = np.where(far, np.complex256(0.0), one / (one - ratio * et))
            self._ghat_ld = np.fft.fft(g, self.nfft)
        return self._ghat_ld

    def apply(self, v: np.ndarray) -> np.ndarray:
        # v: (n_s,) or (n_s, n_q); returns (n_t,) or (n_t, n_q).
        # Extended-precision inputs take the extended-precision kernel.
        ghat = self._ghat_longdouble() if v.dtype == np.complex256 else self.ghat
        vr = v[::-1] if v.ndim == 1 else v[::-1, :]
        vhat = np.fft.fft(vr, n=self.nfft, axis=0)
        gh = ghat if v.ndim == 1 else ghat[:, None]
        w = np.fft.ifft(gh * vhat, axis=0)
        sl = w[self.n_s - 1 : self.n_t + self.n_s - 1]
        return sl[::-1] if v.ndim == 1 else sl[::-1, :]


@dataclass
class WhfGrids:
    """Node geometry shared by all factor and distribution integrals.

    Four rays: xi_pp = exp(i*omega_plus + y_plus) and
    xi_pm = exp(i*(pi - omega_plus) + y_plus) make up L+, while
    xi_mp = exp(i*omega_minus + y_minus) and
    xi_mm = exp(i*(-pi - omega_minus) + y_minus) make up L-.  The psi_*
    arrays hold the symbol on the matching ray (half-plane branch).
    Source grids extend the target grids to the right so factor values
    stay accurate at the outermost targets.
    """

    params: StableParams
    cone: ConeSpec
    eps: float
    omega_plus: float
    omega_minus: float
    zeta: float
    y_plus: np.ndarray
    y_minus: np.ndarray
    xi_pp: np.ndarray
    xi_pm: np.ndarray
    xi_mp: np.ndarray
    xi_mm: np.ndarray
    psi_pp: np.ndarray
    psi_pm: np.ndarray
    psi_mp: np.ndarray
    psi_mm: np.ndarray
    delta_plus: float
    delta_minus: float
    # Source rays (right-extended) and their symbol values.
    _y_src: np.ndarray = field(repr=False, default=None)
    _xi_src: dict = field(repr=False, default_factory=dict)  # keys 'pr','pl','mr','ml'
    _psi_src: dict = field(repr=False, default_factory=dict)
    _conv: dict = field(repr=False, default_factory=dict)  # keys (t_fam, t_ray, s_ray)
    _factor_memo: dict = field(repr=False, default_factory=dict)

    @property
    def n_plus_targets(self) -> int:
        return len(self.y_plus)

    @property
    def n_minus_targets(self) -> int:
        return len(self.y_minus)

    def weights_plus(self) -> np.ndarray:
        """Signed y-measure weights of the stacked L+ targets."""
        w = np.full(2 * len(self.y_plus), self.zeta)
        w[len(self.y_plus) :] *= -1.0
        return w

    def weights_minus(self) -> np.ndarray:
        w = np.full(2 * len(self.y_minus), self.zeta)
        w[len(self.y_minus) :] *= -1.0
        return w

    def xi_plus_stacked(self) -> np.ndarray:
        return np.concatenate([self.xi_pp, self.xi_pm])

    def xi_minus_stacked(self) -> np.ndarray:
        return np.concatenate([self.xi_mp, self.xi_mm])

    def psi_plus_stacked(self) -> np.ndarray:
        return np.concatenate([self.psi_pp, self.psi_pm])

    def psi_minus_stacked(self) -> np.ndarray:
        return np.concatenate([self.psi_mp, self.psi_mm])


def _ray_nodes(omega: float, y: np.ndarray, left: bool) -> np.ndarray:
    if left:
        return -np.exp(-1j * omega + y)
    return np.exp(1j * omega + y)


def build_grids(
    params: StableParams,
    cone: ConeSpec,
    budget: ErrorBudget,
    q_abs_range: tuple[float, float] = (0.25, 400.0),
) -> WhfGrids:
    """Plan and assemble the four-ray factor grids.

    Only budget.eps is read; strip width and edge norms come from the
    cone geometry.  q_abs_range hints the moduli of the Laplace nodes the
    grids will serve (they set where |psi| ~ |q| crossovers can land).
    Decay rates of the residual factors are slope-checked at a probe q
    and the grids are rebuilt once if the planned rates were optimistic.
    """
    regime = classify(params)
    if regime is Regime.ALPHA1_ASYMMETRIC:
        raise RegimeError("no two-sided factorization grids for asymmetric alpha = 1")
    d = derived(params)
    eps = budget.eps
    q_lo = max(q_abs_range[0], 1e-6)

    omega_plus = cone.omega_plus_default
    omega_minus = cone.omega_minus_default

    delta_plan_plus = _plan_delta(d.delta_plus_prior)
    delta_plan_minus = _plan_delta(d.delta_minus_prior)

    meas_plus = delta_plan_plus
    meas_minus = delta_plan_minus
    for _ in range(3):
        grids = _assemble(
            params, cone, eps, omega_plus, omega_minus,
            delta_plan_plus, delta_plan_minus, q_lo,
        )
        q_probe = max(1.0, 2.0 * cone.sigma)
        fs = factor_batch(params, grids, np.array([q_probe], dtype=complex))
        # A trivial side has mod identically zero; fitting its noise
        # would drive the planner toward enormous grids.
        meas_plus = (
            delta_plan_plus
            if d.trivial_plus
            else _fit_decay(grids.y_minus, fs.mod_plus_m[: len(grids.y_minus), 0], delta_plan_plus)
        )
        meas_minus = (
            delta_plan_minus
            if d.trivial_minus
            else _fit_decay(grids.y_plus, fs.mod_minus_p[: len(grids.y_plus), 0], delta_plan_minus)
        )
        ok = True
        if meas_plus < 0.9 * delta_plan_plus:
            delta_plan_plus = max(0.05, 0.95 * meas_plus)
            ok = False
        if meas_minus < 0.9 * delta_plan_minus:
            delta_plan_minus = max(0.05, 0.95 * meas_minus)
            ok = False
        if ok:
            break
    grids.delta_plus = meas_plus
    grids.delta_minus = meas_minus
    grids._factor_memo.clear()
    return grids


def _plan_delta(prior: float) -> float:
    if math.isinf(prior):
        return 1.0
    return max(0.05, 0.9 * min(prior, 1.0))


def _assemble(
    params: StableParams,
    cone: ConeSpec,
    eps: float,
    omega_plus: float,
    omega_minus: float,
    delta_plus: float,
    delta_minus: float,
    q_lo: float,
) -> WhfGrids:
    d = derived(params)
    alpha1 = min(params.alpha, 1.0)
    theta_sep = omega_plus - omega_minus
    ksep = 1.0 / math.sin(min(theta_sep, math.pi / 2.0))

    d_plus = 0.9 * min(cone.gamma_plus - omega_plus, theta_sep / 2.0, 0.95 * omega_plus)
    d_minus = 0.9 * min(omega_minus - cone.gamma_minus, theta_sep / 2.0, 0.95 * abs(omega_minus))
    d_strip = min(d_plus, d_minus)
    if d_strip <= 0.0:
        raise PlanError("ray geometry leaves no analyticity strip")
    h_norm = 1e3 * ksep
    zeta = plan_step(ErrorBudget(eps=eps, d=d_strip, h_norm=h_norm))

    c_left = 8.0 * ksep * (d.c_abs + abs(params.mu) + 1.0) / q_lo
    n_minus = math.ceil(math.log(4.0 * c_left / eps) / (alpha1 * zeta))
    c_right = 8.0 * ksep
    # Right tails: the L+ family hosts the negative-factor residual, the
    # L- family the positive one; each is truncated at its own rate.
    n_plus_p = math.ceil(math.log(4.0 * c_right / eps) / (delta_minus * zeta))
    n_plus_m = math.ceil(math.log(4.0 * c_right / eps) / (delta_plus * zeta))
    if max(n_minus, n_plus_p, n_plus_m) > 400_000:
        raise PlanError("factor grids would need too many nodes; decay too weak")
    y_top = max(n_plus_p, n_plus_m) * zeta
    # Sources reach past every target far enough that the dropped Cauchy
    # tail stays below eps even when the factor tends to a nonzero
    # constant (then the truncation error is relative to that constant,
    # not to the decaying residual).
    ext = math.ceil(math.log(8.0 * (y_top + 11.0) / eps) / zeta)
    n_src_right = max(n_plus_p, n_plus_m) + ext

    y_p = zeta * np.arange(-n_minus, n_plus_p + 1, dtype=float)
    y_m = zeta * np.arange(-n_minus, n_plus_m + 1, dtype=float)
    y_s = zeta * np.arange(-n_minus, n_src_right + 1, dtype=float)

    xi_pp = _ray_nodes(omega_plus, y_p, left=False)
    xi_pm = _ray_nodes(omega_plus, y_p, left=True)
    xi_mp = _ray_nodes(omega_minus, y_m, left=False)
    xi_mm = _ray_nodes(omega_minus, y_m, left=True)

    xi_src = {
        "pr": _ray_nodes(omega_plus, y_s, False),
        "pl": _ray_nodes(omega_plus, y_s, True),
        "mr": _ray_nodes(omega_minus, y_s, False),
        "ml": _ray_nodes(omega_minus, y_s, True),
    }
    psi_src = {
        "pr": psi(params, xi_src["pr"], branch=1.0),
        "pl": psi(params, xi_src["pl"], branch=-1.0),
        "mr": psi(params, xi_src["mr"], branch=1.0),
        "ml": psi(params, xi_src["ml"], branch=-1.0),
    }

    n_s = len(y_s)
    u = {
        "pr": complex(np.exp(1j * omega_plus)),
        "pl": complex(-np.exp(-1j * omega_plus)),
        "mr": complex(np.exp(1j * omega_minus)),
        "ml": complex(-np.exp(-1j * omega_minus)),
    }
    conv = {}
    for t_ray, t_key in (("r", "pr"), ("l", "pl")):
        for s_key in ("mr", "ml"):
            conv[("P", t_ray, s_key)] = _PairConv(u[t_key], u[s_key], len(y_p), n_s, zeta)
    for t_ray, t_key in (("r", "mr"), ("l", "ml")):
        for s_key in ("pr", "pl"):
            conv[("M", t_ray, s_key)] = _PairConv(u[t_key], u[s_key], len(y_m), n_s, zeta)

    return WhfGrids(
        params=params,
        cone=cone,
        eps=eps,
        omega_plus=omega_plus,
        omega_minus=omega_minus,
        zeta=zeta,
        y_plus=y_p,
        y_minus=y_m,
        xi_pp=xi_pp,
        xi_pm=xi_pm,
        xi_mp=xi_mp,
        xi_mm=xi_mm,
        psi_pp=psi(params, xi_pp, branch=1.0),
        psi_pm=psi(params, xi_pm, branch=-1.0),
        psi_mp=psi(params, xi_mp, branch=1.0),
        psi_mm=psi(params, xi_mm, branch=-1.0),
        delta_plus=delta_plus,
        delta_minus=delta_minus,
        _y_src=y_s,
        _xi_src=xi_src,
        _psi_src=psi_src,
        _conv=conv,
    )


def _fit_decay(y: np.ndarray, mod_right_ray: np.ndarray, fallback: float) -> float:
    # Slope of ln|mod| over the outer decades of the right-ray targets.
    # Nodes near the quadrature noise floor are excluded: the residual
    # there is discretization error, not the factor, and fitting it
    # would spiral the planner toward ever larger grids.
    right = np.abs(mod_right_ray)
    if not np.all(np.isfinite(right)):
        return fallback
    pos = y > 1.0
    if pos.sum() < 8 or right[pos].max() <= 0.0:
        return fallback
    # Fit only down to the profile minimum: past it the values are
    # quadrature error, not the factor, and would flatten the slope.
    i0 = np.argmax(pos)
    i_min = i0 + int(np.argmin(np.where(right[pos] > 0, right[pos], np.inf)))
    y_hi = y[i_min]
    floor = right[pos].max() * 1e-8
    sel = (y > max(1.0, 0.25 * y_hi)) & (y <= y_hi) & (right > floor)
    if sel.sum() < 8:
        return fallback
    slope = np.polyfit(y[sel], np.log(right[sel]), 1)[0]
    return max(0.05, -float(slope))


class FactorBatch:
    """Factor arrays on the target grids for a batch of q values.

    Column j corresponds to qs[j].  *_p arrays live on the stacked L+
    targets (right ray then left ray), *_m on the stacked L- targets.
    phi_plus on L+ and phi_minus on L- come from the contour integrals;
    the complementary values come from the exact identity.
    """

    def __init__(self, params: StableParams, grids: WhfGrids, qs: np.ndarray):
        qs = np.asarray(qs, dtype=complex)
        self.params = params
        self.grids = grids
        self.qs = qs
        # Real-q batches feed Gaver-type inversion, which amplifies any
        # q-incoherent sample error by the alternating binomial sums.  Run
        # the whole pipeline in extended precision there so the delivered
        # double values are correctly rounded; complex-q (sinh) batches
        # have no such amplification and stay in double.
        precise = bool(np.all(qs.imag == 0.0) and np.all(qs.real > 0.0))
        work = np.complex256 if precise else np.complex128
        qrow = qs.astype(work)[None, :]
        l_src = {}
        for key in ("pr", "pl", "mr", "ml"):
            w = grids._psi_src[key].astype(work)[:, None] / qrow
            _check_branch(1.0 + w, f"{key} sources")
            l_src[key] = _log1p_c(w)

        zeta = grids.zeta
        ln_plus = [
            (zeta / TWO_PI_I) * (
                grids._conv[("P", t, "mr")].apply(l_src["mr"])
                - grids._conv[("P", t, "ml")].apply(l_src["ml"])
            )
            for t in ("r", "l")
        ]
        ln_minus = [
            (-zeta / TWO_PI_I) * (
                grids._conv[("M", t, "pr")].apply(l_src["pr"])
                - grids._conv[("M", t, "pl")].apply(l_src["pl"])
            )
            for t in ("r", "l")
        ]
        phi_plus_p = np.exp(np.concatenate(ln_plus, axis=0))
        phi_minus_m = np.exp(np.concatenate(ln_minus, axis=0))

        psi_pt = grids.psi_plus_stacked().astype(work)[:, None]
        psi_mt = grids.psi_minus_stacked().astype(work)[:, None]
        denom_p = (qrow + psi_pt) * phi_plus_p
        denom_m = (qrow + psi_mt) * phi_minus_m
        if np.any(denom_p == 0.0) or np.any(denom_m == 0.0):
            raise ContourError("Wiener-Hopf identity division by zero on the grids")
        phi_minus_p = qrow / denom_p
        phi_plus_m = qrow / denom_m

        self.a_plus = np.array([asym_constant(params, q, "+", grids) for q in qs])
        self.a_minus = np.array([asym_constant(params, q, "-", grids) for q in qs])
        xi_pt = grids.xi_plus_stacked()
        xi_mt = grids.xi_minus_stacked()
        self.phi_plus_p = phi_plus_p.astype(np.complex128)
        self.phi_minus_m = phi_minus_m.astype(np.complex128)
        self.phi_minus_p = phi_minus_p.astype(np.complex128)
        self.phi_plus_m = phi_plus_m.astype(np.complex128)
        self.mod_plus_p = _mod_from(phi_plus_p, xi_pt, self.a_plus, "+").astype(np.complex128)
        self.mod_plus_m = _mod_from(phi_plus_m, xi_mt, self.a_plus, "+").astype(np.complex128)
        self.mod_minus_p = _mod_from(phi_minus_p, xi_pt, self.a_minus, "-").astype(np.complex128)
        self.mod_minus_m = _mod_from(phi_minus_m, xi_mt, self.a_minus, "-").astype(np.complex128)


def _mod_from(phi: np.ndarray, xi: np.ndarray, a: np.ndarray, side: str) -> np.ndarray:
    # The exponential part subtracted from phi_plus must average downward
    # (pole at +i) so that it vanishes on functions supported above the
    # evaluation point; mirror situation for phi_minus.  Both wrong-side
    # poles stay outside the contour sectors the residuals are used on.
    sgn = 1.0 if side == "+" else -1.0
    sym = 1.0 / (1.0 + sgn * 1j * xi[:, None])
    return phi - a[None, :] - (1.0 - a[None, :]) * sym


def factor_batch(params: StableParams, grids: WhfGrids, qs: np.ndarray) -> FactorBatch:
    return FactorBatch(params, grids, qs)


def factors_at(params: StableParams, grids: WhfGrids, q: complex) -> FactorBatch:
    """Single-q FactorBatch, memoized on the grids object."""
    key = (complex(q).real, complex(q).imag)
    fb = grids._factor_memo.get(key)
    if fb is None:
        fb = FactorBatch(params, grids, np.array([q], dtype=complex))
        grids._factor_memo[key] = fb
    return fb


def _require_above_l_minus(grids: WhfGrids, xi: np.ndarray) -> None:
    theta = np.angle(xi[xi != 0.0])
    ok = (theta > grids.omega_minus) | (theta < -math.pi - grids.omega_minus)
    if not ok.all():
        raise ContourError("xi must lie strictly above the lower contour L-")


def _require_below_l_plus(grids: WhfGrids, xi: np.ndarray) -> None:
    theta = np.angle(xi[xi != 0.0])
    ok = (theta < grids.omega_plus) | (theta > math.pi - grids.omega_plus)
    if not ok.all():
        raise ContourError("xi must lie strictly below the upper contour L+")


def _dense_factor(grids: WhfGrids, q: complex, xi: np.ndarray, side: str) -> np.ndarray:
    # Direct trapezoid evaluation at arbitrary points (small xi batches).
    if side == "+":
        keys, csign = ("mr", "ml"), 1.0
    else:
        keys, csign = ("pr", "pl"), -1.0
    total = np.zeros(len(xi), dtype=complex)
    for key, rsign in ((keys[0], 1.0), (keys[1], -1.0)):
        w = grids._psi_src[key] / q
        _check_branch(1.0 + w, f"{key} sources")
        l_q = _log1p_c(w)
        eta = grids._xi_src[key]
        kern = xi[:, None] / (xi[:, None] - eta[None, :])
        total += rsign * (kern @ l_q)
    out = np.exp(csign * grids.zeta / TWO_PI_I * total)
    return np.where(xi == 0.0, 1.0, out)


def phi_plus(params: StableParams, grids: WhfGrids, q: complex, xi) -> np.ndarray:
    """Supremum factor at points strictly above L- (phi_plus(0) = 1)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=complex))
    _require_above_l_minus(grids, xi)
    return _dense_factor(grids, q, xi, "+")


def phi_minus(params: StableParams, grids: WhfGrids, q: complex, xi) -> np.ndarray:
    """Infimum factor at points strictly below L+ (phi_minus(0) = 1)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=complex))
    _require_below_l_plus(grids, xi)
    return _dense_factor(grids, q, xi, "-")


def phi_opposite_via_identity(params: StableParams, q: complex, xi, phi_known) -> np.ndarray:
    """Other factor from phi_plus*phi_minus = q/(q+psi)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=complex))
    phi_known = np.atleast_1d(np.asarray(phi_known, dtype=complex))
    den = (q + psi(params, xi)) * phi_known
    if np.any(den == 0.0):
        raise ContourError("identity division by zero: factor or symbol vanished")
    return np.where(xi == 0.0, 1.0, q / den)


def asym_constant(params: StableParams, q: complex, side: str, grids: WhfGrids | None = None) -> float:
    """Limit of the factor at infinity: a_plus (side '+') or a_minus.

    Zero whenever the matching decay exponent is positive; one for the
    monotone corner cases; otherwise (alpha < 1 with drift) a convergent
    two-ray integral of ln((q+psi)/(q - i*mu*eta)) over the opposite
    contour.  The subtracted drift log removes the exact large-|eta|
    growth, so each ray integrand decays at both ends.
    """
    regime = classify(params)
    if regime is Regime.ALPHA1_ASYMMETRIC:
        raise RegimeError("no factorization constants for asymmetric alpha = 1")
    d = derived(params)
    if side == "+":
        if d.trivial_plus:
            return 1.0
        if d.alpha_plus > 0.0:
            return 0.0
    elif side == "-":
        if d.trivial_minus:
            return 1.0
        if d.alpha_minus > 0.0:
            return 0.0
    else:
        raise ValueError("side must be '+' or '-'")
    qc = complex(q)
    if abs(qc.imag) > 1e-14 * max(1.0, abs(qc.real)) or qc.real <= 0.0:
        raise RegimeError("asymptotic constants arise only on the real-q contours")
    if grids is None:
        from .charexp import admissible_cone

        cone = admissible_cone(params, for_complex_q=False)
        grids = build_grids(params, cone, ErrorBudget(eps=1e-12, d=1.0, h_norm=1.0))
    keys, csign = (("pr", "pl"), -1.0) if side == "-" else (("mr", "ml"), 1.0)
    # Extended-precision accumulation: these constants enter real-q factor
    # batches, where Laplace inversion amplifies per-q-incoherent rounding.
    qc_ld = np.complex256(qc)
    acc = np.complex256(0.0)
    for key, rsign in ((keys[0], 1.0), (keys[1], -1.0)):
        eta = grids._xi_src[key]
        branch = 1.0 if key.endswith("r") else -1.0
        psi_ld = psi(params, eta, branch=branch).astype(np.complex256)
        drift_ld = qc_ld - np.complex256(1j * params.mu) * eta.astype(np.complex256)
        a_log = np.log(qc_ld + psi_ld) - np.log(drift_ld)
        acc += np.complex256(rsign) * np.sum(a_log)
    val = np.exp(np.complex256(csign * grids.zeta / TWO_PI_I) * acc)
    if abs(complex(val).imag) > 1e-8 * max(1.0, abs(complex(val).real)):
        raise ContourError(f"asymptotic constant came out non-real: {val}")
    return float(val.real)


def phi_mod(params: StableParams, grids: WhfGrids, q: complex, xi, side: str) -> np.ndarray:
    """Residual factor after subtracting the constant and exponential parts.

    side '+': phi_plus(xi) - a_plus - (1-a_plus)/(1+i*xi), valid above L-.
    side '-': phi_minus(xi) - a_minus - (1-a_minus)/(1-i*xi), below L+.
    Exactly zero at xi = 0; the residual vanishes when integrated against
    functions supported on the side the underlying operator cannot reach.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=complex))
    if side == "+":
        phi = phi_plus(params, grids, q, xi)
        a = asym_constant(params, q, "+", grids)
        out = phi - a - (1.0 - a) / (1.0 + 1j * xi)
    elif side == "-":
        phi = phi_minus(params, grids, q, xi)
        a = asym_constant(params, q, "-", grids)
        out = phi - a - (1.0 - a) / (1.0 - 1j * xi)
    else:
        raise ValueError("side must be '+' or '-'")
    return np.where(xi == 0.0, 0.0, out)


@dataclass(frozen=True)
class WhfValue:
    """Both factors and asymptotics at one (q, xi) point."""

    phi_plus: complex
    phi_minus: complex
    a_plus: float
    a_minus: float
    delta_plus: float
    delta_minus: float


def whf_value(params: StableParams, grids: WhfGrids, q: complex, xi: complex) -> WhfValue:
    xic = complex(xi)
    theta = math.atan2(xic.imag, xic.real)
    above = xic == 0 or theta > grids.omega_minus or theta < -math.pi - grids.omega_minus
    below = xic == 0 or theta < grids.omega_plus or theta > math.pi - grids.omega_plus
    if above:
        pp = complex(phi_plus(params, grids, q, xic)[0])
        pm = (
            complex(phi_minus(params, grids, q, xic)[0])
            if below
            else complex(phi_opposite_via_identity(params, q, xic, pp)[0])
        )
    else:
        pm = complex(phi_minus(params, grids, q, xic)[0])
        pp = complex(phi_opposite_via_identity(params, q, xic, pm)[0])
    return WhfValue(
        phi_plus=pp,
        phi_minus=pm,
        a_plus=asym_constant(params, q, "+", grids),
        a_minus=asym_constant(params, q, "-", grids),
        delta_plus=grids.delta_plus,
        delta_minus=grids.delta_minus,
    )
