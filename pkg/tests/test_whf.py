"""Tests for the two-factor decomposition of q/(q + psi).

Covers the exact multiplicative identity on real and complex q, the
closed-form factor of a spectrally one-sided process, the asymptotic
constants of the drift regimes (frozen values plus a large-argument
brute-force cross-check), symmetry relations, residual-factor decay
laws, and the domain/regime guards.
"""

import math

import numpy as np
import pytest

from stablesup import whf
from stablesup.charexp import StableParams, admissible_cone, derived, psi
from stablesup.errors import BranchCutError, ContourError, RegimeError
from stablesup.oracle import one_sided_sup_factor
from stablesup.quadrature import ErrorBudget

# One representative per qualitatively distinct parameter regime.
REGIME_PARAMS = {
    "symmetric_mid": StableParams(1.2, 0.5, 0.5, 0.0),
    "skew_pos_heavy": StableParams(1.5, 0.9, 0.3, 0.0),
    "skew_neg_heavy": StableParams(1.5, 0.1, 0.9, 0.0),
    "gt1_with_drift": StableParams(1.5, 0.7, 0.7, -0.5),
    "lt1_pos_drift": StableParams(0.2, 1.0, 1.0, 1.0),
    "lt1_neg_drift": StableParams(0.7, 0.4, 0.8, -0.6),
    "lt1_no_drift": StableParams(0.7, 1.0, 0.5, 0.0),
    "cauchy_sym_drift": StableParams(1.0, 0.5, 0.5, 0.3),
    "spectrally_negative": StableParams(1.5, 0.0, 1.0, 0.0),
}

COMPLEX_Q_PARAMS = [
    "symmetric_mid",
    "skew_pos_heavy",
    "gt1_with_drift",
    "lt1_no_drift",
    "cauchy_sym_drift",
    "spectrally_negative",
]

_GRID_CACHE: dict = {}


def grids_for(params: StableParams, eps: float = 1e-12, complex_q: bool = False) -> whf.WhfGrids:
    key = (params, eps, complex_q)
    if key not in _GRID_CACHE:
        cone = admissible_cone(params, for_complex_q=complex_q)
        _GRID_CACHE[key] = whf.build_grids(params, cone, ErrorBudget(eps=eps, d=1.0, h_norm=1.0))
    return _GRID_CACHE[key]


def real_xi_grid(n_half: int = 32) -> np.ndarray:
    mag = np.logspace(-3, 2.3, n_half)
    return np.concatenate([-mag[::-1], mag])


# ----------------------------------------------------------------------
# Exact multiplicative identity: phi_plus * phi_minus = q / (q + psi).


@pytest.mark.parametrize("name", sorted(REGIME_PARAMS))
def test_identity_real_q(name):
    params = REGIME_PARAMS[name]
    grids = grids_for(params)
    xi = real_xi_grid()
    assert len(xi) == 64
    for q in (0.5, 1.0, 5.0, 50.0):
        pp = whf.phi_plus(params, grids, q, xi)
        pm = whf.phi_minus(params, grids, q, xi)
        res = np.abs(pp * pm * (q + psi(params, xi)) / q - 1.0)
        assert res.max() < 1e-10, f"{name} q={q}: identity residual {res.max():.3e}"


@pytest.mark.parametrize("name", COMPLEX_Q_PARAMS)
def test_identity_complex_q(name):
    params = REGIME_PARAMS[name]
    cone = admissible_cone(params, for_complex_q=True)
    grids = grids_for(params, complex_q=True)
    xi = np.linspace(-30.0, 30.0, 33)
    for frac in (0.3, 0.95):
        theta = frac * cone.gamma0
        for r in (0.6, 3.0, 40.0):
            q = r * math.cos(theta) + 1j * r * math.sin(theta)
            pp = whf.phi_plus(params, grids, q, xi)
            pm = whf.phi_minus(params, grids, q, xi)
            res = np.abs(pp * pm * (q + psi(params, xi)) / q - 1.0)
            assert res.max() < 1e-10, f"{name} q={q:.3g}: residual {res.max():.3e}"


def test_identity_helper_roundtrip():
    params = REGIME_PARAMS["symmetric_mid"]
    grids = grids_for(params)
    xi = np.array([0.0, 0.7, -2.2, 9.0])
    q = 2.0
    pp = whf.phi_plus(params, grids, q, xi)
    pm = whf.phi_opposite_via_identity(params, q, xi, pp)
    direct = whf.phi_minus(params, grids, q, xi)
    assert np.abs(pm - direct).max() < 1e-10
    assert pm[0] == 1.0  # xi = 0 short-circuits to exactly one


# ----------------------------------------------------------------------
# Closed-form oracle: no positive jumps => phi_plus = beta/(beta - i xi).


def test_one_sided_closed_form_factor():
    params = StableParams(1.5, 0.0, 1.0, 0.0)
    grids = grids_for(params)
    xi = np.concatenate([real_xi_grid(16), np.array([2j, 5 + 7j, -3 + 0.5j, 0.1j])])
    for q in (0.5, 2.0, 50.0):
        expected = one_sided_sup_factor(params, q, xi)
        got = whf.phi_plus(params, grids, q, xi)
        err = np.abs(got - expected).max()
        assert err < 1e-10, f"q={q}: max |phi_plus - closed form| = {err:.3e}"


def test_one_sided_closed_form_on_batch_grids():
    params = StableParams(1.5, 0.0, 1.0, 0.0)
    grids = grids_for(params)
    qs = np.array([0.5, 2.0, 50.0], dtype=complex)
    fb = whf.factor_batch(params, grids, qs)
    xi_m = grids.xi_minus_stacked()
    for j, q in enumerate(qs):
        expected = one_sided_sup_factor(params, q.real, xi_m)
        err = np.abs(fb.phi_plus_m[:, j] - expected)
        assert err.max() < 1e-10, f"q={q}: batch factor error {err.max():.3e}"


# ----------------------------------------------------------------------
# Symmetries and pointwise sanity.


def test_symmetric_process_factor_reflection():
    params = StableParams(1.2, 0.5, 0.5, 0.0)
    grids = grids_for(params)
    xi = real_xi_grid(16)
    q = 1.7
    pp = whf.phi_plus(params, grids, q, xi)
    pm = whf.phi_minus(params, grids, q, xi)
    # X and -X share the law, so the infimum factor is the supremum
    # factor reflected; real xi also gives conjugate symmetry.
    assert np.abs(pm - pp[::-1]).max() < 1e-11
    assert np.abs(pp - np.conj(pp[::-1])).max() < 1e-11


@pytest.mark.parametrize("name", ["symmetric_mid", "lt1_pos_drift", "spectrally_negative"])
def test_phi_plus_on_positive_imaginary_axis(name):
    # phi_plus(i tau) is the Laplace transform of a nonnegative variable:
    # real, in (0, 1], and nonincreasing in tau.
    params = REGIME_PARAMS[name]
    grids = grids_for(params)
    tau = np.array([0.1, 0.5, 1.0, 3.0, 10.0])
    vals = whf.phi_plus(params, grids, 1.0, 1j * tau)
    assert np.abs(vals.imag).max() < 1e-10
    v = vals.real
    assert np.all(v > 0.0) and np.all(v <= 1.0 + 1e-12)
    assert np.all(np.diff(v) < 1e-12)


def test_whf_value_consistency_across_wedges():
    params = REGIME_PARAMS["symmetric_mid"]
    grids = grids_for(params)
    q = 1.0
    for xi in (0.4, 5j, -5j, -0.8):
        val = whf.whf_value(params, grids, q, xi)
        ident = val.phi_plus * val.phi_minus * (q + psi(params, np.array([xi]))[0]) / q
        assert abs(ident - 1.0) < 1e-10
        assert val.a_plus == 0.0 and val.a_minus == 0.0
        assert val.delta_plus > 0.0 and val.delta_minus > 0.0


# ----------------------------------------------------------------------
# Asymptotic constants in the drift regimes.

A_MINUS_PARAMS = StableParams(0.2, 1.0, 1.0, 1.0)
# Frozen outputs of the regularized two-ray integral, cross-checked
# against lim phi_minus(-iR) with R = 1e12 (agreement ~6e-10, consistent
# with the R^(alpha-1) approach rate).
A_MINUS_FROZEN = {0.5: 0.154784541426619, 1.0: 0.215500957434347, 5.0: 0.433307106169100}


def test_asym_constant_frozen_values():
    grids = grids_for(A_MINUS_PARAMS)
    for q, expected in A_MINUS_FROZEN.items():
        got = whf.asym_constant(A_MINUS_PARAMS, q, "-", grids)
        assert abs(got - expected) < 1e-12, f"q={q}: {got!r}"


def test_asym_constant_matches_factor_limit():
    # Independent check: phi_minus itself, evaluated far down the
    # imaginary axis, approaches a_minus at rate R^(alpha-1).
    grids = grids_for(A_MINUS_PARAMS)
    q = 1.0
    a = whf.asym_constant(A_MINUS_PARAMS, q, "-", grids)
    far = whf.phi_minus(A_MINUS_PARAMS, grids, q, np.array([-1e10j]))[0]
    assert abs(far.imag) < 1e-7
    assert abs(far.real - a) < 1e-7


def test_asym_constant_mirror_reflection():
    # Flipping both the jump weights and the drift swaps the roles of
    # supremum and infimum exactly.
    mirrored = StableParams(0.2, 1.0, 1.0, -1.0)
    a_minus = whf.asym_constant(A_MINUS_PARAMS, 1.0, "-", grids_for(A_MINUS_PARAMS))
    a_plus = whf.asym_constant(mirrored, 1.0, "+", grids_for(mirrored))
    assert abs(a_plus - a_minus) < 1e-13


def test_asym_constant_trivial_branches():
    # Positive decay exponent forces the limit to zero even for complex q.
    sym = REGIME_PARAMS["symmetric_mid"]
    assert whf.asym_constant(sym, 1.0 + 1.0j, "+") == 0.0
    assert whf.asym_constant(sym, 2.0, "-") == 0.0
    # Monotone side pins the factor at one.
    sub = StableParams(0.7, 1.0, 0.0, 0.3)
    assert whf.asym_constant(sub, 1.0, "-", grids_for(sub)) == 1.0
    # The genuinely regularized integral only exists for real q.
    with pytest.raises(RegimeError):
        whf.asym_constant(A_MINUS_PARAMS, 1.0 + 0.5j, "-", grids_for(A_MINUS_PARAMS))


# ----------------------------------------------------------------------
# Monotone special case: subordinator-like process has trivial infimum.


def test_subordinator_minus_factor_trivial():
    params = StableParams(0.7, 1.0, 0.0, 0.3)
    grids = grids_for(params)
    fb = whf.factors_at(params, grids, 1.0)
    assert np.abs(fb.mod_minus_p).max() < 1e-10
    assert np.abs(fb.mod_minus_m).max() < 1e-10
    assert fb.a_minus[0] == 1.0
    pts = np.array([-2j, 1.0 - 0.5j, 3.0, -0.2])
    pm = whf.phi_minus(params, grids, 1.0, pts)
    assert np.abs(pm - 1.0).max() < 1e-10
    # Planner must trust the structural zero instead of fitting noise.
    assert grids.delta_minus == 1.0


# ----------------------------------------------------------------------
# Residual factor decay laws.


@pytest.mark.parametrize(
    "name", ["symmetric_mid", "lt1_pos_drift", "lt1_no_drift", "gt1_with_drift"]
)
def test_mod_small_scale_decay_rate(name):
    # Toward xi -> 0 the residual factors vanish like |xi|^min(alpha,1)
    # (heavy-tail moment term); the planner's shared left tail relies on
    # exactly this rate.
    params = REGIME_PARAMS[name]
    grids = grids_for(params, eps=1e-10)
    fb = whf.factors_at(params, grids, 1.0)
    y = grids.y_minus
    m = np.abs(fb.mod_plus_m[: len(y), 0])
    sel = (y > y[0] + 2.0) & (y < -4.0) & (m > 1e-280)
    assert sel.sum() > 8
    slope = np.polyfit(y[sel], np.log(m[sel]), 1)[0]
    expected = min(params.alpha, 1.0)
    assert abs(slope - expected) < 0.12 * expected, f"slope {slope:.3f} vs {expected}"


def test_measured_decay_rates_positive_and_bounded():
    for name, params in REGIME_PARAMS.items():
        grids = grids_for(params)
        assert 0.04 < grids.delta_plus <= 10.0, name
        assert 0.04 < grids.delta_minus <= 10.0, name


# ----------------------------------------------------------------------
# Internal consistency: FFT convolution batch vs direct quadrature.


def test_batch_matches_dense_evaluation():
    params = REGIME_PARAMS["skew_pos_heavy"]
    grids = grids_for(params)
    q = 3.0
    fb = whf.factors_at(params, grids, q)
    idx = np.array([0, 3, len(grids.y_plus) // 2, len(grids.y_plus) - 1])
    xi_pts = grids.xi_pp[idx]
    dense = whf._dense_factor(grids, q, xi_pts, "+")
    batch = fb.phi_plus_p[idx, 0]
    assert np.abs(dense - batch).max() < 1e-12


def test_factors_at_memoizes():
    params = REGIME_PARAMS["symmetric_mid"]
    grids = grids_for(params)
    fb1 = whf.factors_at(params, grids, 4.0)
    fb2 = whf.factors_at(params, grids, 4.0)
    assert fb1 is fb2
    fb3 = whf.factors_at(params, grids, 4.0 + 1e-9j)
    assert fb3 is not fb1


# ----------------------------------------------------------------------
# Guards.


def test_factor_domain_guards():
    params = REGIME_PARAMS["symmetric_mid"]
    grids = grids_for(params)
    with pytest.raises(ContourError):
        whf.phi_minus(params, grids, 1.0, np.array([2j]))  # above L+
    with pytest.raises(ContourError):
        whf.phi_plus(params, grids, 1.0, np.array([-2j]))  # below L-


def test_branch_check_rejects_cut_crossing():
    with pytest.raises(BranchCutError):
        whf._check_branch(np.array([-0.5 + 0.0j]), "synthetic")
    path = np.array([1.0 + 0.1j, -1.0 + 0.1j, -1.0 - 0.1j, 1.0 - 0.1j])
    with pytest.raises(BranchCutError):
        whf._check_branch(path, "synthetic")


def test_asymmetric_alpha_one_rejected():
    with pytest.raises(RegimeError):
        grids_for(StableParams(1.0, 0.9, 0.1, 0.0))


def test_complex_q_cone_rejected_for_lt1_drift():
    with pytest.raises(RegimeError):
        admissible_cone(StableParams(0.7, 0.4, 0.8, -0.6), for_complex_q=True)
    with pytest.raises(RegimeError):
        admissible_cone(StableParams(0.7, 1.0, 0.0, 0.3), for_complex_q=True)
