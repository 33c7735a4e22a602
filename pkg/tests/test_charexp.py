import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stablesup import RegimeError, StableParams
from stablesup.charexp import (
    Regime,
    admissible_cone,
    classify,
    derived,
    psi,
    psi0,
)


def test_param_validation():
    with pytest.raises(ValueError):
        StableParams(2.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        StableParams(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        StableParams(1.5, -0.1, 1.0)
    with pytest.raises(ValueError):
        StableParams(1.5, 0.0, 0.0)


def test_classify_table():
    assert classify(StableParams(1.5, 1, 1, -3.0)) is Regime.ALPHA_GT1
    assert classify(StableParams(0.5, 1, 1, 0.0)) is Regime.ALPHA_LT1_ZERO_DRIFT
    assert classify(StableParams(0.5, 1, 1, 0.1)) is Regime.ALPHA_LT1_POS_DRIFT
    assert classify(StableParams(0.5, 1, 1, -0.1)) is Regime.ALPHA_LT1_NEG_DRIFT
    assert classify(StableParams(1.0, 1, 1, 0.2)) is Regime.ALPHA1_SYMMETRIC
    assert classify(StableParams(1.0, 1, 0.5, 0.0)) is Regime.ALPHA1_ASYMMETRIC


def test_real_axis_convention():
    # On the real axis the symbol must match the textbook stable exponent
    # with location 0: Re psi0 = |C|cos(phi0)*|xi|^alpha and the skewness
    # enters through the phase.
    p = StableParams(1.2, 0.4, 1.0, -0.02)
    g = math.gamma(-1.2)
    for x in (0.7, -1.3, 2.0, -0.1):
        ref = -1j * p.mu * x - g * complex(
            (p.c_plus + p.c_minus) * math.cos(math.pi * 0.6),
            -(p.c_plus - p.c_minus) * math.sin(math.pi * 0.6) * math.copysign(1.0, x),
        ) * abs(x) ** 1.2
        got = complex(psi(p, x))
        assert abs(got - ref) <= 1e-14 * max(1.0, abs(ref))
    assert derived(p).re_c > 0.0


def test_alpha1_symmetric_symbol():
    p = StableParams(1.0, 0.5, 0.5, 0.0)
    sigma_z = (0.5 + 0.5) * math.pi / 2.0
    assert complex(psi0(p, 2.0)) == pytest.approx(sigma_z * 2.0, abs=1e-14)
    assert complex(psi0(p, -2.0)) == pytest.approx(sigma_z * 2.0, abs=1e-14)


def test_conjugation_symmetry():
    # Real-valued process: psi(-conj(xi)) = conj(psi(xi)), with the branch
    # mirrored across the imaginary axis.
    p = StableParams(1.7, 0.9, 0.3, 0.4)
    rng = np.random.default_rng(7)
    xi = rng.normal(size=20) + 1j * rng.normal(size=20)
    xi = np.where(xi.real == 0, xi + 0.1, xi)
    left = psi(p, -np.conj(xi))
    right = np.conj(psi(p, xi))
    assert np.allclose(left, right, rtol=1e-13, atol=1e-13)


def test_factor_exponents_one_sided():
    # Spectrally negative, alpha in (1,2): supremum factor decays with
    # exponent exactly 1 (exponential supremum), the other with alpha-1.
    d = derived(StableParams(1.5, 0.0, 1.0, 0.0))
    assert d.alpha_plus == pytest.approx(1.0, abs=1e-13)
    assert d.alpha_minus == pytest.approx(0.5, abs=1e-13)
    d = derived(StableParams(1.5, 1.0, 0.0, 0.0))
    assert d.alpha_minus == pytest.approx(1.0, abs=1e-13)
    assert d.alpha_plus == pytest.approx(0.5, abs=1e-13)
    # One-sided alpha < 1 without drift: monotone process, trivial factor.
    d = derived(StableParams(0.7, 1.0, 0.0, 0.0))
    assert d.alpha_plus == pytest.approx(0.7, abs=1e-13)
    assert d.alpha_minus == 0.0
    assert d.trivial_minus and not d.trivial_plus
    d = derived(StableParams(0.7, 0.0, 1.0, -0.3))
    assert d.trivial_plus


@settings(max_examples=100, deadline=None)
@given(
    alpha=st.floats(0.15, 1.95).filter(lambda a: abs(a - 1.0) > 0.02),
    c_plus=st.floats(0.05, 3.0),
    c_minus=st.floats(0.05, 3.0),
)
def test_positivity_parameter_identity(alpha, c_plus, c_minus):
    # alpha_plus equals alpha * P(X_1 > 0) for strictly stable laws.
    d = derived(StableParams(alpha, c_plus, c_minus, 0.0))
    beta_z = (c_plus - c_minus) / (c_plus + c_minus)
    rho = 0.5 + math.atan(beta_z * math.tan(math.pi * alpha / 2.0)) / (math.pi * alpha)
    assert d.alpha_plus == pytest.approx(alpha * rho, abs=1e-12)
    assert d.alpha_plus + d.alpha_minus == pytest.approx(alpha, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    alpha=st.floats(0.2, 1.95).filter(lambda a: abs(a - 1.0) > 0.02),
    c_plus=st.floats(0.0, 2.0),
    c_minus=st.floats(0.0, 2.0),
    mu=st.floats(-1.0, 1.0),
)
def test_real_q_cone_keeps_symbol_off_cut(alpha, c_plus, c_minus, mu):
    if c_plus + c_minus < 0.05:
        return
    p = StableParams(alpha, c_plus, c_minus, mu)
    cone = admissible_cone(p, for_complex_q=False)
    assert cone.gamma_plus > 0.0 > cone.gamma_minus
    rs = np.exp(np.linspace(-12.0, 12.0, 400))
    for omega in (0.5 * cone.gamma_plus, cone.gamma_plus, 0.5 * cone.gamma_minus, cone.gamma_minus):
        for sgn in (1.0, -1.0):
            # Right ray at omega and its left companion across the origin.
            xi = rs * np.exp(1j * omega) if sgn > 0 else rs * np.exp(1j * (math.pi - omega)) * -1.0 + 0.0
            xi = rs * np.exp(1j * omega) if sgn > 0 else -rs * np.exp(-1j * omega)
            vals = psi(p, xi)
            for q in (1e-4, 0.5, 5.0, 1e4):
                z = q + vals
                on_cut = (z.real <= 0.0) & (np.abs(z.imag) <= 1e-12 * np.abs(z.real))
                assert not on_cut.any()


def test_complex_q_cone_gates_and_geometry():
    with pytest.raises(RegimeError):
        admissible_cone(StableParams(0.7, 1.0, 0.3, 0.5), for_complex_q=True)
    with pytest.raises(RegimeError):
        admissible_cone(StableParams(1.0, 1.0, 0.5, 0.0), for_complex_q=False)
    cone = admissible_cone(StableParams(1.5, 0.0, 1.0, 0.0), for_complex_q=True)
    assert 0.0 < cone.gamma0 < 1.3
    assert cone.sigma >= 0.0
    assert 0.0 < cone.omega_plus_default < cone.gamma_plus
    assert cone.gamma_minus < cone.omega_minus_default < 0.0


def test_complex_q_cone_no_zeros_numeric():
    # Sample q from the guaranteed cone and xi from the admissible rays;
    # q + psi must stay away from (-inf, 0].
    for p in (StableParams(1.5, 0.0, 1.0, -0.3), StableParams(0.7, 1.0, 1.0, 0.0), StableParams(1.2, 0.4, 1.0, 0.0)):
        cone = admissible_cone(p, for_complex_q=True)
        sigma = max(cone.sigma, 1.0)
        rng = np.random.default_rng(11)
        thetas = rng.uniform(-math.pi / 2 - cone.gamma0, math.pi / 2 + cone.gamma0, 40)
        radii = np.exp(rng.uniform(-6, 14, 40))
        qs = sigma + radii * np.exp(1j * thetas)
        rs = np.exp(np.linspace(-12.0, 12.0, 300))
        for omega in (cone.gamma_plus, cone.gamma_minus, cone.gamma_plus / 3, cone.gamma_minus / 3):
            for xi in (rs * np.exp(1j * omega), -rs * np.exp(-1j * omega)):
                vals = psi(p, xi)
                for q in qs:
                    z = q + vals
                    assert not ((z.real <= 0.0) & (np.abs(z.imag) <= 1e-12 * np.maximum(1.0, np.abs(z.real)))).any()
