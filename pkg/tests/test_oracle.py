"""Tests for the independent reference values (closed forms, Monte Carlo).

The sampler is held to the exact characteristic function, the ladder
exponent to its explicit root, and the path machinery to the closed-form
marginal of the symmetric alpha = 1 case.
"""

import math

import numpy as np
import pytest

from stablesup.charexp import StableParams
from stablesup.errors import RegimeError, StableSupError
from stablesup.oracle import (
    McConfig,
    cauchy_cdf,
    mc_exchange_functional,
    mc_functionals,
    mc_joint_functional,
    mc_standard_functionals,
    one_sided_beta_root,
    one_sided_sup_exceedance,
    one_sided_sup_factor,
    sample_stable,
    validate_cf,
)

CAUCHY = StableParams(1.0, 0.5, 0.5, 0.3)


# ----------------------------------------------------------------------
# Closed forms.


def test_cauchy_cdf_quartiles_and_monotonicity():
    T = 2.0
    d_scale = math.pi / 2.0 * (CAUCHY.c_plus + CAUCHY.c_minus) * T
    loc = CAUCHY.mu * T
    assert abs(cauchy_cdf(loc, CAUCHY, T) - 0.5) < 1e-15
    assert abs(cauchy_cdf(loc + d_scale, CAUCHY, T) - 0.75) < 1e-14
    assert abs(cauchy_cdf(loc - d_scale, CAUCHY, T) - 0.25) < 1e-14
    y = np.linspace(-20, 20, 101)
    c = cauchy_cdf(y, CAUCHY, T)
    assert np.all(np.diff(c) > 0)
    assert c[0] > 0.0 and c[-1] < 1.0


def test_cauchy_cdf_guards():
    with pytest.raises(RegimeError):
        cauchy_cdf(0.0, StableParams(1.0, 0.8, 0.2, 0.0), 1.0)
    with pytest.raises(RegimeError):
        cauchy_cdf(0.0, StableParams(1.2, 0.5, 0.5, 0.0), 1.0)


def test_beta_root_closed_form_no_drift():
    # mu = 0, c_plus = 0, c_minus = 1: the root of Gamma(-alpha) b^alpha = q
    # is explicit; Gamma(-3/2) = 4 sqrt(pi) / 3.
    params = StableParams(1.5, 0.0, 1.0, 0.0)
    for q in (0.5, 1.0, 5.0, 42.0):
        expected = (3.0 * q / (4.0 * math.sqrt(math.pi))) ** (2.0 / 3.0)
        got = one_sided_beta_root(params, q)
        assert abs(got - expected) < 1e-12 * expected


def test_beta_root_with_drift_satisfies_equation():
    from scipy.special import gamma

    # For alpha < 1 the jump term carries a negative sign, so the root
    # balances two large terms; the residual floor is machine epsilon
    # relative to the larger term, not to q.
    for params in (StableParams(0.8, 0.0, 2.0, 0.5), StableParams(1.5, 0.0, 1.0, 0.5)):
        for q in (0.3, 1.0, 10.0):
            b = one_sided_beta_root(params, q)
            t_drift = params.mu * b
            t_jump = params.c_minus * gamma(-params.alpha) * b**params.alpha
            floor = 1e-13 * max(q, abs(t_drift), abs(t_jump))
            assert abs(t_drift + t_jump - q) < floor


def test_beta_root_guards():
    with pytest.raises(RegimeError):
        one_sided_beta_root(StableParams(1.5, 0.2, 1.0, 0.0), 1.0)
    with pytest.raises(ValueError):
        one_sided_beta_root(StableParams(1.5, 0.0, 1.0, 0.0), 0.0)
    with pytest.raises(RegimeError):
        one_sided_beta_root(StableParams(1.0, 0.0, 1.0, 0.0), 1.0)


def test_one_sided_exceedance_and_factor():
    params = StableParams(1.5, 0.0, 1.0, 0.0)
    q = 2.0
    beta = one_sided_beta_root(params, q)
    assert abs(one_sided_sup_exceedance(params, q, 1.3) - math.exp(-beta * 1.3)) < 1e-15
    assert one_sided_sup_exceedance(params, q, -4.0) == 1.0
    xi = np.array([0.0, 1.0, -2.0 + 0.5j])
    f = one_sided_sup_factor(params, q, xi)
    assert abs(f[0] - 1.0) < 1e-15
    assert np.abs(f - beta / (beta - 1j * xi)).max() < 1e-15


# ----------------------------------------------------------------------
# Increment sampler.


def test_sampler_deterministic_given_seed():
    params = StableParams(1.2, 0.5, 0.5, 0.0)
    a = sample_stable(params, 0.7, np.random.Generator(np.random.Philox(key=11, counter=0)), 1000)
    b = sample_stable(params, 0.7, np.random.Generator(np.random.Philox(key=11, counter=0)), 1000)
    c = sample_stable(params, 0.7, np.random.Generator(np.random.Philox(key=12, counter=0)), 1000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


@pytest.mark.parametrize(
    "params,t",
    [
        (StableParams(1.2, 0.5, 0.5, 0.0), 1.0),
        (StableParams(1.5, 0.9, 0.3, -0.4), 0.5),
        (StableParams(0.7, 1.0, 0.5, 0.0), 2.0),
        (StableParams(1.0, 0.5, 0.5, 0.3), 1.0),
    ],
)
def test_sampler_matches_characteristic_function(params, t):
    rng = np.random.Generator(np.random.Philox(key=77, counter=0))
    samples = sample_stable(params, t, rng, 200_000)
    worst = validate_cf(params, t, samples)
    assert worst < 4.0 / math.sqrt(200_000)


def test_cf_gate_catches_wrong_law():
    rng = np.random.Generator(np.random.Philox(key=5, counter=0))
    samples = sample_stable(StableParams(1.2, 0.5, 0.5, 0.0), 1.0, rng, 50_000)
    with pytest.raises(StableSupError):
        validate_cf(StableParams(1.5, 0.5, 0.5, 0.0), 1.0, samples)


# ----------------------------------------------------------------------
# Path functionals.

SMALL_MC = McConfig(n_paths=30_000, n_steps=64, seed=99, chunk=10_000)


def test_mc_estimates_are_probabilities_and_nested():
    params = StableParams(1.3, 0.6, 0.4, 0.1)
    est = mc_functionals(params, 1.0, mc_standard_functionals(x=0.1, a=1.0), SMALL_MC)
    for k in ("cpdf_x", "cpdf_sup"):
        assert 0.0 < est[k].mean < 1.0
        assert est[k].se > 0.0
        assert est[k].bias_bound >= 2.0 * est[k].se
    # The running supremum dominates the endpoint, so its cpdf is smaller.
    assert est["cpdf_sup"].mean <= est["cpdf_x"].mean + 1e-12


def test_mc_matches_cauchy_closed_form():
    # The endpoint marginal has no discretization bias, so the envelope
    # must cover the exact closed-form value.
    x, a, T = 0.2, 1.5, 1.0
    est = mc_functionals(CAUCHY, T, mc_standard_functionals(x=x, a=a), SMALL_MC)
    exact = float(cauchy_cdf(a - x, CAUCHY, T))
    assert est["cpdf_x"].compatible(exact)
    assert abs(est["cpdf_x"].mean - exact) < 5.0 * est["cpdf_x"].se


def test_mc_deterministic_given_config():
    params = StableParams(1.3, 0.6, 0.4, 0.1)
    fns = mc_standard_functionals(x=0.0, a=0.5)
    cfg = McConfig(n_paths=5_000, n_steps=32, seed=123, chunk=2_000)
    e1 = mc_functionals(params, 1.0, fns, cfg)
    e2 = mc_functionals(params, 1.0, fns, cfg)
    assert e1["cpdf_sup"] == e2["cpdf_sup"]


def test_functional_definitions():
    xt = np.array([-1.0, 0.5, 2.0])
    xb = np.array([0.0, 1.0, 2.5])
    joint = mc_joint_functional(x=0.1, a1=1.0, a2=1.5)(xt, xb)
    assert np.array_equal(joint, np.array([1.0, 1.0, 0.0]))
    std = mc_standard_functionals(x=0.1, a=1.0)
    both = std["cpdf_x"](xt, xb) * std["cpdf_sup"](xt, xb)
    assert np.all(mc_joint_functional(0.1, 1.0, 1.0)(xt, xb) == both)
    fn = mc_exchange_functional(x1=0.2, x2=1.0, beta=2.0, lam=0.5)
    got = fn(xt, xb)
    m = np.maximum(1.0, 0.2 + xb)
    expected = np.maximum(2.0 * (0.2 + xt) - m, 0.0) * np.exp(-0.5 * m)
    assert np.allclose(got, expected, rtol=0, atol=1e-15)


def test_compatible_envelope():
    from stablesup.oracle import McEstimate

    e = McEstimate(mean=0.5, se=0.01, bias_bound=0.02)
    assert e.compatible(0.5 + 3 * 0.01 + 0.019)
    assert not e.compatible(0.5 + 3 * 0.01 + 0.021)
