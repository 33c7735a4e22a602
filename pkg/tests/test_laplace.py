import cmath
import math

import numpy as np
import pytest

from stablesup import StableParams, admissible_cone
from stablesup.laplace import (
    BromwichConfig,
    GwrConfig,
    choose_contour,
    gaver_stehfest,
    gwr_invert,
    sinh_bromwich_invert,
    transform_tolerance,
)
from stablesup.quadrature import SinhContour, TrapezoidPlan

# (name, transform valid for complex q off (-inf, 0], exact original)
PAIRS = [
    ("one", lambda q: 1.0 / q, lambda T: 1.0),
    ("ramp", lambda q: 1.0 / q**2, lambda T: T),
    ("exp", lambda q: 1.0 / (q + 1.0), lambda T: math.exp(-T)),
    ("sin", lambda q: 1.0 / (q * q + 1.0), lambda T: math.sin(T)),
    ("erfc", lambda q: cmath.exp(-cmath.sqrt(q)) / q, lambda T: math.erfc(0.5 / math.sqrt(T))),
]


def _manual_bromwich(T: float) -> BromwichConfig:
    # Wide generic contour: all PAIRS transforms are analytic off the cut
    # and the poles at +-i stay left of the contour.
    sigma = max(1.0, 1.0 / T)
    omega = 0.5
    contour = SinhContour(sigma_l=sigma, b_l=sigma / (2.0 * math.sin(omega)), omega_l=omega)
    return BromwichConfig(contour=contour, plan=TrapezoidPlan(zeta=0.03, n_minus=0, n_plus=260))


@pytest.mark.parametrize("name,transform,exact", PAIRS)
@pytest.mark.parametrize("T", [0.25, 1.0, 5.0])
def test_sinh_bromwich_pairs(name, transform, exact, T):
    config = _manual_bromwich(T)
    val = sinh_bromwich_invert(transform, T, config)
    assert abs(val - exact(T)) <= 1e-13 * max(1.0, abs(exact(T)))


@pytest.mark.parametrize("name,transform,exact", PAIRS)
def test_gwr_pairs(name, transform, exact):
    T = 0.25
    res = gwr_invert(lambda q: float(np.real(transform(q))), T, GwrConfig(two_m=16))
    assert not res.degraded
    assert abs(res.value - exact(T)) <= 1e-6


@pytest.mark.parametrize("name,transform,exact", [p for p in PAIRS if p[0] != "sin"])
def test_gwr_pairs_t1(name, transform, exact):
    res = gwr_invert(lambda q: float(np.real(transform(q))), 1.0, GwrConfig(two_m=16))
    assert abs(res.value - exact(1.0)) <= 1e-5


@pytest.mark.parametrize("name,transform,exact", PAIRS)
def test_gaver_stehfest_pairs(name, transform, exact):
    T = 0.5
    val = gaver_stehfest(lambda q: float(np.real(transform(q))), T, m=8)
    assert abs(val - exact(T)) <= 1e-4


def test_gwr_shift_keeps_min_abscissa():
    seen = []

    def tr(q):
        seen.append(q)
        return 1.0 / q

    gwr_invert(tr, 10.0, GwrConfig(two_m=16))
    assert min(seen) >= 0.25 - 1e-12


def test_gwr_degraded_flag():
    res = gwr_invert(lambda q: 0.0, 1.0, GwrConfig(two_m=16))
    assert res.degraded
    assert res.value == 0.0


def test_choose_contour_inverts_within_eps():
    params = StableParams(1.2, 1.0, 1.0, 0.0)
    cone = admissible_cone(params, for_complex_q=True)
    for T in (0.25, 1.0):
        for eps in (1e-8, 1e-12):
            config = choose_contour(params, T, cone, eps)
            val = sinh_bromwich_invert(lambda q: 1.0 / (q + 1.0), T, config)
            assert abs(val - math.exp(-T)) <= eps
            tol = transform_tolerance(config, T, eps)
            assert 0.0 < tol < eps
