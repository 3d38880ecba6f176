import cmath
import itertools
import math

import numpy as np
import pytest

from pushasep import bethe, contour, current_laws as cl, oracle
from pushasep.ring_model import ConfigurationError, RingParams, enumerate_states


def test_colsum_det_is_multilinear():
    rng = np.random.default_rng(1)
    lam = rng.normal(size=3) + 1j * rng.normal(size=3) + 2
    entry = lambda i, j, w: w ** (i + 2 * j) / (w - 0.3 * i)  # noqa: E731
    N = 2
    brute = 0j
    for a, b in itertools.product(lam, repeat=2):
        w = np.array([a, b])
        M = np.array([[entry(i, j, w[j - 1]) for j in (1, 2)] for i in (1, 2)])
        brute += np.linalg.det(M)
    assert abs(cl.colsum_det(entry, lam, N) - brute) < 1e-10 * abs(brute)


def test_initial_conditions():
    P = RingParams(6, 2)
    assert cl.InitialCondition.flat(P, 1).resolved == (1, 4)
    assert cl.InitialCondition.step1(P, 2).resolved == (2, 3)
    ic = cl.InitialCondition.step2(P, 1)
    assert ic.resolved == (0, 5) and ic.m == 2
    with pytest.raises(ConfigurationError):
        cl.InitialCondition.flat(RingParams(5, 2))
    with pytest.raises(ConfigurationError):
        cl.InitialCondition.flat(P, 3)
    with pytest.raises(ConfigurationError):
        cl.InitialCondition.step1(P, 5)


def test_current_cdf_at_time_zero():
    P = RingParams(5, 2, 0.7)
    for Q in (-1, 0, 1):
        assert cl.current_cdf((0, 2), Q, 0.0, P) == pytest.approx(float(Q <= 0), abs=1e-10)


@pytest.mark.parametrize("p", [1.0, 0.6])
def test_current_cdf_matches_oracle(p):
    P = RingParams(5, 2, p)
    for Q in range(-2, 3):
        exact = oracle.local_current_cdf_oracle((0, 3), 1.2, Q, P)
        assert abs(cl.current_cdf((0, 3), Q, 1.2, P) - exact) < 1e-8


def test_current_cdf_alt_agrees():
    P = RingParams(4, 2, 0.7)
    for Q in (-2, 0, 2):
        a = cl.current_cdf((0, 1), Q, 1.0, P)
        assert abs(cl.current_cdf_alt((0, 1), Q, 1.0, P) - a) < 1e-9
    with pytest.raises(ConfigurationError):
        cl.current_cdf_alt((0, 1), 1, 1.0, P)


def test_current_cdf_radius_free():
    P = RingParams(6, 2, 0.8)
    a = cl.current_cdf((0, 3), 1, 0.7, P, r=0.3)
    b = cl.current_cdf((0, 3), 1, 0.7, P, r=0.9)
    assert abs(a - b) < 1e-9


def test_u_bl_initial_and_positive():
    P = RingParams(5, 2, 0.7)
    assert cl.u_bl((0, 2), (0, 2), 0.0, P) == pytest.approx(1, abs=1e-10)
    assert cl.u_bl((0, 2), (1, 3), 0.0, P) == pytest.approx(0, abs=1e-10)
    for X in ((0, 2), (1, 2), (-1, 4), (2, 3)):
        assert cl.u_bl((0, 2), X, 0.6, P) > -1e-10
    with pytest.raises(ConfigurationError):
        cl.u_bl((2, 0), (0, 2), 0.1, P)


def test_shifted_configuration():
    assert cl.shifted_configuration((0, 2), 0, 5) == (0, 2)
    assert cl.shifted_configuration((0, 2), 1, 5) == (-3, 0)
    assert cl.shifted_configuration((0, 2), 2, 5) == (-5, -3)
    assert cl.shifted_configuration((0, 2), -1, 5) == (2, 5)


def test_images_with_twist():
    P = RingParams(5, 2, 0.7)
    zeta = cmath.exp(1j * math.pi / 5)
    for X in enumerate_states(P)[:4]:
        v, tail = cl.images_sum((0, 2), X, zeta, 0.5, 5, P)
        assert abs(v - contour.gf_onefold((0, 2), X, zeta, 0.5, P)) < 1e-8
        assert tail < 1e-9


def test_qz_factors():
    P = RingParams(6, 2)
    z = 0.3 * cmath.exp(0.4j)
    rs = bethe.q_roots(z, P)
    w = 0.7 + 0.9j
    q0, q1 = cl.qz_factors(w, rs)
    assert q0 * q1 == pytest.approx(w ** 4 * (w - 1) ** 2 - z ** 6)
    dq = cl.qz1_derivative(rs)
    v = rs.Q1
    assert dq[0] == pytest.approx(v[0] - v[1])


def test_flat_cdf_radius_and_value():
    P = RingParams(6, 2, 0.7)
    rc = bethe.r0(P)
    a = cl.flat_cdf(1, 1.0, P, r=0.5 * rc)
    b = cl.flat_cdf(1, 1.0, P, r=0.7 * rc)
    assert abs(a - b) < 1e-8
    exact = cl.current_cdf((0, 3), 1, 1.0, P)
    assert abs(cl.flat_cdf(1, 1.0, P) - exact) < 1e-8
    with pytest.raises(ConfigurationError):
        cl.flat_cdf(1, 1.0, P, r=2 * rc)


def test_step_cases_coincide():
    P = RingParams(6, 2, 0.7)
    for Q in (0, 1):
        a = cl.step_cdf(2, 2, Q, 0.8, P)
        b = cl.step_cdf(1, 0, Q, 0.8, P)
        assert abs(a - b) < 1e-9
        assert abs(b - cl.current_cdf((0, 1), Q, 0.8, P)) < 1e-8
    with pytest.raises(ConfigurationError):
        cl.step_cdf(3, 0, 0, 0.8, P)


def test_restricted_constant():
    P = RingParams(6, 2, 0.7)
    for Q in (-1, 0, 1, 2):
        v = cl.restricted_current_constant((0, 3), Q, 0.4, P)
        assert abs(v - (-1) ** (3 * Q)) < 1e-8


def test_state_sum_identity():
    P = RingParams(5, 2)
    z = 0.3 * cmath.exp(0.2j)
    rs = bethe.q_roots(z, P)
    lam = rs.Q1
    lhs = cl.state_sum_lhs(lam, P)
    rhs = cl.state_sum_rhs(lam, z ** 5, P)
    assert abs(lhs - rhs) < 1e-8 * max(1, abs(rhs))
