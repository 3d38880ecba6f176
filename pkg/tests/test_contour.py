import cmath
import math

import numpy as np
import pytest

from pushasep import contour, oracle
from pushasep.ring_model import ConfigurationError, RingParams, enumerate_states

P52 = RingParams(5, 2, 0.7)


def test_make_spec_defaults():
    spec = contour.make_spec(RingParams(5, 2))
    assert spec.variant == "Cond"
    assert spec.beta1 == pytest.approx(25 / 12)
    assert spec.beta2 == pytest.approx(3.75)
    assert spec.R_prime == pytest.approx(10 / 3)
    assert spec.R == pytest.approx((10 / 3) ** 1.5)
    assert spec.eps1 == pytest.approx(0.3 ** (25 / 12))


def test_make_spec_half_filling():
    spec = contour.make_spec(RingParams(4, 2))
    assert spec.variant == "CondPrime"
    assert spec.alpha1 < 2.0 ** (-1)
    need = (1 + spec.eps1) * (1 + spec.eps1) / spec.alpha1 ** 2
    assert need < spec.alpha0 ** 4


def test_make_spec_rejects_bad_exponent():
    with pytest.raises(ConfigurationError, match="beta1"):
        contour.make_spec(RingParams(5, 2), beta1=3.0)
    with pytest.raises(ConfigurationError):
        contour.make_spec(RingParams(5, 2), bogus=1.0)
    with pytest.raises(ConfigurationError):
        contour.make_spec(RingParams(6, 4))


def test_circle_quadrature_exact_for_laurent():
    f = lambda z: 3 + z ** 2 + 2 / z
    assert contour.circle_quadrature(0.0, 0.7, 16, f) == pytest.approx(3)
    g = lambda w: 1 / (w - 1)
    assert contour.circle_quadrature(1.0, 0.2, 64, g, measure="dz") == pytest.approx(1)
    with pytest.raises(ConfigurationError):
        contour.circle_quadrature(0.0, 1.0, 15, f)


def test_budget_validation():
    with pytest.raises(ConfigurationError):
        contour.QuadratureBudget(nodes_z=10)
    assert contour.QuadratureBudget().doubled().nodes_z == 128


def test_u0_closed_form():
    assert contour.u0(1.0, RingParams(6, 2)) == pytest.approx(1 / 15)
    S = enumerate_states(P52)
    with pytest.raises(ConfigurationError):
        contour.u0(1.0, P52, closed_form=False)
    v = contour.u0(1.0, P52, Y=S[0], X=S[3], t=0.3, closed_form=False)
    assert abs(v - 0.1) < 1e-6


@pytest.mark.parametrize("zeta", [1.0, cmath.exp(1j * math.pi / 5)])
def test_onefold_matches_oracle(zeta):
    S = enumerate_states(P52)
    U = oracle.propagator(0.8, zeta, P52)
    Y = S[2]
    for a, X in enumerate(S):
        assert abs(contour.gf_onefold(Y, X, zeta, 0.8, P52) - U[a, 2]) < 1e-8


def test_transition_table_matches_onefold():
    zeta = cmath.exp(0.4j)
    S = enumerate_states(P52)
    row = contour.transition_table(S[1], zeta, 0.5, P52)
    ref = [contour.gf_onefold(S[1], X, zeta, 0.5, P52) for X in S]
    assert np.max(np.abs(row - ref)) < 1e-12


def test_transition_sums_to_one():
    P = RingParams(6, 2, 0.4)
    row = contour.transition_table((0, 3), 1.0, 1.3, P)
    assert abs(np.sum(row) - 1) < 1e-8
    assert np.min(row.real) > -1e-10


def test_contour_independence():
    S = enumerate_states(P52)
    zeta = cmath.exp(1j * math.pi / 5)
    a = contour.make_spec(P52, 0.3)
    b = contour.make_spec(P52, 0.35)
    for X in S[:4]:
        va = contour.gf_onefold(S[0], X, zeta, 1.0, P52, spec=a)
        vb = contour.gf_onefold(S[0], X, zeta, 1.0, P52, spec=b)
        assert abs(va - vb) < 1e-8


def test_full_and_spectral_forms():
    zeta = cmath.exp(1j * math.pi / 5)
    S = enumerate_states(P52)
    K = contour.full_kernel(zeta, P52)
    terms = contour.spectral_terms(zeta, P52)
    U = oracle.propagator(0.5, zeta, P52)
    for a, X in enumerate(S[:5]):
        assert abs(contour.gf_full(S[0], X, zeta, 0.5, P52, kernel=K) - U[a, 0]) < 1e-6
        assert abs(contour.gf_spectral(S[0], X, zeta, 0.5, P52, terms=terms) - U[a, 0]) < 1e-8


def test_spectral_sum_is_one():
    P = RingParams(4, 1, 0.7)
    S = enumerate_states(P)
    total = sum(contour.gf_spectral(S[0], X, 1.0, 0.9, P) for X in S)
    assert abs(total - 1) < 1e-10


def test_full_rejects_many_particles():
    with pytest.raises(ConfigurationError):
        contour.gf_full((0, 2, 4, 6), (0, 2, 4, 6), 1.0, 0.1, RingParams(9, 4))
