import cmath
import math

import numpy as np
import pytest
from scipy.special import iv

from pushasep import oracle
from pushasep.ring_model import RingParams, apply_generator, enumerate_states


def test_generator_matches_apply_generator():
    P = RingParams(4, 2, 0.7)
    z = cmath.exp(1j * math.pi / 5)
    H = oracle.build_generator(P, z)
    for b in range(P.n_states):
        e = np.zeros(P.n_states, dtype=complex)
        e[b] = 1
        assert np.allclose(H @ e, apply_generator(e, z, P), atol=1e-14)


def test_initial_condition():
    P = RingParams(5, 2, 0.7)
    v = oracle.evolve_master((0, 2), 0.0, 1.0, P)
    assert v[enumerate_states(P).index((0, 2))] == 1 and np.sum(np.abs(v)) == 1


def test_tasep_walker_poisson():
    P = RingParams(4, 1, 1.0)
    t = 1.3
    v = oracle.evolve_master((0,), t, 1.0, P).real
    for x in range(4):
        exact = math.exp(-t) * sum(t ** m / math.factorial(m) for m in range(x, 60, 4))
        assert v[x] == pytest.approx(exact, abs=1e-13)


def test_biased_walker_bessel():
    p, t = 0.7, 0.9
    P = RingParams(4, 1, p)
    q = 1 - p
    v = oracle.evolve_master((0,), t, 1.0, P).real
    for x in range(4):
        ms = [m for m in range(-60, 61) if (m - x) % 4 == 0]
        exact = math.exp(-t) * sum((p / q) ** (m / 2) * iv(m, 2 * math.sqrt(p * q) * t) for m in ms)
        assert v[x] == pytest.approx(exact, abs=1e-12)


def test_current_pmf_mean_single_tasep_particle():
    P = RingParams(5, 1, 1.0)
    tab = oracle.current_pmf((0,), 2.0, None, P)
    mean = sum(q * w for q, w in tab.rows)
    assert mean == pytest.approx(2.0, abs=1e-8)
    assert sum(w for _, w in tab.rows) == pytest.approx(1.0, abs=1e-10)


def test_current_pmf_at_zero_time():
    tab = oracle.current_pmf((0, 2), 0.0, None, RingParams(5, 2, 0.7))
    law = dict((q, w) for q, w in tab.rows)
    assert law[0] == pytest.approx(1.0)
    assert sum(abs(w) for q, w in law.items() if q != 0) < 1e-12


def test_local_cdf_basic():
    P = RingParams(4, 2, 1.0)
    assert oracle.local_current_cdf_oracle((0, 2), 0.0, 0, P) == pytest.approx(1.0)
    assert oracle.local_current_cdf_oracle((0, 2), 0.0, 1, P) == pytest.approx(0.0, abs=1e-14)
    vals = [oracle.local_current_cdf_oracle((0, 2), 0.5, Q, P) for Q in range(-2, 4)]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


def test_spectrum_circulant():
    P = RingParams(4, 1, 1.0)
    ev = oracle.spectrum(1.0, P)
    exact = np.exp(2j * np.pi * np.arange(4) / 4) - 1
    assert max(np.min(np.abs(ev - e)) for e in exact) < 1e-12
    assert max(np.min(np.abs(exact - e)) for e in ev) < 1e-12


def test_spectrum_stationary():
    ev = oracle.spectrum(1.0, RingParams(5, 2, 0.7))
    assert np.min(np.abs(ev)) < 1e-12
    assert np.all(ev.real < 1e-12)
