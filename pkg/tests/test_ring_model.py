import numpy as np
import pytest

from pushasep.ring_model import (
    ConfigurationError,
    RingParams,
    apply_generator,
    enumerate_states,
    local_from_global,
    predecessor_push,
    predecessor_right,
    validate_configuration,
)


def test_enumerate_states_lexicographic():
    P = RingParams(4, 2)
    assert enumerate_states(P) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert enumerate_states(RingParams(3, 3)) == [(0, 1, 2)]
    assert len(enumerate_states(RingParams(5, 1))) == 5


@pytest.mark.parametrize("L,N,p", [(0, 0, 1.0), (3, 4, 1.0), (4, 2, 1.5), (4, 2, -0.1)])
def test_params_rejected(L, N, p):
    with pytest.raises(ConfigurationError):
        RingParams(L, N, p)


def test_q_and_density():
    P = RingParams(6, 2, 0.7)
    assert P.q == pytest.approx(0.3)
    assert P.rho == pytest.approx(1 / 3)
    assert P.n_states == 15


def test_validate_configuration():
    assert validate_configuration([0, 3], 4, 2) == (0, 3)
    for bad in ([1, 1], [2, 1], [0, 4]):
        with pytest.raises(ConfigurationError):
            validate_configuration(bad, 4, 2)


def test_predecessor_right():
    P = RingParams(4, 2)
    assert predecessor_right((0, 2), 1, P) == ((2, 3), True)
    assert predecessor_right((1, 3), 2, P) == ((1, 2), True)
    assert predecessor_right((1, 2), 2, P)[1] is False


def test_predecessor_push():
    P = RingParams(4, 2)
    assert predecessor_push((1, 2), 1, 2, P) == ((2, 3), True)
    assert predecessor_push((0, 3), 2, 2, P) == ((0, 1), True)
    assert predecessor_push((0, 2), 1, 2, P)[1] is False


@pytest.mark.parametrize("L,N,p", [(4, 2, 0.7), (5, 2, 1.0), (6, 3, 0.4)])
def test_generator_rows_vanish(L, N, p):
    P = RingParams(L, N, p)
    f = np.ones(P.n_states)
    assert np.max(np.abs(apply_generator(f, 1.0, P))) < 1e-14


def test_single_tasep_particle_is_cyclic_shift():
    P = RingParams(4, 1, 1.0)
    f = np.arange(4, dtype=complex)
    # mass at site x arrives from x - 1
    expected = np.roll(f, 1) - f
    assert np.allclose(apply_generator(f, 1.0, P), expected)


def test_local_from_global():
    P = RingParams(5, 2)
    assert all(local_from_global((0, 2), (0, 2), 0, j, P) == 0 for j in range(5))
    P1 = RingParams(5, 1)
    assert local_from_global((1,), (0,), 1, 4, P1) == 0
    assert local_from_global((1,), (0,), 1, 0, P1) == 1


def test_local_from_global_rejects_inconsistent_triple():
    with pytest.raises(ConfigurationError):
        local_from_global((1,), (0,), 0, 0, RingParams(5, 1))
