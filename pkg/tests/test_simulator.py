import numpy as np
import pytest

from pushasep import oracle, simulator
from pushasep.ring_model import ConfigurationError, RingParams, enumerate_states, local_from_global

P = RingParams(6, 3, 0.6)


def test_run_is_deterministic():
    a = simulator.run((0, 1, 3), 2.0, 7, P)
    b = simulator.run((0, 1, 3), 2.0, 7, P)
    assert a.events == b.events and a.final == b.final
    c = simulator.run((0, 1, 3), 2.0, 7, P, trial=1)
    assert c.events != a.events


def test_full_ring_does_not_move():
    tr = simulator.run((0, 1, 2), 5.0, 1, RingParams(3, 3))
    assert tr.events == [] and tr.final == (0, 1, 2) and tr.currents.global_q == 0


def test_zero_time():
    tr = simulator.run((0, 2), 0.0, 1, RingParams(5, 2))
    assert tr.final == (0, 2) and tr.events == []
    with pytest.raises(ConfigurationError):
        simulator.run((0, 2), -1.0, 1, RingParams(5, 2))


def test_event_kinds_and_currents():
    tr = simulator.run((0, 1, 3), 3.0, 11, P)
    assert tr.events
    for (_, kind, X), rec in zip(tr.events, tr.history):
        assert kind[0] in ("right", "push")
        assert rec.consistent()
        assert len(X) == 3 and list(X) == sorted(set(X))
    assert simulator.identity_violations(tr, P) == 0


def test_final_currents_match_identity():
    for trial in range(20):
        tr = simulator.run((0, 1, 3), 1.5, 3, P, trial=trial)
        for j in range(P.L):
            assert local_from_global(tr.final, tr.initial, tr.currents.global_q, j, P) == tr.currents.edge_q[j]


def test_totally_asymmetric_pushes_only_left():
    tr = simulator.run((0, 2), 2.0, 5, RingParams(5, 2, 0.0))
    assert all(k[0] == "push" for _, k, _ in tr.events)
    assert tr.currents.global_q <= 0


def test_worker_split_is_invisible():
    P2 = RingParams(5, 2, 0.7)
    a = simulator.empirical_transition((0, 2), 0.5, 400, 9, P2, workers=1)
    b = simulator.empirical_transition((0, 2), 0.5, 400, 9, P2, workers=2)
    assert a.rows == b.rows


def test_empirical_transition_agrees_with_oracle():
    P2 = RingParams(4, 2, 0.7)
    trials = 4000
    tab = simulator.empirical_transition((0, 1), 0.6, trials, 21, P2)
    exact = oracle.evolve_master((0, 1), 0.6, 1.0, P2).real
    S = enumerate_states(P2)
    for row in tab.rows:
        e = exact[S.index(tuple(row[0]))]
        se = np.sqrt(e * (1 - e) / trials)
        assert abs(row[1] - e) < 5 * se
    assert sum(r[1] for r in tab.rows) == pytest.approx(1)


def test_empirical_current_law():
    P2 = RingParams(4, 2, 0.7)
    law = simulator.empirical_current_law((0, 2), 0.5, 2000, 4, P2)
    assert sum(law.values()) == pytest.approx(1)
    f, se = simulator.empirical_current_cdf((0, 2), 0.5, 0, 2000, 4, P2)
    assert f == pytest.approx(sum(v for q, v in law.items() if q >= 0))
    exact = oracle.local_current_cdf_oracle((0, 2), 0.5, 0, P2)
    assert abs(f - exact) < 5 * np.sqrt(exact * (1 - exact) / 2000)
    with pytest.raises(ConfigurationError):
        simulator.empirical_current_law((0, 2), 0.5, 0, 4, P2)
