"""Event-driven Gillespie simulation of PushASEP on the ring.

Every particle carries a rate-``p`` right clock and a rate-``q`` left clock.
A right firing onto an occupied site is rejected; a left firing moves the
maximal occupied block ending at the particle one site to the left. The total
firing rate is therefore constant, ``N (p + q) = N``.

Trial ``i`` of a batch draws from ``SeedSequence(seed, spawn_key=(i,))``, so
results do not depend on trial order or on how trials are split across
workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .oracle import DistributionTable
from .ring_model import (
    Configuration,
    ConfigurationError,
    CurrentRecord,
    RingParams,
    enumerate_states,
    local_from_global,
    validate_configuration,
)


@dataclass
class Trajectory:
    """Accepted events ``(time, kind, configuration)`` and final currents.

    ``kind`` is ``("right", i)`` or ``("push", i, k)`` with ``i`` the 1-based
    label of the firing particle in the configuration before the event.
    """

    initial: Configuration
    events: list[tuple[float, tuple, Configuration]]
    final: Configuration
    currents: CurrentRecord
    seed: int
    history: list[CurrentRecord] = field(default_factory=list)


def _rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def _simulate(
    Y: Configuration,
    t_end: float,
    params: RingParams,
    rng: np.random.Generator,
    record: bool,
):
    L, N, p = params.L, params.N, params.p
    occ = np.zeros(L, dtype=bool)
    occ[list(Y)] = True
    edge = [0] * L
    glob = 0
    events = []
    history = []
    t = 0.0
    if N == L or t_end == 0:
        return tuple(Y), glob, edge, events, history
    while True:
        t += rng.exponential(1.0 / N)
        if t > t_end:
            break
        u = rng.random() * N
        i = int(u)
        sites = np.flatnonzero(occ)
        x = int(sites[i])
        if u - i < p:
            y = (x + 1) % L
            if occ[y]:
                continue
            occ[x], occ[y] = False, True
            edge[x] += 1
            glob += 1
            kind: tuple = ("right", i + 1)
        else:
            k = 1
            while occ[(x - k) % L]:
                k += 1
            for r in range(k):
                edge[(x - r - 1) % L] -= 1
            occ[x], occ[(x - k) % L] = False, True
            glob -= k
            kind = ("push", i + 1, k)
        if record:
            events.append((t, kind, tuple(int(s) for s in np.flatnonzero(occ))))
            history.append(CurrentRecord(glob, list(edge)))
    return tuple(int(s) for s in np.flatnonzero(occ)), glob, edge, events, history


def run(Y: Sequence[int], t_end: float, seed: int, params: RingParams, trial: int = 0) -> Trajectory:
    """One trajectory on ``[0, t_end]`` with the full event record."""
    Y = validate_configuration(Y, params.L, params.N)
    if t_end < 0:
        raise ConfigurationError("t_end must be nonnegative")
    final, glob, edge, events, history = _simulate(Y, t_end, params, _rng(seed, trial), True)
    return Trajectory(Y, events, final, CurrentRecord(glob, edge), seed, history)


def identity_violations(traj: Trajectory, params: RingParams) -> int:
    """Count (event, edge) pairs where the local/global current relation fails.

    Also counts events where the edge currents do not sum to the global one.
    """
    bad = 0
    for (_, _, X), rec in zip(traj.events, traj.history):
        if not rec.consistent():
            bad += 1
        for j in range(params.L):
            try:
                if local_from_global(X, traj.initial, rec.global_q, j, params) != rec.edge_q[j]:
                    bad += 1
            except ConfigurationError:
                bad += 1
    return bad


def _batch(args) -> list[tuple[Configuration, int]]:
    Y, t, params, seed, lo, hi = args
    out = []
    for i in range(lo, hi):
        final, _, edge, _, _ = _simulate(Y, t, params, _rng(seed, i), False)
        out.append((final, edge[params.L - 1]))
    return out


def _finals(Y, t, trials, seed, params, workers):
    Y = validate_configuration(Y, params.L, params.N)
    if trials < 1:
        raise ConfigurationError("trials must be at least 1")
    if t < 0:
        raise ConfigurationError("t must be nonnegative")
    workers = max(1, int(workers))
    if workers == 1:
        return _batch((Y, t, params, seed, 0, trials))
    bounds = np.linspace(0, trials, workers + 1).astype(int)
    jobs = [(Y, t, params, seed, int(a), int(b)) for a, b in zip(bounds, bounds[1:])]
    out = []
    with ProcessPoolExecutor(workers) as ex:
        for part in ex.map(_batch, jobs):
            out.extend(part)
    return out


def empirical_transition(
    Y: Sequence[int], t: float, trials: int, seed: int, params: RingParams, workers: int = 1
) -> DistributionTable:
    """Empirical law of ``X(t)`` with binomial standard errors per state."""
    finals = _finals(Y, t, trials, seed, params, workers)
    counts: dict[Configuration, int] = {}
    for X, _ in finals:
        counts[X] = counts.get(X, 0) + 1
    rows = []
    for X in enumerate_states(params):
        f = counts.get(X, 0) / trials
        rows.append([list(X), f, math.sqrt(f * (1 - f) / trials)])
    meta = {"method": "gillespie", "trials": trials, "seed": seed, "t": t, "Y": list(Y)}
    return DistributionTable(["X", "estimate", "stderr"], rows, meta)


def empirical_current_cdf(
    Y: Sequence[int], t: float, Q: int, trials: int, seed: int, params: RingParams, workers: int = 1
) -> tuple[float, float]:
    """Fraction of trials with ``Q_{L-1}(t) >= Q`` and its standard error."""
    finals = _finals(Y, t, trials, seed, params, workers)
    f = sum(1 for _, q in finals if q >= Q) / trials
    return f, math.sqrt(f * (1 - f) / trials)


def empirical_current_law(
    Y: Sequence[int], t: float, trials: int, seed: int, params: RingParams, workers: int = 1
) -> dict[int, float]:
    """Empirical PMF of ``Q_{L-1}(t)``; one batch serves every level ``Q``."""
    finals = _finals(Y, t, trials, seed, params, workers)
    counts: dict[int, int] = {}
    for _, q in finals:
        counts[q] = counts.get(q, 0) + 1
    return {q: c / trials for q, c in sorted(counts.items())}
