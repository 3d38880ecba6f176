"""Brute-force ground truth from the finite master equation.

The joint generating function ``g(Y, X; zeta; t) = sum_q zeta^q P_Y(X(t)=X, Q(t)=q)``
solves ``d/dt g = H_zeta g`` with ``g(0) = 1(X = Y)``; here it is obtained from
a dense matrix exponential. Current laws follow by a discrete Fourier
transform over ``zeta`` on the unit circle.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import ceil, sqrt
from typing import Any, Sequence

import numpy as np
import scipy.linalg

from .ring_model import (
    ConfigurationError,
    RingParams,
    enumerate_states,
    local_from_global,
    transitions,
    validate_configuration,
)

log = logging.getLogger(__name__)

DEFAULT_STATE_CAP = 20_000


class OracleError(RuntimeError):
    pass


@dataclass
class DistributionTable:
    """Sampled PMF/CDF values plus the metadata needed to reproduce them."""

    columns: list[str]
    rows: list[list[Any]]
    meta: dict[str, Any] = field(default_factory=dict)

    def column(self, name: str) -> list[Any]:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]


def _check_cap(params: RingParams, cap: int) -> None:
    if params.n_states > cap:
        raise ConfigurationError(
            f"state space has {params.n_states} states, above the cap of {cap}"
        )


def build_generator(
    params: RingParams, zeta: complex = 1.0, cap: int = DEFAULT_STATE_CAP
) -> np.ndarray:
    """Dense matrix of ``H_zeta`` acting on functions of the target state."""
    _check_cap(params, cap)
    n = params.n_states
    H = np.zeros((n, n), dtype=complex)
    for a, b, rate, dq in transitions(params):
        H[a, b] += rate * zeta ** dq
        H[a, a] -= rate
    return H


def evolve_master(
    Y: Sequence[int],
    t: float,
    zeta: complex,
    params: RingParams,
    H: np.ndarray | None = None,
) -> np.ndarray:
    """``exp(t H_zeta)`` applied to the indicator of ``Y``."""
    if t < 0:
        raise ConfigurationError("t must be nonnegative")
    Y = validate_configuration(Y, params.L, params.N)
    states = enumerate_states(params)
    e = np.zeros(len(states), dtype=complex)
    e[states.index(Y)] = 1.0
    if t == 0:
        return e
    if H is None:
        H = build_generator(params, zeta)
    v = scipy.linalg.expm(t * H) @ e
    if not np.all(np.isfinite(v)):
        raise OracleError("matrix exponential returned non-finite values")
    return v


def propagator(t: float, zeta: complex, params: RingParams) -> np.ndarray:
    """Full matrix ``exp(t H_zeta)``; column ``b`` is the evolution of state ``b``."""
    if t == 0:
        return np.eye(params.n_states, dtype=complex)
    return scipy.linalg.expm(t * build_generator(params, zeta))


def _dft_size(width: int) -> int:
    m = 1
    while m < 2 * width + 8:
        m *= 2
    return m


def default_window(t: float, params: RingParams) -> tuple[int, int]:
    """Current window holding all but a negligible tail of the mass."""
    # jumps are at most Poisson(N t); each changes Q by +1 (right) or -k >= -N
    lam = params.N * t
    jumps = int(ceil(lam + 12 * sqrt(lam) + 30))
    lo = -params.N * jumps if params.q > 0 else 0
    hi = jumps if params.p > 0 else 0
    return lo, hi


def joint_current_pmf(
    Y: Sequence[int],
    t: float,
    q_window: tuple[int, int] | None,
    params: RingParams,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Joint PMF of ``(X(t), Q(t))`` on a current window.

    Returns ``(qs, pmf, tail)`` with ``pmf[x_index, k] = P(X(t)=X, Q(t)=qs[k])``
    and ``tail`` the mass that falls outside the window within one DFT period.
    """
    if q_window is None:
        q_window = default_window(t, params)
    qmin, qmax = q_window
    M = _dft_size(qmax - qmin + 1)
    Y = validate_configuration(Y, params.L, params.N)
    ks = np.arange(M)
    zetas = np.exp(2j * np.pi * ks / M)
    G = np.empty((params.n_states, M), dtype=complex)
    for m, z in enumerate(zetas):
        G[:, m] = evolve_master(Y, t, z, params)
    # coefficient of zeta^q for q = qmin + r, r = 0..M-1
    qs_full = qmin + np.arange(M)
    phase = np.exp(-2j * np.pi * np.outer(ks, qs_full) / M)
    P_full = (G @ phase).real / M
    inside = qs_full <= qmax
    tail = float(np.abs(P_full[:, ~inside]).sum())
    if tail > 1e-8:
        log.warning("current window %s leaves tail mass %.3g", q_window, tail)
    return qs_full[inside], P_full[:, inside], tail


def current_pmf(
    Y: Sequence[int],
    t: float,
    q_window: tuple[int, int] | None,
    params: RingParams,
) -> DistributionTable:
    """PMF of the global current ``Q(t)``."""
    qs, P, tail = joint_current_pmf(Y, t, q_window, params)
    rows = [[int(q), float(v)] for q, v in zip(qs, P.sum(axis=0))]
    return DistributionTable(
        ["q", "pmf"], rows, {"method": "oracle-dft", "tail_mass": tail, "t": t}
    )


def local_current_pmf(
    Y: Sequence[int], t: float, params: RingParams, q_window: tuple[int, int] | None = None
) -> dict[int, float]:
    """PMF of the local current ``Q_{L-1}(t)`` via the local/global relation."""
    Y = validate_configuration(Y, params.L, params.N)
    qs, P, _ = joint_current_pmf(Y, t, q_window, params)
    states = enumerate_states(params)
    law: dict[int, float] = {}
    for a, X in enumerate(states):
        for k, q in enumerate(qs):
            w = P[a, k]
            if abs(w) < 1e-300:
                continue
            # only q congruent to sum(X) - sum(Y) mod L can carry mass
            if (int(q) - sum(X) + sum(Y)) % params.L:
                continue
            j = local_from_global(X, Y, int(q), params.L - 1, params)
            law[j] = law.get(j, 0.0) + w
    return dict(sorted(law.items()))


def local_current_cdf_oracle(
    Y: Sequence[int], t: float, Q: int, params: RingParams
) -> float:
    """``P(Q_{L-1}(t) >= Q)``."""
    law = local_current_pmf(Y, t, params)
    return float(sum(v for j, v in law.items() if j >= Q))


def spectrum(
    zeta: complex, params: RingParams, vectors: bool = False
) -> np.ndarray | tuple[np.ndarray, np.ndarray]:
    """All eigenvalues of ``H_zeta`` (and right eigenvectors on request)."""
    H = build_generator(params, zeta)
    try:
        if vectors:
            return scipy.linalg.eig(H)
        return scipy.linalg.eigvals(H)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise OracleError(f"eigensolver failed: {exc}") from exc
