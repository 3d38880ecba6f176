"""Configurations, generator action and current bookkeeping for PushASEP on Z/LZ.

Particles sit on a ring of ``L`` sites. Each particle jumps one site to the
right at rate ``p`` provided the target is empty, and one site to the left at
rate ``q = 1 - p``; a left jump pushes the maximal occupied block sitting to
the left of the jumping particle by one site.

States are strictly increasing tuples of positions in ``{0, ..., L-1}`` and
are indexed in lexicographic order. The two "predecessor" maps return the
*source* configurations of the master equation, i.e. states from which a
single transition lands on ``X``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np

Configuration = tuple[int, ...]


class ConfigurationError(ValueError):
    """Raised when model parameters or configurations are inconsistent."""


@dataclass(frozen=True)
class RingParams:
    """Ring length ``L``, particle count ``N`` and right-jump rate ``p``.

    The left (push) rate is derived as ``q = 1 - p`` so that ``p + q = 1``
    holds exactly.
    """

    L: int
    N: int
    p: float = 1.0

    def __post_init__(self) -> None:
        if int(self.L) != self.L or int(self.N) != self.N:
            raise ConfigurationError("L and N must be integers")
        if self.L < 1:
            raise ConfigurationError(f"L must be positive, got {self.L}")
        if not 1 <= self.N <= self.L:
            raise ConfigurationError(f"need 1 <= N <= L, got N={self.N}, L={self.L}")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigurationError(f"p must lie in [0, 1], got {self.p}")

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def rho(self) -> float:
        return self.N / self.L

    @property
    def d(self) -> float:
        """Inverse density ``L / N``."""
        return self.L / self.N

    @property
    def n_states(self) -> int:
        return comb(self.L, self.N)

    def require_contour_regime(self) -> None:
        """The contour formulas need ``2N <= L``."""
        if 2 * self.N > self.L:
            raise ConfigurationError(
                f"contour formulas require 2N <= L, got L={self.L}, N={self.N}"
            )


@dataclass
class CurrentRecord:
    """Net global current and per-edge currents.

    ``edge_q[x]`` counts signed crossings of the edge ``(x, x+1 mod L)``.
    """

    global_q: int
    edge_q: list[int]

    def consistent(self) -> bool:
        return sum(self.edge_q) == self.global_q


def validate_configuration(X: Sequence[int], L: int, N: int | None = None) -> Configuration:
    X = tuple(int(x) for x in X)
    if N is not None and len(X) != N:
        raise ConfigurationError(f"expected {N} positions, got {len(X)}")
    if any(b <= a for a, b in zip(X, X[1:])):
        raise ConfigurationError(f"positions must be strictly increasing: {X}")
    if X and (X[0] < 0 or X[-1] > L - 1):
        raise ConfigurationError(f"positions must lie in [0, {L - 1}]: {X}")
    return X


def enumerate_states(params: RingParams) -> list[Configuration]:
    """All ``C(L, N)`` configurations in lexicographic order."""
    return list(itertools.combinations(range(params.L), params.N))


def state_index(params: RingParams) -> dict[Configuration, int]:
    return {X: k for k, X in enumerate(enumerate_states(params))}


def to_occupation(X: Sequence[int], L: int) -> np.ndarray:
    eta = np.zeros(L, dtype=bool)
    eta[list(X)] = True
    return eta


def from_occupation(eta: Sequence[bool]) -> Configuration:
    return tuple(int(i) for i in np.flatnonzero(np.asarray(eta, dtype=bool)))


def predecessor_right(X: Sequence[int], i: int, params: RingParams) -> tuple[Configuration, bool]:
    """Source state ``X^{i,-}``: particle ``i`` (1-based) moved one site left.

    From the returned state a right jump of that particle produces ``X``.
    When ``x_1 = 0`` and ``i = 1`` the particle wraps to ``L - 1`` and the
    labels rotate.
    """
    N, L = params.N, params.L
    if not 1 <= i <= N:
        raise IndexError(f"particle label {i} outside 1..{N}")
    X = tuple(X)
    k = i - 1
    if k == 0 and X[0] == 0:
        Y = X[1:] + (L - 1,)
        valid = N == 1 or X[-1] != L - 1
        return Y, valid
    Y = X[:k] + (X[k] - 1,) + X[k + 1:]
    valid = k == 0 or X[k - 1] != X[k] - 1
    return Y, valid


def predecessor_push(
    X: Sequence[int], i: int, k: int, params: RingParams
) -> tuple[Configuration, bool]:
    """Source state ``X^{i,+k}``: particles ``i, ..., i+k-1`` (cyclic) moved right.

    Valid when the block is contiguous on the ring, i.e. the distance
    ``d(x_{i+k-1}, x_i) = k - 1``, and the shifted block does not land on an
    occupied site. From the returned state the rightmost block particle jumps
    left and pushes the other ``k - 1``.
    """
    N, L = params.N, params.L
    if not 1 <= i <= N:
        raise IndexError(f"particle label {i} outside 1..{N}")
    if not 1 <= k <= N:
        raise IndexError(f"push length {k} outside 1..{N}")
    X = tuple(X)
    idx = [(i - 1 + r) % N for r in range(k)]
    # cyclic distance from x_i to x_{i+k-1}
    span = (X[idx[-1]] - X[idx[0]]) % L
    contiguous = span == k - 1 and (k < N or N < L)
    moved = set(idx)
    shifted = [(X[j] + 1) % L if j in moved else X[j] for j in range(N)]
    valid = contiguous and len(set(shifted)) == N
    return tuple(sorted(shifted)), valid


def transitions(params: RingParams) -> list[tuple[int, int, float, int]]:
    """Incoming transitions ``(target, source, rate, current increment)``.

    Right jumps carry rate ``p`` and current ``+1``; a push of a block of
    length ``k`` carries rate ``q`` and current ``-k``.
    """
    states = enumerate_states(params)
    index = {X: n for n, X in enumerate(states)}
    out: list[tuple[int, int, float, int]] = []
    for a, X in enumerate(states):
        for i in range(1, params.N + 1):
            if params.p > 0:
                Y, ok = predecessor_right(X, i, params)
                if ok:
                    out.append((a, index[Y], params.p, 1))
            if params.q > 0:
                for k in range(1, params.N + 1):
                    Y, ok = predecessor_push(X, i, k, params)
                    if ok:
                        out.append((a, index[Y], params.q, -k))
    return out


def apply_generator(f: np.ndarray, zeta: complex, params: RingParams) -> np.ndarray:
    """``H_zeta f`` for ``f`` indexed by :func:`enumerate_states`.

    Each incoming transition contributes ``rate * zeta**dQ * f(source)`` and
    the same rate, unweighted, to the diagonal loss term.
    """
    f = np.asarray(f, dtype=complex)
    out = np.zeros_like(f)
    for a, b, rate, dq in transitions(params):
        out[a] += rate * (zeta ** dq * f[b] - f[a])
    return out


def local_from_global(
    X: Sequence[int], Y: Sequence[int], Qglobal: int, j: int, params: RingParams
) -> int:
    """Local current on edge ``(j, j+1)`` from the global current.

    Uses ``Q_j = Q/L - (1/L) sum(x_i - y_i) - #{x_i <= j} + #{y_i <= j}``.
    """
    L = params.L
    if not 0 <= j <= L - 1:
        raise IndexError(f"edge index {j} outside 0..{L - 1}")
    val = (
        Fraction(Qglobal - sum(X) + sum(Y), L)
        - sum(1 for x in X if x <= j)
        + sum(1 for y in Y if y <= j)
    )
    if val.denominator != 1:
        raise ConfigurationError(
            f"inconsistent (X, Y, Q) triple: local current {val} is not an integer"
        )
    return int(val)
