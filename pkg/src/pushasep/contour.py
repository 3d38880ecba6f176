"""Contour specifications, circle quadrature and the three transition formulas.

All ``z``-integrands depend on ``z`` only through ``s = z^L``; the average of
``F(z^L)`` over a ``z``-circle equals the average of ``F(s)`` over the
``s``-circle of radius ``|z|^L``, so quadrature runs in ``s``.

The ``zeta`` dependence of ``h`` and ``u`` collapses into the prefactor
``zeta^{sum(x) - sum(y)}``; every formula below computes the ``zeta``-free
integral and multiplies by it at the end.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import asdict, dataclass
from math import comb, inf
from typing import Callable, Sequence

import numpy as np

from .bethe import (
    BetheError,
    _perm_sign,
    coupled_roots,
    energy_shifted,
    lam_qprime,
    r_factor,
    roots_s,
)
from .ring_model import ConfigurationError, RingParams, enumerate_states, validate_configuration

log = logging.getLogger(__name__)


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class ContourSpec:
    eps_prime: float
    R_prime: float
    R: float
    eps1: float
    eps2: float
    beta: float
    beta1: float
    beta2: float
    variant: str = "Cond"
    alpha0: float = 1.0
    alpha1: float = 1.0

    def as_dict(self) -> dict:
        return asdict(self)

    def z_circles(self) -> list[tuple[float, int]]:
        """``(radius, orientation)`` of the ``z``-contour difference."""
        return [(self.R_prime, 1), (self.eps_prime, -1)]

    def w_circles(self) -> list[tuple[complex, float, int]]:
        """``(center, radius, orientation)`` of the ``w``-contour difference."""
        return [(0.0, self.R, 1), (0.0, self.eps1, -1), (1.0, self.eps2, -1)]


@dataclass(frozen=True)
class QuadratureBudget:
    nodes_z: int = 64
    nodes_w: int = 48
    rescale: bool = False

    def __post_init__(self) -> None:
        for n in (self.nodes_z, self.nodes_w):
            if n < 16 or n % 2:
                raise ConfigurationError(f"node counts must be even and >= 16, got {n}")

    def doubled(self) -> "QuadratureBudget":
        return QuadratureBudget(2 * self.nodes_z, 2 * self.nodes_w, self.rescale)


def _beta_bounds(params: RingParams) -> tuple[tuple[float, float], tuple[float, float]]:
    L, N = params.L, params.N
    b1 = (L / (L - N), L / N)
    b2 = (L / N, L / (N - 1) if N > 1 else inf)
    return b1, b2


def make_spec(params: RingParams, eps_prime: float = 0.3, **overrides) -> ContourSpec:
    """Contour radii satisfying Cond (``2N < L``) or Cond' (``2N = L``).

    Exponents default to ``beta = 1.5`` and the midpoints of the admissible
    intervals. With one particle ``beta2`` has no upper bound and defaults
    to ``d + 1``. Any field of :class:`ContourSpec` may be overridden; the
    result is validated and a violated inequality raises
    :class:`ConfigurationError` naming the clause.
    """
    params.require_contour_regime()
    L, N = params.L, params.N
    if not 0 < eps_prime < 1:
        raise ConfigurationError(f"eps_prime must lie in (0, 1), got {eps_prime}")
    (lo1, hi1), (lo2, hi2) = _beta_bounds(params)
    prime = 2 * N == L
    beta = overrides.pop("beta", 1.5)
    beta1 = overrides.pop("beta1", lo1 if prime else 0.5 * (lo1 + hi1))
    beta2 = overrides.pop("beta2", lo2 + 1.0 if hi2 == inf else 0.5 * (lo2 + hi2))
    if beta <= 1:
        raise ConfigurationError(f"Cond: beta > 1 violated (beta={beta})")
    if prime:
        if not lo1 <= beta1 <= hi1:
            raise ConfigurationError(f"Cond': {lo1} <= beta1 <= {hi1} violated (beta1={beta1})")
    elif not lo1 < beta1 < hi1:
        raise ConfigurationError(f"Cond: {lo1:.6g} < beta1 < {hi1:.6g} violated (beta1={beta1})")
    if not lo2 < beta2 < hi2:
        raise ConfigurationError(f"Cond: {lo2:.6g} < beta2 < {hi2:.6g} violated (beta2={beta2})")
    if prime:
        alpha1 = overrides.pop("alpha1", 0.5 * 2.0 ** (-N / (L - N)))
        if not alpha1 < 2.0 ** (-N / (L - N)):
            raise ConfigurationError(f"Cond': alpha1 < 2^(-N/(L-N)) violated (alpha1={alpha1})")
        eps1 = alpha1 * eps_prime ** beta1
        need = (1 + eps1) * (1 + eps1 ** (N - 1)) / alpha1 ** N
        alpha0 = overrides.pop("alpha0", 1.25 * need ** (1.0 / L))
        if not need < alpha0 ** L:
            raise ConfigurationError(
                "Cond': (1+eps1)(1+eps1^(N-1)) < alpha0^L alpha1^N violated"
            )
        R_prime = alpha0 / eps_prime
        variant = "CondPrime"
    else:
        alpha0 = alpha1 = 1.0
        eps1 = eps_prime ** beta1
        R_prime = 1.0 / eps_prime
        variant = "Cond"
    if overrides:
        raise ConfigurationError(f"unknown contour overrides: {sorted(overrides)}")
    return ContourSpec(
        eps_prime=eps_prime,
        R_prime=R_prime,
        R=R_prime ** beta,
        eps1=eps1,
        eps2=eps_prime ** beta2,
        beta=beta,
        beta1=beta1,
        beta2=beta2,
        variant=variant,
        alpha0=alpha0,
        alpha1=alpha1,
    )


def circle_nodes(center: complex, radius: float, M: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on a circle and trapezoid weights for the measure ``dz / (2 pi i z)``."""
    z = center + radius * np.exp(2j * np.pi * np.arange(M) / M)
    return z, (z - center) / z / M


def circle_quadrature(
    center: complex,
    radius: float,
    M: int,
    f: Callable[[np.ndarray], np.ndarray],
    measure: str = "dz/z",
) -> complex:
    """``(1/(2 pi i)) \\oint f(z) dz / z`` (or ``f(z) dz``) over a positive circle.

    Uses the periodic trapezoid rule on ``M`` equispaced nodes; for center 0
    and the ``dz/z`` measure this is the plain node average.
    """
    if M < 2 or M % 2:
        raise ConfigurationError("M must be even")
    z = center + radius * np.exp(2j * np.pi * np.arange(M) / M)
    if measure == "dz/z":
        w = (z - center) / z
    elif measure == "dz":
        w = z - center
    else:
        raise ConfigurationError(f"unknown measure {measure!r}")
    return complex(np.mean(np.asarray(f(z)) * w))


def zeta_prefactor(Y: Sequence[int], X: Sequence[int], zeta: complex) -> complex:
    return complex(zeta) ** (sum(X) - sum(Y))


def _is_root_of_unity(zeta: complex, L: int) -> bool:
    return abs(complex(zeta) ** L - 1) < 1e-12


def _ordered_tuples(L: int, N: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(L), N)), dtype=int).reshape(-1, N)


def bethe_det(lam: np.ndarray, X: Sequence[int], Y: Sequence[int]) -> np.ndarray:
    """``h_lambda(Y) u_lambda(X)`` at ``zeta = 1``, batched over leading axes.

    Equals ``det[(1 - 1/lambda_j)^{j-i} lambda_j^{y_j - x_i}]``.
    """
    N = lam.shape[-1]
    i = np.arange(N)[:, None]
    j = np.arange(N)[None, :]
    x = np.asarray(X)[:, None]
    y = np.asarray(Y)[None, :]
    lamj = lam[..., None, :]
    M = (1 - 1 / lamj) ** (j - i) * lamj ** (y - x)
    return np.linalg.det(M)


def _onefold_integrand(
    s: np.ndarray,
    Y: Sequence[int],
    X: Sequence[int],
    zeta: complex,
    t: float,
    params: RingParams,
    restrict_q1: bool = False,
) -> np.ndarray:
    """Sum over ordered tuples of distinct roots of ``h u e^{tE} / (p_z prod lambda q')``."""
    L, N = params.L, params.N
    lam = roots_s(s, L, N)  # (M, L)
    tuples = _ordered_tuples(L, N)
    c = (-1) ** N * complex(zeta) ** L
    if restrict_q1:
        # only tuples drawn from Q1(z); the Q1 set has exactly N members
        q1 = lam.real >= 1 - params.rho
        if not np.all(q1.sum(axis=1) == N):
            raise QuadratureError("root classification failed on the u0 contour")
        lam1 = np.stack([lam[m][q1[m]] for m in range(len(s))])
        perms = np.array(list(itertools.permutations(range(N))), dtype=int)
        lt = lam1[:, perms]  # (M, N!, N)
    else:
        lt = lam[:, tuples]  # (M, K, N)
    hu = bethe_det(lt, X, Y)
    E = np.sum(energy_shifted(lt, params), axis=-1)
    pz = 1 + c / s[:, None] * np.prod(1 - 1 / lt, axis=-1)
    lq = np.prod(lam_qprime(lt, params), axis=-1)
    return np.sum(hu * np.exp(t * E) / (pz * lq), axis=1)


def _s_circle(radius_z: float, M: int, L: int) -> np.ndarray:
    return radius_z ** L * np.exp(2j * np.pi * (np.arange(M) + 0.5) / M)


def u0(
    zeta: complex,
    params: RingParams,
    spec: ContourSpec | None = None,
    budget: QuadratureBudget | None = None,
    Y: Sequence[int] | None = None,
    X: Sequence[int] | None = None,
    t: float = 0.0,
    closed_form: bool = True,
) -> complex:
    """The ``u_0(zeta)`` term of the one-fold formula (``zeta``-free part).

    For ``zeta^L = 1`` and ``closed_form`` this is ``1 / C(L, N)``. Otherwise
    the alternative form is evaluated: a small-circle quadrature of the
    one-fold integrand restricted to tuples from ``Q1(z)``. That form needs
    ``Y``, ``X`` and ``t``.
    """
    L, N = params.L, params.N
    if closed_form and _is_root_of_unity(zeta, L):
        return 1.0 / comb(L, N)
    if Y is None or X is None:
        raise ConfigurationError("the quadrature form of u0 needs Y, X and t")
    spec = spec or make_spec(params)
    budget = budget or QuadratureBudget()
    Y = validate_configuration(Y, L, N)
    X = validate_configuration(X, L, N)
    s = _s_circle(spec.eps_prime, budget.nodes_z, L)
    vals = _onefold_integrand(s, Y, X, zeta, t, params, restrict_q1=True)
    return complex(np.mean(vals))


def gf_onefold(
    Y: Sequence[int],
    X: Sequence[int],
    zeta: complex,
    t: float,
    params: RingParams,
    spec: ContourSpec | None = None,
    budget: QuadratureBudget | None = None,
) -> complex:
    """``u_0(zeta)`` plus the one-fold ``z``-contour integral over Bethe-root tuples."""
    L, N = params.L, params.N
    Y = validate_configuration(Y, L, N)
    X = validate_configuration(X, L, N)
    spec = spec or make_spec(params)
    budget = budget or QuadratureBudget()
    total = 0j
    for radius, sign in spec.z_circles():
        s = _s_circle(radius, budget.nodes_z, L)
        total += sign * np.mean(_onefold_integrand(s, Y, X, zeta, t, params))
    base = u0(zeta, params, spec, budget, Y, X, t)
    return zeta_prefactor(Y, X, zeta) * (base + total)


def transition_table(
    Y: Sequence[int],
    zeta: complex,
    t: float,
    params: RingParams,
    spec: ContourSpec | None = None,
    budget: QuadratureBudget | None = None,
) -> np.ndarray:
    """:func:`gf_onefold` for every target ``X`` (lexicographic order) at once.

    Roots and the ``X``-free weights are shared; only the determinants are
    recomputed per target.
    """
    L, N = params.L, params.N
    Y = validate_configuration(Y, L, N)
    spec = spec or make_spec(params)
    budget = budget or QuadratureBudget()
    states = enumerate_states(params)
    tuples = _ordered_tuples(L, N)
    c = (-1) ** N * complex(zeta) ** L
    xs = np.array(states)
    total = np.zeros(len(states), dtype=complex)
    y = np.asarray(Y)
    perms = [(np.array(sig), _perm_sign(sig)) for sig in itertools.permutations(range(N))]
    for radius, sign in spec.z_circles():
        s = _s_circle(radius, budget.nodes_z, L)
        lt = roots_s(s, L, N)[:, tuples]
        E = np.sum(energy_shifted(lt, params), axis=-1)
        pz = 1 + c / s[:, None] * np.prod(1 - 1 / lt, axis=-1)
        lq = np.prod(lam_qprime(lt, params), axis=-1)
        weight = (np.exp(t * E) / (pz * lq) * sign / len(s)).reshape(-1)
        lam = lt.reshape(-1, N)
        # Leibniz expansion: the X dependence of each term is prod_i lambda_{sigma i}^{-x_i}
        powers = lam[:, :, None] ** (-np.arange(L))[None, None, :]
        for sig, sgn in perms:
            coef = sgn * np.prod((1 - 1 / lam[:, sig]) ** (sig - np.arange(N)) * lam[:, sig] ** y[sig], axis=1)
            G = np.ones((len(lam), len(xs)), dtype=complex)
            for i in range(N):
                G *= powers[:, sig[i], :][:, xs[:, i]]
            total += (weight * coef) @ G
    out = np.empty(len(states), dtype=complex)
    for a, X in enumerate(states):
        out[a] = zeta_prefactor(Y, X, zeta) * (u0(zeta, params, spec, budget, Y, X, t) + total[a])
    return out


def _w_nodes(spec: ContourSpec, M: int) -> tuple[np.ndarray, np.ndarray]:
    ws, wt = [], []
    for center, radius, sign in spec.w_circles():
        w, weight = circle_nodes(center, radius, M)
        ws.append(w)
        wt.append(sign * weight)
    return np.concatenate(ws), np.concatenate(wt)


def _full_kernel(
    zeta: complex, params: RingParams, spec: ContourSpec, budget: QuadratureBudget
) -> tuple[np.ndarray, np.ndarray]:
    """Grid of ``w``-tuples and the ``X, Y``-free weight summed over ``z``.

    Returns ``(W, K)`` where ``W`` has shape ``(G, N)`` and
    ``K[g] = sum_z weight_z weight_w / (p_z(W_g) prod q_z(W_g,i))``.
    """
    L, N = params.L, params.N
    w1, wt1 = _w_nodes(spec, budget.nodes_w)
    idx = np.array(list(itertools.product(range(len(w1)), repeat=N)), dtype=int)
    W = w1[idx]
    weight = np.prod(wt1[idx], axis=1)
    c = (-1) ** N * complex(zeta) ** L
    mprod = np.prod(1 - 1 / W, axis=1)
    # q_z(w) = 1 - s g(w) with g(w) = w^{-L} (1 - 1/w)^{-N}
    g1 = w1 ** (-L) * (1 - 1 / w1) ** (-N)
    K = np.zeros(len(W), dtype=complex)
    for radius, sign in spec.z_circles():
        s_nodes = _s_circle(radius, budget.nodes_z, L)
        for s in s_nodes:
            q1 = 1 - s * g1
            qprod = np.prod(q1[idx], axis=1)
            pz = 1 + c / s * mprod
            K += sign / budget.nodes_z / (pz * qprod)
    return W, K * weight


def gf_full(
    Y: Sequence[int],
    X: Sequence[int],
    zeta: complex,
    t: float,
    params: RingParams,
    spec: ContourSpec | None = None,
    budget: QuadratureBudget | None = None,
    kernel: tuple[np.ndarray, np.ndarray] | None = None,
) -> complex:
    """The ``(N+1)``-fold contour integral, by nested circle quadrature.

    ``kernel`` (from :func:`full_kernel`) can be shared across many
    ``(X, Y)`` pairs at fixed ``zeta``.
    """
    L, N = params.L, params.N
    if N > 3:
        raise ConfigurationError("full (N+1)-fold quadrature is limited to N <= 3")
    Y = validate_configuration(Y, L, N)
    X = validate_configuration(X, L, N)
    spec = spec or make_spec(params)
    budget = budget or QuadratureBudget()
    W, K = kernel if kernel is not None else _full_kernel(zeta, params, spec, budget)
    E = np.sum(energy_shifted(W, params), axis=1)
    val = np.sum(K * np.exp(t * E) * bethe_det(W, X, Y))
    return zeta_prefactor(Y, X, zeta) * complex(val)


def full_kernel(
    zeta: complex, params: RingParams, spec: ContourSpec | None = None, budget: QuadratureBudget | None = None
) -> tuple[np.ndarray, np.ndarray]:
    spec = spec or make_spec(params)
    return _full_kernel(zeta, params, spec, budget or QuadratureBudget())


@dataclass
class SpectralTerm:
    lambdas: np.ndarray
    energy: complex
    alpha: complex


def spectral_terms(zeta: complex, params: RingParams, rtol: float = 1e-8) -> list[SpectralTerm]:
    """Coupled Bethe sets with their energies and residue weights.

    The weight ``L / (r(lambda) prod lambda q'(lambda))`` is the residue of
    the one-fold integrand in ``s`` at a coupled root: the ``L`` values of
    ``z`` above one ``s`` each contribute ``alpha_lambda``.
    """
    L = params.L
    cr = coupled_roots(zeta, params)
    out = []
    for lam, E in zip(cr.tuples, cr.energies):
        r = r_factor(lam, params)
        if abs(r) < rtol:
            raise BetheError(f"|r(lambda)| = {abs(r):.3g}: degenerate zeta, spectral form undefined")
        alpha = L / (r * np.prod(lam_qprime(lam, params)))
        out.append(SpectralTerm(lam, E, complex(alpha)))
    return out


def gf_spectral(
    Y: Sequence[int],
    X: Sequence[int],
    zeta: complex,
    t: float,
    params: RingParams,
    terms: list[SpectralTerm] | None = None,
) -> complex:
    """Finite Bethe-eigenfunction expansion of the generating function."""
    L, N = params.L, params.N
    Y = validate_configuration(Y, L, N)
    X = validate_configuration(X, L, N)
    if terms is None:
        terms = spectral_terms(zeta, params)
    perms = np.array(list(itertools.permutations(range(N))), dtype=int)
    total = 1.0 / comb(L, N) if _is_root_of_unity(zeta, L) else 0.0
    for term in terms:
        lt = term.lambdas[perms]
        total += term.alpha * np.exp(t * term.energy) * np.sum(bethe_det(lt, X, Y))
    return zeta_prefactor(Y, X, zeta) * complex(total)
