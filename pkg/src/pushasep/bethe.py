"""Decoupled Bethe roots, Bethe functions, coupled roots and Fuss-Catalan series.

Conventions
-----------
Roots are always the *shifted* variables ``lambda = zeta * w`` in which the
first decoupled equation ``q_z(w) = 1 - z^L w^{-L} (1 - 1/w)^{-N}`` does not
involve ``zeta``. Its roots are those of ``w^{L-N} (w-1)^N = z^L`` and depend on
``z`` only through ``s = z^L``; most routines take ``s`` directly. The
coupling ``p_z(w; zeta) = 1 + (-1)^N zeta^L z^{-L} prod(1 - 1/w_i)`` is the only
place ``zeta`` enters.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Sequence

import numpy as np

from .ring_model import ConfigurationError, RingParams

log = logging.getLogger(__name__)


class BetheError(RuntimeError):
    pass


def r0(params: RingParams) -> float:
    """Critical modulus ``rho^rho (1-rho)^(1-rho)`` of ``z``."""
    rho = params.rho
    if rho >= 1:
        return 0.0
    return rho ** rho * (1 - rho) ** (1 - rho)


def _poly_coeffs(L: int, N: int) -> np.ndarray:
    """Coefficients (highest first) of ``w^{L-N} (w-1)^N``."""
    c = np.zeros(L + 1)
    for k in range(N + 1):
        c[L - (L - N + k)] += comb(N, k) * (-1) ** (N - k)
    return c


def roots_s(s: np.ndarray | complex, L: int, N: int, polish: int = 3) -> np.ndarray:
    """All ``L`` roots of ``w^{L-N}(w-1)^N = s`` for each ``s`` (batched).

    Companion-matrix eigenvalues (LAPACK balances internally) followed by
    guarded Newton steps. Returns shape ``s.shape + (L,)``.
    """
    s = np.asarray(s, dtype=complex)
    flat = s.reshape(-1)
    base = _poly_coeffs(L, N)
    C = np.zeros((flat.size, L, L), dtype=complex)
    C[:, 0, :] = -base[1:]
    C[:, 0, -1] += flat
    if L > 1:
        idx = np.arange(L - 1)
        C[:, idx + 1, idx] = 1.0
    w = np.linalg.eigvals(C)
    w = _newton_polish(w, flat[:, None], L, N, polish)
    return w.reshape(s.shape + (L,))


def _residual(w: np.ndarray, s: np.ndarray, L: int, N: int) -> np.ndarray:
    return w ** (L - N) * (w - 1) ** N - s


def _newton_polish(w: np.ndarray, s: np.ndarray, L: int, N: int, steps: int) -> np.ndarray:
    for _ in range(steps):
        f = _residual(w, s, L, N)
        df = w ** (L - N - 1) * (w - 1) ** (N - 1) * (L * w - (L - N))
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = w - f / df
        ok = np.isfinite(cand) & (np.abs(_residual(cand, s, L, N)) < np.abs(f))
        w = np.where(ok, cand, w)
    return w


def dlam_ds(lam: np.ndarray, s: complex | np.ndarray, L: int, N: int) -> np.ndarray:
    """Derivative of a root branch ``lambda(s)`` with respect to ``s``."""
    return lam * (lam - 1) / (s * (L * lam - (L - N)))


def lam_qprime(lam: np.ndarray, params: RingParams) -> np.ndarray:
    """``lambda q_z'(lambda) = (L lambda - (L-N)) / (lambda - 1)`` at a root."""
    L, N = params.L, params.N
    return (L * lam - (L - N)) / (lam - 1)


@dataclass
class BetheRootSet:
    """The ``L`` roots of ``q_z`` at fixed ``z`` with their classification.

    ``q0``/``q1`` index the roots with real part below/above ``1 - rho`` and
    are only filled when ``|z| < r0``. ``cycles[k]`` lists the roots with
    ``w^d (1 - 1/w) = z^d e^{2 pi i k / N}`` when ``L = d N``.
    """

    z: complex
    roots: np.ndarray
    q0: list[int] = field(default_factory=list)
    q1: list[int] = field(default_factory=list)
    cycles: list[list[int]] | None = None

    @property
    def Q0(self) -> np.ndarray:
        return self.roots[self.q0]

    @property
    def Q1(self) -> np.ndarray:
        return self.roots[self.q1]

    def pair_V(self, u_index: int) -> int:
        """Index of the unique ``v`` in ``Q1`` sharing the cycle of root ``u``."""
        if self.cycles is None:
            raise BetheError("cycle grouping needs L = d N")
        for group in self.cycles:
            if u_index in group:
                hits = [j for j in group if j in self.q1]
                if len(hits) != 1:
                    raise BetheError(f"cycle {group} holds {len(hits)} Q1 roots")
                return hits[0]
        raise BetheError(f"root {u_index} not found in any cycle")


def classify(roots: np.ndarray, params: RingParams) -> tuple[list[int], list[int]]:
    c = 1 - params.rho
    q0 = [k for k in range(len(roots)) if roots[k].real < c]
    q1 = [k for k in range(len(roots)) if roots[k].real >= c]
    return q0, q1


def q_roots(z: complex, params: RingParams, classify_roots: bool = True) -> BetheRootSet:
    """Roots of ``q_z``, split into ``Q0``/``Q1`` when ``|z| < r0``."""
    L, N = params.L, params.N
    z = complex(z)
    if z == 0:
        roots = np.array([0.0] * (L - N) + [1.0] * N, dtype=complex)
        rs = BetheRootSet(z, roots, list(range(L - N)), list(range(L - N, L)))
        return rs
    roots = roots_s(z ** L, L, N)
    rs = BetheRootSet(z, roots)
    if classify_roots:
        rc = r0(params)
        if abs(abs(z) - rc) <= 1e-12 * max(rc, 1.0):
            raise BetheError("|z| = r0: double root at 1 - rho, classification undefined")
        if abs(z) > rc:
            raise BetheError(f"classification requested for |z| = {abs(z):.6g} >= r0 = {rc:.6g}")
        rs.q0, rs.q1 = classify(roots, params)
        if len(rs.q1) != N:
            raise BetheError(f"expected {N} roots in Q1, found {len(rs.q1)}")
        if L % N == 0:
            rs.cycles = cycle_groups(roots, z, params)
    return rs


def cycle_groups(roots: np.ndarray, z: complex, params: RingParams) -> list[list[int]]:
    """Group roots by ``k`` with ``w^d (1 - 1/w) = z^d e^{2 pi i k/N}``."""
    L, N = params.L, params.N
    d = L // N
    ratio = roots ** d * (1 - 1 / roots) / z ** d
    ks = np.rint(N * np.angle(ratio) / (2 * np.pi)).astype(int) % N
    groups = [[int(j) for j in np.flatnonzero(ks == k)] for k in range(N)]
    if any(len(g) != d for g in groups):
        raise BetheError(f"cycle grouping failed: sizes {[len(g) for g in groups]}")
    return groups


def p_coupling_s(lambdas: np.ndarray, s: complex, zeta: complex, L: int) -> complex | np.ndarray:
    lambdas = np.asarray(lambdas, dtype=complex)
    if np.any(lambdas == 0):
        raise BetheError("p_z has a pole at lambda = 0")
    N = lambdas.shape[-1]
    return 1 + (-1) ** N * zeta ** L / s * np.prod(1 - 1 / lambdas, axis=-1)


def p_coupling(
    lambdas: Sequence[complex], z: complex, zeta: complex, params: RingParams
) -> complex:
    """``p_z(lambda; zeta) = 1 + (-1)^N zeta^L z^{-L} prod(1 - 1/lambda_i)``."""
    return complex(p_coupling_s(np.asarray(lambdas), complex(z) ** params.L, zeta, params.L))


def amplitude(ws: Sequence[complex], perm: Sequence[int]) -> complex:
    """``A_sigma = sign(sigma) prod_j (1 - 1/w_{sigma(j)})^{sigma(j) - j}`` (0-based perm)."""
    ws = np.asarray(ws, dtype=complex)
    sign = _perm_sign(perm)
    val = complex(sign)
    for j, sj in enumerate(perm):
        val *= (1 - 1 / ws[sj]) ** (sj - j)
    return val


def _perm_sign(perm: Sequence[int]) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def bethe_function(ws: Sequence[complex], X: Sequence[int], zeta: complex = 1.0) -> complex:
    """``u_w(X; zeta) = det[(1 - (zeta w_j)^{-1})^{j-i} w_j^{-x_i}]``."""
    ws = np.asarray(ws, dtype=complex)
    if np.any(ws == 0) or np.any(zeta * ws == 0):
        raise BetheError("Bethe function undefined at w = 0")
    n = len(ws)
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    base = 1 - 1 / (zeta * ws[None, :])
    if np.any((base == 0) & (j - i < 0)):
        raise BetheError("singular entry: zeta w_j = 1 with a negative power")
    M = base ** (j - i) * ws[None, :] ** (-np.asarray(X)[:, None])
    return complex(np.linalg.det(M))


def bethe_function_permsum(ws: Sequence[complex], X: Sequence[int], zeta: complex = 1.0) -> complex:
    """Permutation-sum form ``sum_sigma A_sigma(zeta w) prod w_{sigma(i)}^{-x_i}``."""
    ws = np.asarray(ws, dtype=complex)
    total = 0j
    for perm in itertools.permutations(range(len(ws))):
        term = amplitude(zeta * ws, perm)
        for i, si in enumerate(perm):
            term *= ws[si] ** (-X[i])
        total += term
    return total


def energy(ws: Sequence[complex], zeta: complex, params: RingParams) -> complex:
    """``E = sum(p zeta w_i + q / (zeta w_i) - 1)``."""
    ws = np.asarray(ws, dtype=complex)
    return complex(np.sum(params.p * zeta * ws + params.q / (zeta * ws) - 1))


def energy_shifted(lam: np.ndarray, params: RingParams) -> np.ndarray:
    """Single-root energy ``p lambda + q / lambda - 1`` in shifted variables."""
    return params.p * lam + params.q / lam - 1


# ---------------------------------------------------------------------------
# coupled roots


@dataclass
class BetheTuple:
    lambdas: np.ndarray
    z: complex
    zeta: complex
    energy: complex


@dataclass
class CoupledRoots:
    """Solutions of the coupled system, one entry per distinct ``s = z^L``."""

    zeta: complex
    s_values: list[complex]
    tuples: list[np.ndarray]
    energies: list[complex]
    stationary: bool
    count_argument: int

    def z_values(self, L: int) -> list[complex]:
        return [complex(s) ** (1.0 / L) for s in self.s_values]

    def as_tuples(self, params: RingParams) -> list[BetheTuple]:
        return [
            BetheTuple(lam, complex(s) ** (1.0 / params.L), self.zeta, E)
            for s, lam, E in zip(self.s_values, self.tuples, self.energies)
        ]


def _subset_products(mu: np.ndarray, subsets: list[tuple[int, ...]]) -> np.ndarray:
    return np.array([np.prod(mu[..., list(S)], axis=-1) for S in subsets])


def coupling_polynomial_values(s: np.ndarray, zeta: complex, params: RingParams) -> np.ndarray:
    """``P(s) = prod_S (s + (-1)^N zeta^L prod_{i in S} (1 - 1/lambda_i))``.

    The product runs over all ``N``-subsets of the roots at ``s``; it is
    symmetric in the roots, hence a polynomial in ``s`` of degree ``C(L, N)``.
    """
    L, N = params.L, params.N
    lam = roots_s(s, L, N)
    mu = 1 - 1 / lam
    c = (-1) ** N * zeta ** L
    subsets = list(itertools.combinations(range(L), N))
    prods = _subset_products(mu, subsets)
    return np.prod(np.asarray(s)[None, ...] + c * prods, axis=0)


def winding_count(values: np.ndarray) -> int:
    """Argument-principle count from samples of a function on a closed circle."""
    ph = np.unwrap(np.angle(np.append(values, values[0])))
    return int(np.rint((ph[-1] - ph[0]) / (2 * np.pi)))


def _polish_coupled(s0: complex, S: tuple[int, ...], zeta: complex, params: RingParams, iters: int = 80):
    from scipy.optimize import linear_sum_assignment

    L, N = params.L, params.N
    c = (-1) ** N * zeta ** L
    s = complex(s0)
    chosen = roots_s(s, L, N)[list(S)]
    for _ in range(iters):
        m = 1 - 1 / chosen
        f = s + c * np.prod(m)
        # d mu / ds = lambda^{-2} d lambda / ds
        dm = dlam_ds(chosen, s, L, N) / chosen ** 2
        df = 1 + c * np.prod(m) * np.sum(dm / m)
        step = f / df
        s_new = s - step
        lam_new = roots_s(s_new, L, N)
        # continue each chosen root to a distinct neighbour
        pred = chosen + dlam_ds(chosen, s, L, N) * (s_new - s)
        _, cols = linear_sum_assignment(np.abs(pred[:, None] - lam_new[None, :]))
        chosen = lam_new[cols]
        s = s_new
        if abs(step) <= 1e-15 * max(1.0, abs(s)):
            break
    m = 1 - 1 / chosen
    resid = abs(s + c * np.prod(m)) / max(1.0, abs(s))
    return s, chosen, resid


def _same_multiset(a: np.ndarray, b: np.ndarray, atol: float) -> bool:
    from scipy.optimize import linear_sum_assignment

    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return bool(cost[rows, cols].max() < atol)


def coupling_log_derivative(s: np.ndarray, zeta: complex, params: RingParams) -> np.ndarray:
    """``P'(s) / P(s)`` from the product form, accurate in double precision."""
    L, N = params.L, params.N
    s = np.asarray(s, dtype=complex)
    lam = roots_s(s, L, N)
    mu = 1 - 1 / lam
    dmu = dlam_ds(lam, s[..., None], L, N) / lam ** 2
    c = (-1) ** N * zeta ** L
    total = np.zeros(s.shape, dtype=complex)
    for S in itertools.combinations(range(L), N):
        idx = list(S)
        pr = c * np.prod(mu[..., idx], axis=-1)
        total += (1 + pr * np.sum(dmu[..., idx] / mu[..., idx], axis=-1)) / (s + pr)
    return total


def _aberth(start: np.ndarray, zeta: complex, params: RingParams, stationary: bool, iters: int = 500):
    """Simultaneous Aberth-Ehrlich iteration for all nonzero zeros of ``P``."""
    z = np.array(start, dtype=complex)
    active = np.ones(len(z), dtype=bool)
    for _ in range(iters):
        with np.errstate(divide="ignore", invalid="ignore"):
            ld = coupling_log_derivative(z[active], zeta, params)
            if stationary:
                ld = ld - 1 / z[active]
            # an infinite log-derivative means the iterate sits on a zero
            newton = np.where(np.isfinite(ld) & (ld != 0), 1 / ld, 0)
            diff = z[active][:, None] - z[None, :]
            inv = np.where(diff == 0, 0, 1 / diff)
            corr = newton / (1 - newton * inv.sum(axis=1))
        corr = np.where(np.isfinite(corr), corr, 0)
        idx = np.flatnonzero(active)
        z[idx] = z[idx] - corr
        done = np.abs(corr) <= 1e-14 * np.maximum(1.0, np.abs(z[idx]))
        active[idx[done]] = False
        if not active.any():
            break
    return z


def coupled_roots(zeta: complex, params: RingParams, tol: float = 1e-9) -> CoupledRoots:
    """All coupled Bethe tuples at ``zeta``.

    Zeros of the coupling polynomial ``P(s)`` are located by an Aberth
    iteration on its product form (seeded by roots of FFT-recovered
    coefficients), then each is polished by Newton's method on the subset
    factor that vanishes there. A zero shared by several subsets
    (a degenerate eigenvalue) yields one tuple per subset. ``count_argument``
    is the argument-principle count of zeros of ``P`` on a circle enclosing
    all of them.
    """
    L, N = params.L, params.N
    deg = comb(L, N)
    zeta = complex(zeta)
    if zeta == 0:
        raise ConfigurationError("zeta must be nonzero")
    stationary = abs(zeta ** L - 1) < 1e-12
    nodes = 8
    while nodes < 4 * deg + 16:
        nodes *= 2
    circle = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    coef = np.fft.fft(coupling_polynomial_values(circle, zeta, params)) / nodes
    poly = coef[: deg + 1][::-1]
    if stationary:
        # P(0) = 0 exactly; drop the stationary root analytically
        poly = poly[:-1]
    seeds = np.roots(poly)
    # keep seeds apart so the iteration does not start on a collision
    seeds = seeds + 1e-6 * np.exp(2j * np.pi * np.arange(len(seeds)) / max(len(seeds), 1) + 0.4j)
    zeros = _aberth(seeds, zeta, params, stationary)

    c = (-1) ** N * zeta ** L
    subsets = list(itertools.combinations(range(L), N))
    found: list[tuple[complex, np.ndarray]] = []
    for s0 in zeros:
        if not np.isfinite(s0) or abs(s0) < 1e-12:
            continue
        mu = 1 - 1 / roots_s(s0, L, N)
        vals = np.abs([s0 + c * np.prod(mu[list(S)]) for S in subsets])
        # degenerate zeros are reached by several seeds; try several subsets
        for k in np.argsort(vals)[:3]:
            s, lam, resid = _polish_coupled(s0, subsets[k], zeta, params)
            if resid > tol or abs(s) < 1e-12:
                continue
            gaps = np.abs(lam[:, None] - lam[None, :]) + np.eye(N)
            if gaps.min() < 1e-7:
                continue
            if any(
                abs(s - t) < 1e-7 * max(1.0, abs(s)) and _same_multiset(lam, m, 1e-7)
                for t, m in found
            ):
                continue
            found.append((s, lam))
    found_s = [s for s, _ in found]
    found_l = [lam for _, lam in found]
    big = 2 * max([1.0] + [abs(x) for x in found_s])
    ring = big * np.exp(2j * np.pi * np.arange(64 * deg) / (64 * deg))
    count = winding_count(coupling_polynomial_values(ring, zeta, params))
    expected = deg - (1 if stationary else 0)
    if len(found_s) != expected:
        log.warning("found %d coupled roots, expected %d", len(found_s), expected)
    energies = [complex(np.sum(energy_shifted(l, params))) for l in found_l]
    return CoupledRoots(zeta, found_s, found_l, energies, stationary, count)


def r_factor(lam: np.ndarray, params: RingParams) -> complex:
    """``r(lambda) = L - sum L / (L lambda_i - (L - N))``."""
    L, N = params.L, params.N
    return complex(L - np.sum(L / (L * lam - (L - N))))


# ---------------------------------------------------------------------------
# Fuss-Catalan toolkit


def fuss_catalan(p, r, m: int) -> Fraction:
    """``A_m(p, r) = (r / m!) prod_{i=1}^{m-1} (m p + r - i)`` with ``A_0 = 1``."""
    p, r = Fraction(p), Fraction(r)
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m == 0:
        return Fraction(1)
    val = Fraction(r, factorial(m))
    for i in range(1, m):
        val *= m * p + r - i
    return val


def fc_series(p, r, order: int) -> list[Fraction]:
    """Coefficients of ``B_{p,r}(z)`` up to ``z^order``."""
    return [fuss_catalan(p, r, m) for m in range(order + 1)]


def log_b_coefficients(d: int, order: int) -> list[Fraction]:
    """Coefficients of ``ln B_{d,1}(z)``: ``(1/(d n)) C(d n, n)`` for ``n >= 1``."""
    return [Fraction(comb(d * n, n), d * n) for n in range(1, order + 1)]


def phi_expansion(z: complex, eta: complex, M: int, params: RingParams) -> complex:
    """Truncated series ``1 - 1/lambda ~ -Z sum_{m<=M} A_m(d,d) Z^m``, ``Z = -eta z^d``."""
    d = Fraction(params.L, params.N)
    Z = -eta * complex(z) ** float(d)
    radius = float(params.rho * (1 - params.rho) ** (float(d) - 1))
    if abs(Z) >= radius:
        raise BetheError(f"|Z| = {abs(Z):.4g} outside the radius of convergence {radius:.4g}")
    coeffs = [float(a) for a in fc_series(d, d, M)]
    return -Z * np.polyval(coeffs[::-1], Z)


def psi_product(z: complex, params: RingParams, tol: float = 1e-17, kmax: int = 2000) -> complex:
    """``Psi(z) = prod_k phi(Z_k)`` via ``ln Psi = sum_k (-1)^{kN}/k C(kL, kN) z^{kL}``."""
    L, N = params.L, params.N
    rc = r0(params)
    if abs(z) >= rc:
        raise BetheError(f"|z| = {abs(z):.4g} outside the disk of radius r0 = {rc:.4g}")
    total = 0j
    zL = complex(z) ** L
    for k in range(1, kmax + 1):
        # log of C(kL, kN) keeps large k finite
        term = (-1) ** (k * N) / k * np.exp(_log_comb(k * L, k * N)) * zL ** k
        total += term
        if abs(term) < tol * max(1.0, abs(total)):
            break
    else:
        raise BetheError("psi_product series did not converge")
    return complex(np.exp(total))


def _log_comb(n: int, k: int) -> float:
    from math import lgamma

    return lgamma(n + 1) - lgamma(k + 1) - lgamma(n - k + 1)


def limit_ratio(z: complex, params: RingParams, pick: Sequence[int] | None = None) -> complex:
    """``prod_i (w_i - 1) / q_z(w_N)`` with ``w_1..w_{N-1}`` in ``Q1`` and ``w_N = mu``.

    ``mu`` solves the coupling equation at ``zeta = 1`` given the other ``N-1``
    roots. Its small-``z`` limit equals ``1 / (N C(L, N))``.
    """
    L, N = params.L, params.N
    rs = q_roots(z, params)
    Q1 = rs.Q1
    pick = list(range(N - 1)) if pick is None else list(pick)
    lam = Q1[pick]
    zL = complex(z) ** L
    prod = np.prod(1 - 1 / lam)
    mu_inv = 1 + (-1) ** N * zL / prod
    mu = 1 / mu_inv
    w = np.append(lam, mu)
    qz = 1 - zL * mu ** (-L) * (1 - 1 / mu) ** (-N)
    return complex(np.prod(w - 1) / qz)
