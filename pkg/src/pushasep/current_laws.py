"""Current distribution formulas, the winding-model function and Fredholm forms.

Every contour integral here has an integrand that depends on ``z`` only
through ``s = z^L`` (sums over all roots, or over ``Q0``/``Q1``, are symmetric
functions of the roots), so the quadrature runs on an ``s``-circle exactly as
in :mod:`pushasep.contour`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
import itertools
from typing import Callable, Sequence

import numpy as np

from .bethe import BetheError, BetheRootSet, energy_shifted, q_roots, r0, roots_s
from .contour import QuadratureBudget, QuadratureError, _s_circle
from .ring_model import ConfigurationError, RingParams, enumerate_states, validate_configuration

log = logging.getLogger(__name__)

IMAG_TOL = 1e-8


@dataclass(frozen=True)
class InitialCondition:
    """Named initial data resolved to a configuration.

    ``kind`` is one of ``flat`` (``d``, ``delta``), ``step1`` (shift ``m``),
    ``step2`` (``k``) or ``general`` (explicit ``Y``).
    """

    kind: str
    resolved: tuple[int, ...]
    d: int | None = None
    delta: int = 0
    m: int = 0
    k: int = 0

    @classmethod
    def flat(cls, params: RingParams, delta: int = 0) -> "InitialCondition":
        L, N = params.L, params.N
        if L % N:
            raise ConfigurationError(f"flat data needs L = d N, got L={L}, N={N}")
        d = L // N
        if not 0 <= delta < d:
            raise ConfigurationError(f"flat shift must satisfy 0 <= delta < d={d}, got {delta}")
        Y = tuple(j * d + delta for j in range(N))
        return cls("flat", Y, d=d, delta=delta)

    @classmethod
    def step1(cls, params: RingParams, m: int = 0) -> "InitialCondition":
        L, N = params.L, params.N
        if not 0 <= m <= L - N:
            raise ConfigurationError(f"step shift must satisfy 0 <= m <= L-N={L - N}, got {m}")
        return cls("step1", tuple(range(m, m + N)), m=m)

    @classmethod
    def step2(cls, params: RingParams, k: int) -> "InitialCondition":
        L, N = params.L, params.N
        if not 0 <= k <= N:
            raise ConfigurationError(f"step2 needs 0 <= k <= N={N}, got {k}")
        Y = tuple(range(k)) + tuple(range(L - N + k, L))
        d = L // N if L % N == 0 else None
        m = (N - k) * (d - 1) if d is not None else 0
        return cls("step2", Y, d=d, m=m, k=k)

    @classmethod
    def general(cls, params: RingParams, Y: Sequence[int]) -> "InitialCondition":
        return cls("general", validate_configuration(Y, params.L, params.N))


def _colsum_det(N: int, entry, lam: np.ndarray) -> np.ndarray:
    i = np.arange(1, N + 1)[:, None, None]
    j = np.arange(1, N + 1)[None, :, None]
    vals = entry(i, j, lam[..., None, None, :])
    M = np.sum(np.broadcast_to(vals, lam.shape[:-1] + (N, N, lam.shape[-1])), axis=-1)
    return np.linalg.det(M)


def colsum_det(entry, lam: np.ndarray, N: int) -> np.ndarray:
    """``det[sum_lambda entry(i, j, lambda)]_{i,j=1..N}``, batched over ``lam[..., :]``.

    ``entry(i, j, lam)`` gets 1-based index grids of shape ``(N, N, 1)`` and
    roots of shape ``(..., 1, 1, K)``. By multilinearity the result equals
    the sum of ``det[entry(i, j, lambda_j)]`` over all ``K^N`` root tuples.
    """
    return _colsum_det(N, entry, np.asarray(lam, dtype=complex))


def _real(value: complex, what: str, peak: float = 0.0, t: float = 0.0) -> float:
    """Real part, after checking the imaginary residue.

    ``peak`` is the largest integrand modulus; the tolerance grows with it
    because cancellation on small circles costs ``eps * peak`` absolutely.
    Root rounding is amplified by ``e^{t E}``, hence the factor in ``t``.
    """
    tol = max(IMAG_TOL, 1e4 * np.finfo(float).eps * peak) * max(1.0, t / 10)
    if abs(value.imag) > tol:
        raise QuadratureError(f"{what}: imaginary residue {value.imag:.3g} above {tol:.3g}")
    return float(value.real)


def _default_radius(params: RingParams, r: float | None) -> float:
    rc = r0(params)
    r = 0.9 * rc if r is None else float(r)
    if not 0 < r < rc:
        raise ConfigurationError(f"contour radius must lie in (0, r0={rc:.6g}), got {r}")
    return r


def _current_integrand(Y: np.ndarray, Q: int, t: float, params: RingParams, s: np.ndarray) -> np.ndarray:
    L, N = params.L, params.N
    lam = roots_s(s, L, N)

    def entry(i, j, w):
        return (1 - 1 / w) ** (Q + j - i) * w ** (Y[j - 1] + 1) * np.exp(
            t * energy_shifted(w, params)
        ) / (L * w - (L - N))

    return colsum_det(entry, lam, N) * s ** (-Q)


def _quiet_radius(Y: np.ndarray, Q: int, t: float, params: RingParams) -> float:
    """Radius (in ``z``) minimizing the peak integrand modulus on a coarse scan."""
    best, best_r = np.inf, 0.6 * r0(params)
    for f in np.geomspace(0.2, 8.0, 25):
        rz = f * r0(params)
        with np.errstate(all="ignore"):
            peak = np.max(np.abs(_current_integrand(Y, Q, t, params, _s_circle(rz, 32, params.L))))
        if np.isfinite(peak) and peak < best:
            best, best_r = peak, rz
    return best_r


def current_cdf(
    Y: Sequence[int],
    Q: int,
    t: float,
    params: RingParams,
    budget: QuadratureBudget | None = None,
    r: float | None = None,
) -> float:
    """``P(Q_{L-1}(t) >= Q)`` as a single contour integral over all Bethe roots.

    The column sums are symmetric in the roots and analytic in ``s`` away
    from ``0`` and infinity, so any radius ``r > 0`` gives the same value.
    By default the radius minimizing the peak of the integrand is used,
    which keeps cancellation small for large ``|Q|``.
    """
    L, N = params.L, params.N
    Y = np.asarray(validate_configuration(Y, L, N))
    if t < 0:
        raise ConfigurationError("t must be nonnegative")
    budget = budget or QuadratureBudget()
    if r is None:
        r = _quiet_radius(Y, Q, t, params)
    elif r <= 0:
        raise ConfigurationError(f"contour radius must be positive, got {r}")
    vals = _current_integrand(Y, Q, t, params, _s_circle(r, budget.nodes_z, L))
    return _real((-1) ** ((N + 1) * Q) * np.mean(vals), "current_cdf", float(np.max(np.abs(vals))), t)


def current_cdf_alt(
    Y: Sequence[int],
    Q: int,
    t: float,
    params: RingParams,
    budget: QuadratureBudget | None = None,
    r: float | None = None,
) -> float:
    """Alternative form of :func:`current_cdf`, valid when ``N`` divides ``Q``.

    Column by column it equals the integrand of :func:`current_cdf` after
    the Bethe equation trades ``(1 - 1/lambda)^Q`` for ``s^{Q/N} lambda^{-Q d}``,
    so the same radius freedom applies.
    """
    L, N = params.L, params.N
    if Q % N:
        raise ConfigurationError(f"the alternative form needs N | Q, got Q={Q}, N={N}")
    if L % N:
        raise ConfigurationError("the alternative form needs L = d N")
    Y = validate_configuration(Y, L, N)
    d = L // N
    budget = budget or QuadratureBudget()
    y = np.asarray(Y)
    if r is None:
        r = _quiet_radius(y, Q, t, params)
    s = _s_circle(r, budget.nodes_z, L)
    lam = roots_s(s, L, N)
    c = 1 - params.rho
    shift = Q * d

    def entry(i, j, w):
        yj = y[j - 1]
        return (1 - 1 / w) ** (j - i) * w ** (yj + 1 - shift) * np.exp(
            t * energy_shifted(w, params)
        ) / (L * (w - c))

    # (N + 1) Q is even whenever N | Q, so the sign of the first form drops out
    vals = colsum_det(entry, lam, N)
    return _real(np.mean(vals), "current_cdf_alt", float(np.max(np.abs(vals))), t)


# ---------------------------------------------------------------------------
# winding model and images


def u_bl(
    Y: Sequence[int],
    X: Sequence[int],
    t: float,
    params: RingParams,
    budget: QuadratureBudget | None = None,
    radius: float | None = None,
) -> float:
    """Winding-model transition function as a large-circle integral.

    ``Y`` and ``X`` are strictly increasing integer tuples, not reduced mod ``L``.
    Any circle ``|z| = radius > r0`` is valid; by default the one with the
    smallest peak integrand is taken, since ``w^{y - x}`` makes the nominal
    ``R'`` circle lose all digits once ``y - x`` is large.
    """
    L, N = params.L, params.N
    Y = np.asarray(Y, dtype=int)
    X = np.asarray(X, dtype=int)
    if Y.shape != (N,) or X.shape != (N,):
        raise ConfigurationError(f"u_bl needs two {N}-tuples")
    if np.any(np.diff(Y) <= 0) or np.any(np.diff(X) <= 0):
        raise ConfigurationError("u_bl tuples must be strictly increasing")
    budget = budget or QuadratureBudget()
    c = 1 - params.rho

    def entry(i, j, w):
        return (
            (1 - 1 / w) ** (j - i + 1)
            * w ** (Y[j - 1] - X[i - 1] + 1)
            * np.exp(t * energy_shifted(w, params))
            / (L * (w - c))
        )

    def integrand(rz, M):
        return colsum_det(entry, roots_s(_s_circle(rz, M, L), L, N), N)

    if radius is None:
        # all roots are simple outside r0, so every larger circle gives the
        # same value; the quietest one limits cancellation for distant images
        best = np.inf
        for rz in r0(params) * np.geomspace(1.05, 8.0, 20):
            with np.errstate(all="ignore"):
                peak = np.max(np.abs(integrand(rz, 32)))
            if np.isfinite(peak) and peak < best:
                best, radius = peak, rz
    elif radius <= r0(params):
        raise ConfigurationError(f"u_bl radius must exceed r0={r0(params):.6g}, got {radius}")
    vals = integrand(radius, budget.nodes_z)
    return _real(complex(np.mean(vals)), "u_bl", float(np.max(np.abs(vals))), t)


def shifted_configuration(Y: Sequence[int], m: int, L: int) -> tuple[int, ...]:
    """Periodic shift ``Y^m`` with ``m = N k + j``, ``0 <= j < N``."""
    N = len(Y)
    k, j = divmod(m, N)
    head = [Y[i] - (k + 1) * L for i in range(N - j, N)]
    tail = [Y[i] - k * L for i in range(N - j)]
    return tuple(head + tail)


def images_sum(
    Y: Sequence[int],
    X: Sequence[int],
    zeta: complex,
    t: float,
    M_trunc: int,
    params: RingParams,
    budget: QuadratureBudget | None = None,
) -> tuple[complex, float]:
    """Truncated image sum ``sum_{|m| <= M} u_bl(Y^m, X) zeta^{sum(x - y^m)}``.

    Returns ``(value, boundary_increment)``, the latter being the modulus of
    the two ``|m| = M`` terms.
    """
    L, N = params.L, params.N
    if M_trunc < 1:
        raise ConfigurationError("M_trunc must be >= 1")
    Y = validate_configuration(Y, L, N)
    X = validate_configuration(X, L, N)
    zeta = complex(zeta)
    total = 0j
    boundary = 0.0
    for m in range(-M_trunc, M_trunc + 1):
        Ym = shifted_configuration(Y, m, L)
        term = u_bl(Ym, X, t, params, budget) * zeta ** (sum(X) - sum(Ym))
        total += term
        if abs(m) == M_trunc:
            boundary += abs(term)
    if boundary > 1e-8:
        log.warning("image sum truncated at M=%d leaves boundary terms of size %.3g", M_trunc, boundary)
    return total, boundary


# ---------------------------------------------------------------------------
# finite Fredholm forms


def qz_factors(w: complex | np.ndarray, rootset: BetheRootSet) -> tuple[np.ndarray, np.ndarray]:
    """``(q_{z,0}(w), q_{z,1}(w))`` as products over ``Q0`` and ``Q1``."""
    if not rootset.q1:
        raise BetheError("root set is not classified")
    w = np.asarray(w, dtype=complex)
    q0 = np.prod(w[..., None] - rootset.Q0, axis=-1)
    q1 = np.prod(w[..., None] - rootset.Q1, axis=-1)
    return q0, q1


def qz1_derivative(rootset: BetheRootSet) -> np.ndarray:
    """``q_{z,1}'(v)`` at each ``v`` in ``Q1``."""
    v = rootset.Q1
    diff = v[:, None] - v[None, :]
    np.fill_diagonal(diff, 1.0)
    return np.prod(diff, axis=1)


def _rootsets(params: RingParams, r: float, M: int) -> tuple[np.ndarray, list[BetheRootSet]]:
    s = _s_circle(r, M, params.L)
    # any L-th root of s gives the same root set
    zs = np.abs(s) ** (1 / params.L) * np.exp(1j * np.angle(s) / params.L)
    return s, [q_roots(z, params) for z in zs]


def _principal_sqrt_product(values: np.ndarray) -> complex:
    """``prod sqrt(v)`` with principal branches, factor by factor."""
    return complex(np.prod(np.sqrt(values.astype(complex))))


def _sort_roots(w: np.ndarray) -> np.ndarray:
    return w[np.lexsort((np.abs(w), np.angle(w)))]


def flat_prefactor(rs: BetheRootSet, Q: int, t: float, delta: int, params: RingParams, form: str = "sqrt") -> complex:
    """``C_N`` for flat data at one root set.

    ``form="sqrt"`` uses principal square roots factor by factor;
    ``form="vandermonde"`` uses the branch-free ratio
    ``prod_{i<j} (psi(v_i) - psi(v_j)) / (v_i - v_j)`` with ``psi(v) = v^d (1 - 1/v)``.
    """
    L, N = params.L, params.N
    d = L // N
    c = 1 - params.rho
    U, V = _sort_roots(rs.Q0), _sort_roots(rs.Q1)
    base = np.prod((1 - U) ** (-Q)) * np.prod(np.exp(t * energy_shifted(V, params)))
    if form == "sqrt":
        pw = V ** (L - N - Q + delta - d / 2 + 1)
        num = np.prod(pw) * _principal_sqrt_product(1.0 / (d * (V - c)))
        den = _principal_sqrt_product((V[:, None] - U[None, :]).ravel())
        return complex(base * num / den)
    if form == "vandermonde":
        q0v = np.prod(V[:, None] - U[None, :], axis=1)
        psi = V ** d * (1 - 1 / V)
        ratio = 1.0 + 0j
        for a in range(N):
            for b in range(a + 1, N):
                ratio *= (psi[a] - psi[b]) / (V[a] - V[b])
        return complex(base * np.prod(V ** (L - N - Q + delta) / q0v) * ratio)
    raise ConfigurationError(f"unknown prefactor form {form!r}")


def _f_weights(rs: BetheRootSet, base: Callable[[np.ndarray], np.ndarray], power: int) -> tuple[np.ndarray, np.ndarray]:
    U, V = rs.Q0, rs.Q1
    _, q1u = qz_factors(U, rs)
    fu = base(U) * q1u ** power
    fv = base(V) * qz1_derivative(rs) ** power
    return fu, fv


def _flat_factors(rs: BetheRootSet, Q: int, t: float, delta: int, params: RingParams) -> tuple[np.ndarray, np.ndarray]:
    """``K = A P`` with ``A[u, v] = f(u) / ((u - v) f(v))`` and ``P[v, u'] = 1(V(u') = v)``."""
    N = params.N
    c = 1 - params.rho

    def base(w):
        return w ** (-N + 2 + delta) * (1 - 1 / w) ** (Q - N + 1) * np.exp(
            t * energy_shifted(w, params)
        ) / (w - c)

    fu, fv = _f_weights(rs, base, 1)
    U, V = rs.Q0, rs.Q1
    A = fu[:, None] / ((U[:, None] - V[None, :]) * fv[None, :])
    q1 = list(rs.q1)
    Pm = np.zeros((N, len(U)))
    for col, ui in enumerate(rs.q0):
        Pm[q1.index(rs.pair_V(ui)), col] = 1.0
    return A, Pm


def flat_kernel(rs: BetheRootSet, Q: int, t: float, delta: int, params: RingParams) -> np.ndarray:
    """``K(u, u') = f(u) / ((u - v') f(v'))`` on ``Q0`` with ``v' = V(u')``."""
    A, Pm = _flat_factors(rs, Q, t, delta, params)
    return A @ Pm


def _step_factors(rs: BetheRootSet, case: int, shift: int, Q: int, t: float, params: RingParams) -> tuple[np.ndarray, np.ndarray]:
    """``K = A B`` with ``A[u, v] = f(u) / (u - v)`` and ``B[v, u'] = 1 / (f(v) (u' - v))``."""
    N = params.N
    c = 1 - params.rho
    if case == 1:
        a, b = shift - N + 2, Q - N + 1
    elif case == 2:
        a, b = -2 * N + shift + 2, Q - 2 * N + shift + 1
    else:
        raise ConfigurationError(f"step case must be 1 or 2, got {case}")

    def base(w):
        return w ** a * (1 - 1 / w) ** b * np.exp(t * energy_shifted(w, params)) / (w - c)

    fu, fv = _f_weights(rs, base, 2)
    U, V = rs.Q0, rs.Q1
    A = fu[:, None] / (U[:, None] - V[None, :])
    B = 1.0 / (fv[:, None] * (U[None, :] - V[:, None]))
    return A, B


def step_kernel(rs: BetheRootSet, case: int, shift: int, Q: int, t: float, params: RingParams) -> np.ndarray:
    """``K(u, u') = sum_v f(u) / (f(v) (u - v)(u' - v))`` on ``Q0``.

    ``shift`` is ``m`` in case 1 and ``k`` in case 2.
    """
    A, B = _step_factors(rs, case, shift, Q, t, params)
    return A @ B


def fredholm_det(A: np.ndarray, B: np.ndarray) -> complex:
    """``det(I + A B)`` through the ``N x N`` form ``det(I + B A)``.

    Both finite kernels have rank ``N``; the small determinant avoids the
    cancellation of a near-singular ``(L-N) x (L-N)`` one.
    """
    return complex(np.linalg.det(np.eye(B.shape[0]) + B @ A))


def step_prefactor(rs: BetheRootSet, case: int, shift: int, Q: int, t: float, params: RingParams) -> complex:
    L, N = params.L, params.N
    U, V = rs.Q0, rs.Q1
    den = np.prod(V[:, None] - U[None, :])
    eV = np.prod(np.exp(t * energy_shifted(V, params)))
    if case == 1:
        return complex(np.prod(V ** (L - N + shift - Q)) * eV * np.prod((1 - U) ** (-Q)) / den)
    return complex(np.prod(V ** (L - N - Q)) * eV * np.prod((1 - U) ** (-Q + N - shift)) / den)


FREDHOLM_FACTORS = (0.8, 0.9, 0.95, 0.98)


def _flat_values(rs_list, Q, t, delta, params, check_branch):
    vals = np.empty(len(rs_list), dtype=complex)
    for n, rs in enumerate(rs_list):
        C = flat_prefactor(rs, Q, t, delta, params, "sqrt")
        if check_branch:
            Cv = flat_prefactor(rs, Q, t, delta, params, "vandermonde")
            if abs(C - Cv) > 1e-6 * max(1.0, abs(Cv)):
                raise QuadratureError(
                    f"flat prefactor branch mismatch at node {n}: {C:.6g} vs {Cv:.6g}"
                )
        vals[n] = C * fredholm_det(*_flat_factors(rs, Q, t, delta, params))
    return vals


def _step_values(rs_list, case, shift, Q, t, params):
    vals = np.empty(len(rs_list), dtype=complex)
    for n, rs in enumerate(rs_list):
        C = step_prefactor(rs, case, shift, Q, t, params)
        vals[n] = C * fredholm_det(*_step_factors(rs, case, shift, Q, t, params))
    return vals


def _fredholm_radius(params: RingParams, values: Callable) -> float:
    """Factor of ``r0`` whose coarse circle has the smallest peak integrand.

    The Fredholm integrands are analytic in ``0 < |z| < r0``; for large ``t``
    the cancellation on circles well inside ``r0`` is severe.
    """
    rc = r0(params)
    best, best_r = np.inf, 0.9 * rc
    for f in FREDHOLM_FACTORS:
        try:
            with np.errstate(all="ignore"):
                _, sets = _rootsets(params, f * rc, 24)
                peak = float(np.max(np.abs(values(sets))))
        except (BetheError, QuadratureError, np.linalg.LinAlgError):
            continue
        if np.isfinite(peak) and peak < best:
            best, best_r = peak, f * rc
    return best_r


def flat_cdf(
    Q: int,
    t: float,
    params: RingParams,
    delta: int = 0,
    r: float | None = None,
    budget: QuadratureBudget | None = None,
    check_branch: bool = True,
) -> float:
    """Flat-data CDF ``P(Q_{L-1}(t) >= Q)`` as a contour integral of ``C_N det(I + K)``.

    The prefactor uses principal square roots; with ``check_branch`` it is
    compared node by node with the branch-free Vandermonde form and a
    mismatch above ``1e-6`` raises :class:`QuadratureError`. Without ``r``
    the radius is picked by :func:`_fredholm_radius`.
    """
    L, N = params.L, params.N
    InitialCondition.flat(params, delta)
    if L // N < 2:
        raise ConfigurationError("flat formula needs d >= 2")
    budget = budget or QuadratureBudget()
    if r is None:
        r = _fredholm_radius(params, lambda sets: _flat_values(sets, Q, t, delta, params, False))
    _, sets = _rootsets(params, _default_radius(params, r), budget.nodes_z)
    vals = _flat_values(sets, Q, t, delta, params, check_branch)
    return _real(complex(np.mean(vals)), "flat_cdf", float(np.max(np.abs(vals))), t)


def step_cdf(
    case: int,
    shift: int,
    Q: int,
    t: float,
    params: RingParams,
    r: float | None = None,
    budget: QuadratureBudget | None = None,
) -> float:
    """Step-data CDF; ``shift`` is ``m`` (case 1) or ``k`` (case 2)."""
    if case == 1:
        InitialCondition.step1(params, shift)
    elif case == 2:
        InitialCondition.step2(params, shift)
    else:
        raise ConfigurationError(f"step case must be 1 or 2, got {case}")
    budget = budget or QuadratureBudget()
    if r is None:
        r = _fredholm_radius(params, lambda sets: _step_values(sets, case, shift, Q, t, params))
    _, sets = _rootsets(params, _default_radius(params, r), budget.nodes_z)
    vals = _step_values(sets, case, shift, Q, t, params)
    return _real(complex(np.mean(vals)), "step_cdf", float(np.max(np.abs(vals))), t)


# ---------------------------------------------------------------------------
# helper identities


def state_sum_lhs(lam: Sequence[complex], params: RingParams) -> complex:
    """``sum_X det[(1 - 1/lambda_j)^{-i} lambda_j^{-x_i}]`` over the ring state space."""
    lam = np.asarray(lam, dtype=complex)
    N = params.N
    i = np.arange(1, N + 1)[:, None]
    total = 0j
    for X in enumerate_states(params):
        x = np.asarray(X)[:, None]
        total += np.linalg.det((1 - 1 / lam[None, :]) ** (-i) * lam[None, :] ** (-x))
    return complex(total)


def state_sum_rhs(lam: Sequence[complex], s: complex, params: RingParams) -> complex:
    lam = np.asarray(lam, dtype=complex)
    N = params.N
    i = np.arange(1, N + 1)[:, None]
    V = np.linalg.det((1 - 1 / lam[None, :]) ** (-i - 1))
    return complex((1 + (-1) ** N / s * np.prod(1 - 1 / lam)) * V)


def restricted_current_constant(
    Y: Sequence[int], Q: int, t: float, params: RingParams, r: float | None = None, M: int = 64
) -> complex:
    """Small-circle integral of the ``Q1``-restricted current integrand.

    Its value is ``(-1)^{(N+1) Q}`` for every ``Q``.
    """
    L, N = params.L, params.N
    Y = validate_configuration(Y, L, N)
    s, sets = _rootsets(params, _default_radius(params, r), M)
    y = np.asarray(Y)
    vals = []
    for sv, rs in zip(s, sets):
        V = rs.Q1

        def entry(i, j, w):
            return (1 - 1 / w) ** (j - i - 1) * w ** (y[j - 1] + 1) * np.exp(
                t * energy_shifted(w, params)
            ) / (L * w - (L - N))

        # repeated columns give a zero determinant, so only orderings of Q1 remain
        tot = 0j
        for perm in itertools.permutations(range(N)):
            w = V[list(perm)]
            i = np.arange(1, N + 1)[:, None]
            j = np.arange(1, N + 1)[None, :]
            M_ = entry(i, j, w[None, :])
            tot += np.linalg.det(M_) * np.prod((1 - 1 / w) ** (Q + 1))
        vals.append(tot * sv ** (-Q))
    return complex(np.mean(vals))
