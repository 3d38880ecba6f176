"""Relaxation-scale limit laws F1 (flat) and F2 (step) and the scaling maps.

The path integral inside the exponent is evaluated in closed form from
``Li_{1/2}(e^{-w^2/2}) = sum_k e^{-k w^2/2} / sqrt(k)`` and

    int_{-inf}^{xi} e^{-k w^2/2} dw = sqrt(pi / (2k)) erfc(-xi sqrt(k/2)),

so the integral equals ``sqrt(pi/2) sum_k erfcx(-xi sqrt(k/2)) z^k / k`` with
``z = e^{-xi^2/2}``. The series converges geometrically for ``|z| < 1``.
A direct quadrature along the path is kept for cross-checks.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate, special

from .current_laws import InitialCondition, current_cdf
from .ring_model import ConfigurationError, RingParams

log = logging.getLogger(__name__)

SERIES_RADIUS = 0.98
RZ_CANDIDATES = (0.5, 0.7, 0.85, 0.93)
SQRT2PI = math.sqrt(2 * math.pi)


class LimitError(RuntimeError):
    pass


@dataclass(frozen=True)
class LimitParams:
    """Truncation and contour settings for F1/F2.

    ``rz=None`` picks the outer radius from a small candidate set by the
    smallest peak integrand modulus; the value is analytic in ``|z| < 1``,
    so only rounding depends on the choice.
    """

    K: int = 24
    Mz: int = 64
    rz: float | None = None

    def __post_init__(self) -> None:
        if self.K < 8:
            raise ConfigurationError(f"K must be >= 8, got {self.K}")
        if self.Mz < 8:
            raise ConfigurationError(f"Mz must be >= 8, got {self.Mz}")
        if self.rz is not None and not 0 < self.rz < 1:
            raise ConfigurationError(f"rz must lie in (0, 1), got {self.rz}")


@dataclass(frozen=True)
class ScalingConstants:
    v: float
    r: float
    vshock: float

    @classmethod
    def of(cls, rho: float, p: float, q: float) -> "ScalingConstants":
        return cls(
            v=rho * (p * (1 - rho) - q / (1 - rho)),
            r=p + q / (1 - rho) ** 3,
            vshock=p * (1 - 2 * rho) - q / (1 - rho) ** 2,
        )


# ---------------------------------------------------------------------------
# special functions


def _on_cut(z: complex) -> bool:
    return z.imag == 0 and z.real >= 1


def polylog(s: float, z, tol: float = 1e-15):
    """``Li_s(z)`` for ``s`` in ``{1/2, 3/2, 5/2}`` (any real ``s`` works).

    Direct series for ``|z| <= 0.98`` with the term count set by the largest
    modulus, mpmath's analytic continuation elsewhere. Accepts scalars or arrays.
    """
    z_arr = np.asarray(z, dtype=complex)
    out = np.empty(z_arr.shape, dtype=complex)
    flat_in, flat_out = z_arr.reshape(-1), out.reshape(-1)
    small = np.abs(flat_in) <= SERIES_RADIUS
    if np.any(small):
        zs = flat_in[small]
        n = _series_terms(float(np.max(np.abs(zs))), tol)
        k = np.arange(1, n + 1)
        flat_out[small] = np.sum(zs[:, None] ** k / k ** s, axis=1)
    for idx in np.flatnonzero(~small):
        zc = complex(flat_in[idx])
        if _on_cut(zc):
            raise LimitError(f"Li_s is evaluated on its branch cut [1, inf) at z={zc}")
        flat_out[idx] = complex(mpmath.polylog(s, zc))
    return out if out.ndim else complex(out)


def _series_terms(zmax: float, tol: float) -> int:
    """Terms needed for ``|z|^n < tol``."""
    if zmax <= 0:
        return 2
    return max(4, int(math.log(tol) / math.log(zmax)) + 4)


def _li_half_square_coeffs(n: int) -> np.ndarray:
    """Coefficients ``c_m`` of ``Li_{1/2}(y)^2 = sum_m c_m y^m`` for ``m < n``."""
    k = np.arange(1, n)
    c = np.zeros(n)
    inv = 1 / np.sqrt(k)
    c[2:] = np.convolve(inv, inv)[: n - 2]
    return c


def b_function(z, tol: float = 1e-15):
    """``B(z) = (1/4 pi) int_0^z Li_{1/2}(y)^2 / y dy``.

    Termwise integration of the power series for ``|z| <= 0.98``; a straight
    segment Gauss-Legendre quadrature from ``0.5 z / |z|`` outward otherwise.
    """
    z_arr = np.asarray(z, dtype=complex)
    inside = np.abs(z_arr)[np.abs(z_arr) <= SERIES_RADIUS]
    n = _series_terms(float(inside.max()) if inside.size else 0.5, tol)
    c = _li_half_square_coeffs(n)
    m = np.arange(n)
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(m > 0, c / np.maximum(m, 1), 0.0)

    def series(x):
        return np.sum(w * x[..., None] ** m, axis=-1) / (4 * math.pi)

    out = np.asarray(series(z_arr), dtype=complex)
    big = np.abs(z_arr) > SERIES_RADIUS
    if np.any(big):
        xg, wg = np.polynomial.legendre.leggauss(64)
        flat_z, flat_o = z_arr.reshape(-1), out.reshape(-1)
        for idx in np.flatnonzero(big.reshape(-1)):
            zc = complex(flat_z[idx])
            if _on_cut(zc):
                raise LimitError(f"B is evaluated on its branch cut at z={zc}")
            a = 0.5 * zc / abs(zc)
            y = a + (zc - a) * (xg + 1) / 2
            f = polylog(0.5, y) ** 2 / y
            flat_o[idx] = series(np.asarray(a)) + np.sum(wg * f) * (zc - a) / 2 / (4 * math.pi)
    return out if out.ndim else complex(out)


def aux_functions(z) -> tuple:
    """``(A1, A2, A3, B)`` at ``z``."""
    A1 = -polylog(1.5, z) / SQRT2PI
    A2 = -polylog(2.5, z) / SQRT2PI
    A3 = -0.25 * np.log(1 - np.asarray(z, dtype=complex))
    return A1, A2, A3, b_function(z)


def s_minus(z: complex, K: int) -> np.ndarray:
    """``xi_k = -sqrt(-2 Log z + 4 pi i k)`` for ``k = -K..K``, all with ``Re xi < 0``.

    The principal square root has positive real part, so the sign flip
    lands every element in the left half-plane; one Newton step on
    ``e^{-xi^2/2} = z`` polishes the result.
    """
    z = complex(z)
    if not 0 < abs(z) < 1:
        raise ConfigurationError(f"s_minus needs 0 < |z| < 1, got |z|={abs(z)}")
    k = np.arange(-K, K + 1)
    xi = -np.sqrt(-2 * np.log(z) + 4j * np.pi * k)
    # Newton on g(xi) = -xi^2/2 - (Log z - 2 pi i k)
    target = np.log(z) - 2j * np.pi * k
    xi = xi - (-(xi ** 2) / 2 - target) / (-xi)
    return xi


def _check_sector(xi: np.ndarray) -> None:
    ang = np.abs(np.angle(-np.asarray(xi)))
    if np.any(ang >= np.pi / 4):
        raise LimitError("xi outside the sector arg in (3 pi/4, 5 pi/4)")


def path_integral(xi, tol: float = 1e-16, kmax: int = 20000):
    """``int_{-inf}^{xi} Li_{1/2}(e^{-w^2/2}) dw`` by the erfcx series."""
    xi = np.asarray(xi, dtype=complex)
    _check_sector(xi)
    z = np.exp(-(xi ** 2) / 2)
    zmax = float(np.max(np.abs(z))) if z.size else 0.0
    if zmax >= 1:
        raise LimitError("path integral series needs |e^{-xi^2/2}| < 1")
    n = kmax if zmax == 0 else min(kmax, int(math.log(tol) / math.log(max(zmax, 1e-300))) + 4)
    n = max(n, 4)
    k = np.arange(1, n + 1)
    arg = -xi[..., None] * np.sqrt(k / 2)
    terms = special.erfcx(arg) * z[..., None] ** k / k
    return math.sqrt(math.pi / 2) * np.sum(terms, axis=-1)


def path_integral_quad(xi: complex) -> complex:
    """Quadrature along ``(-inf, Re xi]`` then the vertical segment to ``xi``."""
    xi = complex(xi)
    _check_sector(np.array([xi]))
    a = xi.real

    def li(w):
        return complex(mpmath.polylog(0.5, mpmath.exp(-w * w / 2)))

    re1 = integrate.quad(lambda u: li(u).real, -np.inf, a, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    im1 = integrate.quad(lambda u: li(u).imag, -np.inf, a, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    b = xi.imag
    re2 = integrate.quad(lambda v: (1j * li(a + 1j * v)).real, 0, b, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    im2 = integrate.quad(lambda v: (1j * li(a + 1j * v)).imag, 0, b, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    return complex(re1 + re2, im1 + im2)


def psi_exponent(xi, x: float, tau: float, which: str = "flat"):
    """``-(tau/3) xi^3 + x xi - c int_{-inf}^{xi} Li_{1/2}(e^{-w^2/2}) dw``.

    ``c = 1/sqrt(2 pi)`` for flat data and twice that for step data.
    """
    if which == "flat":
        c = 1 / SQRT2PI
    elif which == "step":
        c = 2 / SQRT2PI
    else:
        raise ConfigurationError(f"which must be 'flat' or 'step', got {which!r}")
    xi = np.asarray(xi, dtype=complex)
    return -(tau / 3) * xi ** 3 + x * xi - c * path_integral(xi)


# ---------------------------------------------------------------------------
# limit laws


def flat_kernel(z: complex, x: float, tau: float, K: int) -> np.ndarray:
    xi = s_minus(z, K)
    e = np.exp(psi_exponent(xi, x, tau, "flat"))
    return e[:, None] * e[None, :] / (xi[:, None] * (xi[:, None] + xi[None, :]))


def step_kernel(z: complex, x: float, tau: float, gamma: float, K: int) -> np.ndarray:
    xi = s_minus(z, K)
    phi = psi_exponent(xi, x, tau, "step")
    # A[xi1, eta] B[eta, xi2] with the eta sum as a matrix product
    A = np.exp(phi[:, None] + phi[None, :] + gamma / 2 * (xi[:, None] ** 2 - xi[None, :] ** 2)) / (
        xi[:, None] * xi[None, :] * (xi[:, None] + xi[None, :])
    )
    B = 1.0 / (xi[:, None] + xi[None, :])
    return A @ B


def _z_nodes(rz: float, Mz: int) -> np.ndarray:
    return rz * np.exp(2j * np.pi * (np.arange(Mz) + 0.5) / Mz)


def _integrand(kind: str, zs: np.ndarray, x: float, tau: float, gamma: float, K: int) -> np.ndarray:
    A1, A2, A3, B = aux_functions(zs)
    eye = np.eye(2 * K + 1)
    if kind == "flat":
        dets = np.array([np.linalg.det(eye - flat_kernel(z, x, tau, K)) for z in zs])
        return np.exp(x * A1 + tau * A2 + A3 + B) * dets
    dets = np.array([np.linalg.det(eye - step_kernel(z, x, tau, gamma, K)) for z in zs])
    return np.exp(x * A1 + tau * A2 + 2 * B) * dets


def _limit_value(kind: str, x: float, tau: float, gamma: float, lp: LimitParams) -> float:
    if tau <= 0:
        raise ConfigurationError("tau must be positive")
    rz = lp.rz
    if rz is None:
        coarse = max(8, lp.Mz // 4)
        peaks = [
            np.max(np.abs(_integrand(kind, _z_nodes(c, coarse), x, tau, gamma, lp.K))) for c in RZ_CANDIDATES
        ]
        rz = RZ_CANDIDATES[int(np.argmin(peaks))]
    vals = _integrand(kind, _z_nodes(rz, lp.Mz), x, tau, gamma, lp.K)
    v = complex(np.mean(vals))
    peak = float(np.max(np.abs(vals)))
    if 100 * np.finfo(float).eps * peak > 1e-3:
        raise LimitError(f"cancellation: peak integrand {peak:.3g} swamps the value; x is too far left")
    # rounding from cancellation scales with the peak modulus
    tol = max(1e-6, 1e4 * np.finfo(float).eps * peak)
    if abs(v.imag) > tol:
        raise LimitError(f"{'F1' if kind == 'flat' else 'F2'}: imaginary residue {v.imag:.3g}")
    return float(v.real)


def f1(x: float, tau: float, lp: LimitParams | None = None) -> float:
    """``F1(x; tau)``: contour average of ``e^{x A1 + tau A2 + A3 + B} det(I - K)``."""
    return _limit_value("flat", x, tau, 0.0, lp or LimitParams())


def f2(x: float, tau: float, gamma: float, lp: LimitParams | None = None) -> float:
    """``F2(x; tau, gamma)``: contour average of ``e^{x A1 + tau A2 + 2B} det(I - K)``."""
    return _limit_value("step", x, tau, gamma, lp or LimitParams())


# ---------------------------------------------------------------------------
# scaling maps


def critical_density(p: float, q: float) -> float:
    """Density in ``(0, 1)`` at which the shock speed vanishes."""
    from scipy.optimize import brentq

    if p == 0:
        raise ConfigurationError("no zero of the shock speed when p = 0")

    def g(rho):
        return ScalingConstants.of(rho, p, q).vshock

    return float(brentq(g, 1e-12, 0.5))


@dataclass(frozen=True)
class ScalingPoint:
    t: float
    Q: int
    centering: float
    scale: float
    shift: int | None = None


def scaling_maps(kind: str, params: RingParams, tau: float, x: float, gamma: float = 0.0) -> ScalingPoint:
    """Finite-``L`` time and current level matching a limit-theorem event.

    The event ``(Q_{L-1}(t) - centering) / scale >= -x`` becomes
    ``Q_{L-1}(t) >= Q`` with ``Q = ceil(centering - x scale)``. For step
    kinds the shift (``m`` or ``k``) is returned as well.
    """
    L, N = params.L, params.N
    rho = params.rho
    if tau <= 0:
        raise ConfigurationError("tau must be positive")
    sc = ScalingConstants.of(rho, params.p, params.q)
    relax = tau / math.sqrt(rho * (1 - rho)) * L ** 1.5
    shift = None
    if kind == "flat":
        if L % N:
            raise ConfigurationError("flat scaling needs L = d N")
        t = relax
        offset = 0.0
    elif kind in ("step1a", "step1b", "step2a", "step2b"):
        if kind == "step1a":
            if not 0 <= gamma <= 1 - rho:
                raise ConfigurationError(f"step1a needs gamma in [0, 1-rho], got {gamma}")
            shift = math.floor((1 - rho - gamma) * L)
        elif kind == "step2a":
            if not 1 - rho <= gamma <= 1:
                raise ConfigurationError(f"step2a needs gamma in [1-rho, 1], got {gamma}")
            shift = math.floor((1 - gamma) * L)
        if kind.endswith("a"):
            t = relax
        else:
            raise ConfigurationError(f"{kind} needs an explicit shift; use scaling_maps_shock")
        if kind.startswith("step1"):
            if not 0 <= shift <= L - N:
                raise ConfigurationError(f"step shift m={shift} outside [0, L-N]")
            offset = rho * ((1 - rho) * L - shift)
        else:
            if not 0 <= shift <= N:
                raise ConfigurationError(f"step shift k={shift} outside [0, N]")
            offset = (1 - rho) * shift
    else:
        raise ConfigurationError(f"unknown scaling kind {kind!r}")
    centering = sc.v * t - offset
    scale = (rho * (1 - rho)) ** (2 / 3) * t ** (1 / 3)
    Q = math.ceil(centering - x * scale - 1e-12)
    return ScalingPoint(t, Q, centering, scale, shift)


def scaling_maps_shock(
    kind: str, params: RingParams, tau: float, x: float, gamma: float, shift: int
) -> ScalingPoint:
    """Shock-anchored time of the off-critical step cases (``step1b``, ``step2b``)."""
    L, N = params.L, params.N
    rho = params.rho
    sc = ScalingConstants.of(rho, params.p, params.q)
    if sc.vshock == 0:
        raise ConfigurationError("shock-anchored time needs a nonzero shock speed")
    base = L / abs(sc.vshock) * math.floor(abs(sc.vshock) * tau / math.sqrt(rho * (1 - rho)) * L ** 0.5)
    if kind == "step1b":
        if not 0 <= shift <= L - N:
            raise ConfigurationError(f"step shift m={shift} outside [0, L-N]")
        t = base - ((rho + gamma) * L + shift) / sc.vshock
        offset = rho * ((1 - rho) * L - shift)
    elif kind == "step2b":
        if not 0 <= shift <= N:
            raise ConfigurationError(f"step shift k={shift} outside [0, N]")
        t = base - (shift + gamma * L) / sc.vshock
        offset = (1 - rho) * shift
    else:
        raise ConfigurationError(f"unknown shock kind {kind!r}")
    if t < 0:
        raise ConfigurationError(f"shock-anchored time is negative ({t:.6g}); increase tau or L")
    centering = sc.v * t - offset
    scale = (rho * (1 - rho)) ** (2 / 3) * t ** (1 / 3)
    Q = math.ceil(centering - x * scale - 1e-12)
    return ScalingPoint(t, Q, centering, scale, shift)


def flat_bridge_distance(
    params: RingParams,
    tau: float,
    window: tuple[float, float] = (-4.0, 2.0),
    lp: LimitParams | None = None,
) -> float:
    """Sup distance on ``window`` between the rescaled flat CDF and ``F1(tau^{1/3} x; r tau)``.

    The finite-``L`` side is a step function of ``x``, constant on the
    intervals where ``ceil(centering - x scale)`` is fixed; ``F1`` is
    monotone, so the supremum is attained at interval endpoints.
    """
    sc = ScalingConstants.of(params.rho, params.p, params.q)
    Y = InitialCondition.flat(params).resolved
    lo, hi = window
    a, b = scaling_maps("flat", params, tau, lo), scaling_maps("flat", params, tau, hi)
    c, scale, t = a.centering, a.scale, a.t
    worst = 0.0
    for Q in range(b.Q, a.Q + 1):
        left = max(lo, (c - Q) / scale)
        right = min(hi, (c - Q + 1) / scale)
        if left > right:
            continue
        P = current_cdf(Y, Q, t, params)
        for x in (left, right):
            worst = max(worst, abs(P - f1(tau ** (1 / 3) * x, sc.r * tau, lp)))
    return worst
