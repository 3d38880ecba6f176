"""Command-line entry point, data emission and the acceptance harness.

Every subcommand writes CSV (default) or JSON lines. CSV files start with
``#`` comment lines carrying the tool version and the full run
configuration; JSON-lines files carry the same as a first ``meta`` record.
Floats are printed with 17 significant digits, so identical configurations
give byte-identical files.

Exit codes: 0 on success, 1 on numerical-tolerance failures, 2 on
configuration errors (argparse usage errors included).
"""

from __future__ import annotations

import argparse
import cmath
import json
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from . import bethe, contour, current_laws, limits, oracle, simulator
from .bethe import BetheError
from .contour import QuadratureBudget, QuadratureError
from .oracle import OracleError
from .ring_model import ConfigurationError, RingParams, enumerate_states

log = logging.getLogger("pushasep")

EXIT_OK, EXIT_TOL, EXIT_CONFIG = 0, 1, 2


class ToleranceFailure(RuntimeError):
    pass


@dataclass
class RunConfig:
    """Everything needed to reproduce an output file."""

    command: str
    L: int | None
    N: int | None
    p: float | None
    options: dict[str, Any]
    nodes_z: int
    nodes_w: int
    tol: float
    out: str | None
    format: str
    threads: int
    version: str = __version__


# ---------------------------------------------------------------------------
# formatting


def _fmt(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, (tuple, list)):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def _jsonable(v: Any) -> Any:
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        # repr round-trips; 17 digits matches the CSV output
        return float(f"{float(v):.17g}")
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def emit(columns: Sequence[str], rows: Sequence[Sequence[Any]], cfg: RunConfig, extra: dict | None = None) -> None:
    meta = {"version": __version__, "config": asdict(cfg)}
    if extra:
        meta.update(extra)
    lines: list[str] = []
    if cfg.format == "csv":
        lines.append(f"# pushasep {__version__}")
        lines.append("# config: " + json.dumps(_jsonable(meta["config"]), sort_keys=True))
        for k in sorted(extra or {}):
            lines.append(f"# {k}: " + json.dumps(_jsonable(extra[k]), sort_keys=True))
        lines.append(",".join(columns))
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    else:
        lines.append(json.dumps({"meta": _jsonable(meta)}, sort_keys=True))
        for row in rows:
            lines.append(json.dumps(_jsonable(dict(zip(columns, row))), sort_keys=True))
    text = "\n".join(lines) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# argument helpers


def _positions(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.replace(" ", "").split(",") if v != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"positions must be comma-separated integers: {text!r}") from exc


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _int_list(text: str) -> list[int]:
    """``"-2:3"`` (inclusive range) or ``"0,2,5"``."""
    text = text.replace(" ", "")
    try:
        if ":" in text:
            a, b = text.split(":")
            return list(range(int(a), int(b) + 1))
        return [int(v) for v in text.split(",") if v != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer list or range: {text!r}") from exc


def _float_grid(text: str) -> list[float]:
    """``"a:b:n"`` (``n`` equispaced points) or ``"x1,x2,..."``."""
    text = text.replace(" ", "")
    try:
        if text.count(":") == 2:
            a, b, n = text.split(":")
            return [float(v) for v in np.linspace(float(a), float(b), int(n))]
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a float list or grid: {text!r}") from exc


def read_config_file(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment. Keys use flag names."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{n}: expected 'key = value'")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.lstrip("-").replace("-", "_")] = v
    return out


def _zeta(ns: argparse.Namespace) -> complex:
    if getattr(ns, "zeta_arg", None) is not None:
        return cmath.exp(1j * math.pi * ns.zeta_arg)
    return ns.zeta


def _params(ns: argparse.Namespace) -> RingParams:
    if ns.L is None or ns.N is None:
        raise ConfigurationError("--L and --N are required")
    return RingParams(ns.L, ns.N, ns.p)


def _budget(ns: argparse.Namespace) -> QuadratureBudget:
    return QuadratureBudget(ns.nodes_z, ns.nodes_w)


def _initial(ns: argparse.Namespace, P: RingParams) -> tuple[int, ...]:
    ic = getattr(ns, "ic", "general")
    if ic == "flat":
        return current_laws.InitialCondition.flat(P, ns.shift).resolved
    if ic == "step1":
        return current_laws.InitialCondition.step1(P, ns.shift).resolved
    if ic == "step2":
        return current_laws.InitialCondition.step2(P, ns.shift).resolved
    if ns.Y is None:
        raise ConfigurationError("--Y is required unless --ic selects named initial data")
    return current_laws.InitialCondition.general(P, ns.Y).resolved


def _run_config(ns: argparse.Namespace) -> RunConfig:
    common = {"L", "N", "p", "nodes_z", "nodes_w", "tol", "out", "format", "threads", "command", "config", "func", "verbose"}
    options = {k: v for k, v in sorted(vars(ns).items()) if k not in common}
    options = {k: (complex_to_pair(v) if isinstance(v, complex) else v) for k, v in options.items()}
    return RunConfig(
        ns.command, ns.L, ns.N, ns.p, options, ns.nodes_z, ns.nodes_w, ns.tol, ns.out, ns.format, ns.threads
    )


def complex_to_pair(z: complex) -> list[float]:
    return [z.real, z.imag]


# ---------------------------------------------------------------------------
# subcommands


def cmd_oracle(ns: argparse.Namespace) -> int:
    P = _params(ns)
    Y = _initial(ns, P)
    cfg = _run_config(ns)
    if ns.what == "transition":
        v = oracle.evolve_master(Y, ns.t, _zeta(ns), P)
        rows = [[list(X), c.real, c.imag] for X, c in zip(enumerate_states(P), v)]
        emit(["X", "re", "im"], rows, cfg, {"method": "oracle-expm"})
    elif ns.what == "current-pmf":
        tab = oracle.current_pmf(Y, ns.t, None, P)
        emit(tab.columns, tab.rows, cfg, {"tail_mass": tab.meta["tail_mass"]})
    else:
        law = oracle.local_current_pmf(Y, ns.t, P)
        rows, acc = [], 1.0
        for q, w in law.items():
            rows.append([q, w, acc])
            acc -= w
        emit(["Q", "pmf", "cdf_ge"], rows, cfg)
    return EXIT_OK


def cmd_transition(ns: argparse.Namespace) -> int:
    P = _params(ns)
    Y = _initial(ns, P)
    zeta = _zeta(ns)
    states = enumerate_states(P)
    budget = _budget(ns)
    if ns.method == "onefold":
        v = contour.transition_table(Y, zeta, ns.t, P, budget=budget)
    elif ns.method == "full":
        K = contour.full_kernel(zeta, P, budget=budget)
        v = np.array([contour.gf_full(Y, X, zeta, ns.t, P, kernel=K) for X in states])
    else:
        terms = contour.spectral_terms(zeta, P)
        v = np.array([contour.gf_spectral(Y, X, zeta, ns.t, P, terms=terms) for X in states])
    rows = [[list(X), c.real, c.imag] for X, c in zip(states, v)]
    total = complex(np.sum(v))
    emit(["X", "re", "im"], rows, _run_config(ns), {"sum": [total.real, total.imag]})
    if abs(zeta - 1) < 1e-15 and abs(total - 1) > ns.tol:
        raise ToleranceFailure(f"transition probabilities sum to {total:.12g}, not 1")
    return EXIT_OK


def cmd_spectrum(ns: argparse.Namespace) -> int:
    P = _params(ns)
    zeta = _zeta(ns)
    cr = bethe.coupled_roots(zeta, P)
    E = list(cr.energies) + ([0j] if cr.stationary else [])
    rows = [["bethe", e.real, e.imag] for e in sorted(E, key=lambda c: (round(c.real, 9), c.imag))]
    if ns.compare:
        O = oracle.spectrum(zeta, P)
        rows += [["oracle", e.real, e.imag] for e in sorted(O, key=lambda c: (round(c.real, 9), c.imag))]
    emit(["source", "re", "im"], rows, _run_config(ns), {"count": len(E), "expected": P.n_states})
    if len(E) != P.n_states:
        raise ToleranceFailure(f"found {len(E)} eigenvalues, expected {P.n_states}")
    return EXIT_OK


def cmd_current_cdf(ns: argparse.Namespace) -> int:
    P = _params(ns)
    Y = _initial(ns, P)
    f = current_laws.current_cdf_alt if ns.form == 2 else current_laws.current_cdf
    rows = [[Q, f(Y, Q, ns.t, P, budget=_budget(ns))] for Q in ns.Q]
    emit(["Q", "cdf_ge"], rows, _run_config(ns), {"Y": list(Y)})
    return EXIT_OK


def cmd_fredholm_flat(ns: argparse.Namespace) -> int:
    P = _params(ns)
    rows = [[Q, current_laws.flat_cdf(Q, ns.t, P, ns.shift, budget=_budget(ns))] for Q in ns.Q]
    emit(["Q", "cdf_ge"], rows, _run_config(ns))
    return EXIT_OK


def cmd_fredholm_step(ns: argparse.Namespace) -> int:
    P = _params(ns)
    rows = [[Q, current_laws.step_cdf(ns.case, ns.shift, Q, ns.t, P, budget=_budget(ns))] for Q in ns.Q]
    emit(["Q", "cdf_ge"], rows, _run_config(ns))
    return EXIT_OK


def cmd_images(ns: argparse.Namespace) -> int:
    P = _params(ns)
    Y = _initial(ns, P)
    zeta = _zeta(ns)
    targets = [ns.X] if ns.X is not None else enumerate_states(P)
    rows = []
    for X in targets:
        v, b = current_laws.images_sum(Y, X, zeta, ns.t, ns.M, P, budget=_budget(ns))
        rows.append([list(X), v.real, v.imag, b])
    emit(["X", "re", "im", "boundary"], rows, _run_config(ns))
    return EXIT_OK


def cmd_limit(ns: argparse.Namespace) -> int:
    lp = limits.LimitParams(K=ns.K, Mz=ns.Mz, rz=ns.rz)
    if ns.which == "f1":
        rows = [[x, limits.f1(x, ns.tau, lp)] for x in ns.x]
    else:
        rows = [[x, limits.f2(x, ns.tau, ns.gamma, lp)] for x in ns.x]
    # two-column plot data
    emit(["x", ns.which.upper()], rows, _run_config(ns))
    return EXIT_OK


def cmd_simulate(ns: argparse.Namespace) -> int:
    P = _params(ns)
    Y = _initial(ns, P)
    cfg = _run_config(ns)
    if ns.dump:
        traj = simulator.run(Y, ns.t, ns.seed, P)
        with open(ns.dump, "w", encoding="utf-8") as fh:
            fh.write(f"# pushasep {__version__}\n# config: {json.dumps(_jsonable(asdict(cfg)), sort_keys=True)}\n")
            fh.write("time,kind,particle,block,X,global_q\n")
            for (tm, kind, X), rec in zip(traj.events, traj.history):
                block = kind[2] if kind[0] == "push" else 1
                fh.write(f"{tm:.17g},{kind[0]},{kind[1]},{block},{_fmt(list(X))},{rec.global_q}\n")
    if ns.what == "transition":
        tab = simulator.empirical_transition(Y, ns.t, ns.trials, ns.seed, P, workers=ns.threads)
        emit(tab.columns, tab.rows, cfg)
    else:
        law = simulator.empirical_current_law(Y, ns.t, ns.trials, ns.seed, P, workers=ns.threads)
        qs = ns.Q if ns.Q is not None else sorted(law)
        rows = []
        for Q in qs:
            f = sum(v for q, v in law.items() if q >= Q)
            rows.append([Q, f, math.sqrt(f * (1 - f) / ns.trials)])
        emit(["Q", "estimate", "stderr"], rows, cfg)
    return EXIT_OK


def cmd_fuss_catalan(ns: argparse.Namespace) -> int:
    rows = []
    for m in range(ns.m + 1):
        a = bethe.fuss_catalan(ns.fc_p, ns.fc_r, m)
        rows.append([m, str(a), float(a)])
    emit(["m", "exact", "value"], rows, _run_config(ns))
    return EXIT_OK


# ---------------------------------------------------------------------------
# acceptance harness


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    tolerance: float
    seconds: float
    detail: str = ""
    notes: dict[str, Any] = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name} {status} measured={self.measured:.3g} tol={self.tolerance:.3g} ({self.seconds:.1f}s) {self.detail}"


def _timed(name: str, tol: float, fn: Callable[[], tuple[float, bool, str]]) -> Check:
    t0 = time.perf_counter()
    measured, ok, detail = fn()
    return Check(name, bool(ok), float(measured), tol, time.perf_counter() - t0, detail)


def ac1() -> Check:
    def run():
        P = RingParams(5, 2, 0.7)
        S = enumerate_states(P)
        K = contour.full_kernel(1.0, P)
        err = max(abs(contour.gf_full(Y, X, 1.0, 0.0, P, kernel=K) - (X == Y)) for Y in S for X in S)
        return err, err <= 1e-6, f"{len(S) ** 2} pairs"

    return _timed("AC-1", 1e-6, run)


def ac2() -> Check:
    def run():
        err = 0.0
        for L, N in ((4, 1), (5, 2), (7, 3)):
            for p in (1.0, 0.7):
                P = RingParams(L, N, p)
                S = enumerate_states(P)
                for t in (0.1, 1.0):
                    U = oracle.propagator(t, 1.0, P)
                    for b, Y in enumerate(S):
                        err = max(err, float(np.max(np.abs(contour.transition_table(Y, 1.0, t, P) - U[:, b]))))
        return err, err <= 1e-6, "(4,1),(5,2),(7,3)"

    return _timed("AC-2", 1e-6, run)


def ac3() -> Check:
    def run():
        z = cmath.exp(1j * math.pi / 5)
        P = RingParams(5, 2, 0.7)
        S = enumerate_states(P)
        K = contour.full_kernel(z, P)
        terms = contour.spectral_terms(z, P)
        e1 = e2 = 0.0
        for t in (0.1, 1.0):
            for Y in S:
                one = contour.transition_table(Y, z, t, P)
                for a, X in enumerate(S):
                    e1 = max(e1, abs(contour.gf_full(Y, X, z, t, P, kernel=K) - one[a]))
                    e2 = max(e2, abs(one[a] - contour.gf_spectral(Y, X, z, t, P, terms=terms)))
        err = max(e1, e2)
        return err, err <= 1e-6, f"full-onefold={e1:.2g} onefold-spectral={e2:.2g}"

    return _timed("AC-3", 1e-6, run)


def ac4() -> Check:
    def run():
        e_closed = e_quad = 0.0
        for L in range(2, 9):
            for N in range(1, min(4, L // 2) + 1):
                P = RingParams(L, N, 0.7)
                target = 1 / math.comb(L, N)
                e_closed = max(e_closed, abs(contour.u0(1.0, P) - target))
                S = enumerate_states(P)
                Y, X = S[0], S[-1]
                v = contour.u0(1.0, P, Y=Y, X=X, t=0.3, closed_form=False)
                e_quad = max(e_quad, abs(v - target))
        ok = e_closed <= 1e-10 and e_quad <= 1e-6
        return max(e_closed, e_quad), ok, f"closed={e_closed:.2g} quadrature={e_quad:.2g}"

    return _timed("AC-4", 1e-6, run)


def ac5() -> Check:
    from scipy.optimize import linear_sum_assignment

    def run():
        z = cmath.exp(1j * math.pi / 7)
        err, counts = 0.0, True
        for L in (4, 5):
            for p in (1.0, 0.7):
                P = RingParams(L, 2, p)
                cr = bethe.coupled_roots(z, P)
                E = np.array(list(cr.energies) + ([0j] if cr.stationary else []))
                O = oracle.spectrum(z, P)
                counts &= len(E) == len(O) == P.n_states
                if len(E) != len(O):
                    continue
                C = np.abs(E[:, None] - O[None, :])
                r, c = linear_sum_assignment(C)
                err = max(err, float(C[r, c].max()))
        return err, counts and err <= 1e-6, "counts ok" if counts else "count mismatch"

    return _timed("AC-5", 1e-6, run)


def ac6() -> Check:
    def run():
        e1 = e2 = 0.0
        for p in (1.0, 0.7):
            P = RingParams(4, 2, p)
            for Y in ((0, 2), (0, 1), (1, 3)):
                for t in (0.5, 2.0):
                    for Q in range(-2, 4):
                        exact = oracle.local_current_cdf_oracle(Y, t, Q, P)
                        e1 = max(e1, abs(current_laws.current_cdf(Y, Q, t, P) - exact))
                        if Q % 2 == 0:
                            e2 = max(e2, abs(current_laws.current_cdf_alt(Y, Q, t, P) - exact))
        return e1, e1 <= 1e-6 and e2 <= 1e-8, f"form1={e1:.2g} alternative={e2:.2g} (tol 1e-8)"

    return _timed("AC-6", 1e-6, run)


def ac7(trajectories: int = 10_000) -> Check:
    def run():
        P = RingParams(6, 3, 0.6)
        bad = events = 0
        for i in range(trajectories):
            tr = simulator.run((0, 1, 3), 2.0, 20240601, P, trial=i)
            events += len(tr.events)
            bad += simulator.identity_violations(tr, P)
        return bad, bad == 0, f"{trajectories} trajectories, {events} events"

    return _timed("AC-7", 0, run)


def _ac8_cases():
    for p in (1.0, 0.7):
        flat = RingParams(6, 2, p)
        yield flat, "flat", 0, current_laws.InitialCondition.flat(flat).resolved
        step = RingParams(5, 2, p)
        for m in (0, 1, 3):
            yield step, 1, m, current_laws.InitialCondition.step1(step, m).resolved
        for k in (0, 1, 2):
            yield step, 2, k, current_laws.InitialCondition.step2(step, k).resolved


def ac8() -> Check:
    def run():
        e_val = e_rad = 0.0
        for P, case, shift, Y in _ac8_cases():
            rc = bethe.r0(P)
            for t in (0.5, 2.0):
                for Q in range(-2, 4):
                    exact = current_laws.current_cdf(Y, Q, t, P)
                    if case == "flat":
                        f = lambda r: current_laws.flat_cdf(Q, t, P, shift, r=r)  # noqa: E731
                    else:
                        f = lambda r: current_laws.step_cdf(case, shift, Q, t, P, r=r)  # noqa: E731
                    a, b = f(None), f(0.9 * rc)
                    c = f(0.95 * rc)
                    e_val = max(e_val, abs(a - exact))
                    e_rad = max(e_rad, abs(b - c))
        return e_val, e_val <= 1e-6 and e_rad <= 1e-8, f"vs current_cdf={e_val:.2g} radius={e_rad:.2g}"

    return _timed("AC-8", 1e-6, run)


def ac9() -> Check:
    def run():
        P = RingParams(5, 2, 0.7)
        err = 0.0
        for Y in ((0, 2), (1, 2)):
            ex = oracle.evolve_master(Y, 0.5, 1.0, P).real
            for a, X in enumerate(enumerate_states(P)):
                v, _ = current_laws.images_sum(Y, X, 1.0, 0.5, 3, P)
                err = max(err, abs(v - ex[a]))
        return err, err <= 1e-6, "M_trunc=3"

    return _timed("AC-9", 1e-6, run)


def ac10_cdf() -> Check:
    def run():
        xs = np.linspace(-6, 3, 10)
        F1 = np.array([limits.f1(x, 1.0) for x in xs])
        F2 = np.array([limits.f2(x, 1.0, 0.3) for x in xs])
        mono = bool(np.all(np.diff(F1) >= -1e-6) and np.all(np.diff(F2) >= -1e-6))
        ends = max(abs(F1[0]), abs(F2[0]), abs(1 - F1[-1]), abs(1 - F2[-1]))
        sym = 0.0
        for x in (-2.0, -0.5, 1.0):
            for g in (0.3, 0.45):
                base = limits.f2(x, 1.0, g)
                sym = max(sym, abs(base - limits.f2(x, 1.0, g + 1)), abs(base - limits.f2(x, 1.0, -g)))
        ok = mono and ends <= 5e-3 and sym <= 1e-8
        return ends, ok, f"monotone={mono} endpoints={ends:.2g} periodic/even={sym:.2g}"

    return _timed("AC-10", 5e-3, run)


def ac10_gaussian(tau: float = 5.0) -> Check:
    from scipy.stats import norm

    def run():
        ys = np.linspace(-3, 3, 25)
        v = np.array([limits.f1(-tau + math.pi ** 0.25 / math.sqrt(2) * math.sqrt(tau) * y, tau) for y in ys])
        d = float(np.max(np.abs(v - norm.cdf(ys))))
        return d, d <= 0.02, f"tau={tau} sup|F1 - Phi|"

    return _timed("AC-10(c)", 0.02, run)


def ac11() -> Check:
    def run():
        ds = [limits.flat_bridge_distance(RingParams(3 * N, N, 1.0), 0.5) for N in (4, 6, 8)]
        ok = ds[0] > ds[1] > ds[2]
        return ds[-1], ok, "N=4,6,8: " + ", ".join(f"{d:.4f}" for d in ds)

    return _timed("AC-11", float("nan"), run)


def ac12() -> Check:
    def run():
        fc = [int(bethe.fuss_catalan(2, 2, m)) for m in range(4)]
        ok_fc = fc == [1, 2, 5, 14]
        P = RingParams(4, 2, 1.0)
        z = 0.15
        lead = (bethe.psi_product(z, P) - 1) / z ** 4
        target = (-1) ** P.N * math.comb(P.L, P.N)
        rel = abs(lead - target) / abs(target)
        slope = root_series_slope(P, z=0.1, M=2)
        d = P.L // P.N
        expected = d * (2 + 1)
        srel = abs(slope - expected) / expected
        ok = ok_fc and rel <= 0.02 and srel <= 0.10
        return max(rel, srel), ok, f"FC={fc} psi_rel={rel:.3g} slope={slope:.3f} (expect {expected})"

    return _timed("AC-12", 0.10, run)


def root_series_slope(P: RingParams, z: float, M: int) -> float:
    """Observed ``log2`` error ratio of the truncated root series under ``z -> z/2``.

    The error is measured relative to ``|1 - 1/lambda|``, whose leading
    order is ``|Z|``, so the expected slope is ``d (M + 1)``.
    """
    errs = []
    for zz in (z, z / 2):
        rs = bethe.q_roots(zz, P)
        target = 1 - 1 / rs.Q1
        worst = 0.0
        for k in range(P.N):
            eta = cmath.exp(2j * math.pi * k / P.N)
            approx = bethe.phi_expansion(zz, eta, M, P)
            j = int(np.argmin(np.abs(target - approx)))
            worst = max(worst, abs(target[j] - approx) / abs(target[j]))
        errs.append(worst)
    return math.log2(errs[0] / errs[1])


def ac13(trials: int = 100_000) -> Check:
    def run():
        P = RingParams(5, 2, 0.7)
        Y, t = (0, 2), 1.0
        tab = simulator.empirical_transition(Y, t, trials, 7, P)
        ex = oracle.evolve_master(Y, t, 1.0, P).real
        z = 0.0
        for row, e in zip(tab.rows, ex):
            # binomial standard error under the exact value
            se = math.sqrt(max(e * (1 - e), 0.0) / trials)
            if se > 0:
                z = max(z, abs(row[1] - e) / se)
            elif row[1] != e:
                z = math.inf
        law = simulator.empirical_current_law(Y, t, trials, 8, P)
        for Q in range(-2, 3):
            f = sum(v for q, v in law.items() if q >= Q)
            e = current_laws.current_cdf(Y, Q, t, P)
            se = math.sqrt(max(e * (1 - e), 0.0) / trials)
            if se > 0:
                z = max(z, abs(f - e) / se)
        return z, z <= 4, f"max |z|={z:.2f} over states and Q=-2..2"

    return _timed("AC-13", 4, run)


ACCEPTANCE: list[Callable[[], Check]] = [
    ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10_cdf, ac10_gaussian, ac11, ac12, ac13,
]


def cmd_validate(ns: argparse.Namespace) -> int:
    if ns.profile != "desk":
        raise ConfigurationError(f"unknown profile {ns.profile!r}")
    wanted = set(ns.only or [])
    checks = []
    for fn in ACCEPTANCE:
        if wanted and fn.__name__ not in wanted:
            continue
        try:
            c = fn()
        except (QuadratureError, BetheError, OracleError, limits.LimitError) as exc:
            c = Check(fn.__name__, False, math.nan, math.nan, 0.0, f"error: {exc}")
        print(c.line(), file=sys.stderr)
        checks.append(c)
    rows = [[c.name, c.passed, c.measured, c.tolerance, c.seconds, c.detail] for c in checks]
    emit(["criterion", "passed", "measured", "tolerance", "seconds", "detail"], rows, _run_config(ns))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_TOL


# ---------------------------------------------------------------------------
# parser


def _model_args(sp: argparse.ArgumentParser, initial: bool = True) -> None:
    sp.add_argument("--L", type=int, help="ring length")
    sp.add_argument("--N", type=int, help="particle count")
    sp.add_argument("--p", type=float, default=1.0, help="right rate; q = 1 - p")
    if initial:
        sp.add_argument("--Y", type=_positions, help="initial positions, e.g. 0,2")
        sp.add_argument("--ic", choices=["general", "flat", "step1", "step2"], default="general")
        sp.add_argument("--shift", type=int, default=0, help="delta (flat), m (step1) or k (step2)")


def _zeta_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--zeta", type=_complex, default=1.0 + 0j, help="complex literal, e.g. 0.8+0.6j")
    sp.add_argument("--zeta-arg", type=float, help="zeta = exp(i pi a); overrides --zeta")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file supplying defaults")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    common.add_argument("--nodes-z", type=int, default=64)
    common.add_argument("--nodes-w", type=int, default=48)
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--threads", type=int, default=1, help="worker cap for parallel trials")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="pushasep", description="PushASEP on a ring: exact formulas, limits and checks.")
    parser.add_argument("--version", action="version", version=f"pushasep {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("oracle", parents=[common], help="master-equation oracle")
    _model_args(sp)
    _zeta_args(sp)
    sp.add_argument("--t", type=float, help="time (required)")
    sp.add_argument("--what", choices=["transition", "current-pmf", "local-cdf"], default="transition")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("transition", parents=[common], help="transition probabilities / generating function")
    _model_args(sp)
    _zeta_args(sp)
    sp.add_argument("--t", type=float, help="time (required)")
    sp.add_argument("--method", choices=["onefold", "full", "spectral"], default="onefold")
    sp.set_defaults(func=cmd_transition)

    sp = sub.add_parser("spectrum", parents=[common], help="Bethe eigenvalues of the deformed generator")
    _model_args(sp, initial=False)
    _zeta_args(sp)
    sp.add_argument("--compare", action="store_true", help="also list oracle eigenvalues")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("current-cdf", parents=[common], help="P(Q_{L-1}(t) >= Q) by contour integral")
    _model_args(sp)
    sp.add_argument("--t", type=float, help="time (required)")
    sp.add_argument("--Q", type=_int_list, default=_int_list("-2:3"), help="levels, e.g. -2:3 or 0,2")
    sp.add_argument("--form", type=int, choices=[1, 2], default=1)
    sp.set_defaults(func=cmd_current_cdf)

    sp = sub.add_parser("fredholm-flat", parents=[common], help="flat-data CDF as a Fredholm determinant")
    _model_args(sp, initial=False)
    sp.add_argument("--shift", type=int, default=0, help="flat offset delta")
    sp.add_argument("--t", type=float, help="time (required)")
    sp.add_argument("--Q", type=_int_list, default=_int_list("-2:3"))
    sp.set_defaults(func=cmd_fredholm_flat)

    sp = sub.add_parser("fredholm-step", parents=[common], help="step-data CDF as a Fredholm determinant")
    _model_args(sp, initial=False)
    sp.add_argument("--case", type=int, choices=[1, 2], default=1)
    sp.add_argument("--shift", type=int, default=0, help="m (case 1) or k (case 2)")
    sp.add_argument("--t", type=float, help="time (required)")
    sp.add_argument("--Q", type=_int_list, default=_int_list("-2:3"))
    sp.set_defaults(func=cmd_fredholm_step)

    sp = sub.add_parser("images", parents=[common], help="truncated method-of-images sum")
    _model_args(sp)
    _zeta_args(sp)
    sp.add_argument("--X", type=_positions, help="target positions (default: all states)")
    sp.add_argument("--t", type=float, help="time (required)")
    sp.add_argument("--M", type=int, default=3, help="image truncation")
    sp.set_defaults(func=cmd_images)

    sp = sub.add_parser("limit", parents=[common], help="limit distributions F1 / F2")
    sp.add_argument("which", choices=["f1", "f2"])
    sp.add_argument("--tau", type=float, help="relaxation time (required)")
    sp.add_argument("--gamma", type=float, default=0.0)
    sp.add_argument("--x", type=_float_grid, default=_float_grid("-6:3:19"), help="a:b:n or x1,x2,...")
    sp.add_argument("--K", type=int, default=24)
    sp.add_argument("--Mz", type=int, default=64)
    sp.add_argument("--rz", type=float, default=None)
    sp.set_defaults(func=cmd_limit, L=None, N=None, p=None)

    sp = sub.add_parser("simulate", parents=[common], help="Gillespie Monte Carlo")
    _model_args(sp)
    sp.add_argument("--t", type=float, help="time (required)")
    sp.add_argument("--trials", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--what", choices=["transition", "current"], default="transition")
    sp.add_argument("--Q", type=_int_list, help="current levels (default: observed)")
    sp.add_argument("--dump", help="write the events of trial 0 to this CSV")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fuss-catalan", parents=[common], help="Fuss-Catalan numbers A_m(p, r)")
    sp.add_argument("--fc-p", type=int, default=2)
    sp.add_argument("--fc-r", type=int, default=2)
    sp.add_argument("--m", type=int, default=5)
    sp.set_defaults(func=cmd_fuss_catalan, L=None, N=None, p=None)

    sp = sub.add_parser("validate", parents=[common], help="run the acceptance suite")
    sp.add_argument("--profile", default="desk")
    sp.add_argument("--only", nargs="*", help="subset by function name, e.g. ac1 ac6 ac10_gaussian")
    sp.set_defaults(func=cmd_validate, L=None, N=None, p=None)
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_config_file(known.config)
    for action in parser._subparsers._group_actions:  # type: ignore[union-attr]
        for sp in action.choices.values():
            dests = {a.dest: a for a in sp._actions}
            defaults = {}
            for k, v in values.items():
                if k in dests:
                    a = dests[k]
                    defaults[k] = a.type(v) if a.type is not None else v
            sp.set_defaults(**defaults)


def _require(ns: argparse.Namespace) -> None:
    for name in ("t", "tau"):
        if name in vars(ns) and getattr(ns, name) is None:
            raise ConfigurationError(f"--{name} is required (flag or config file)")


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
    except (OSError, ConfigurationError, ValueError, argparse.ArgumentTypeError) as exc:
        print(f"pushasep: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        _require(ns)
        return ns.func(ns)
    except ConfigurationError as exc:
        print(f"pushasep: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ToleranceFailure, QuadratureError, BetheError, OracleError, limits.LimitError) as exc:
        print(f"pushasep: numerical failure: {exc}", file=sys.stderr)
        return EXIT_TOL


if __name__ == "__main__":
    sys.exit(main())
