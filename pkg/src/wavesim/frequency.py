"""Frequency-domain solution of a bidirectional circuit at fixed wavelength.

Wave formulation: every component emits ``b = S a + e`` where ``e`` is the
laser emission at laser ports, and connections impose ``a = P b``.  Hence
``(I - S P) b = e``.  Monitors are ideal through-connections, so the wave
solver eliminates them and fills in their readings afterwards; monitor
insertion therefore leaves every other wave bit-for-bit unchanged.

Nodal formulation: the same circuit written in port voltages and currents,
each port being a Thevenin source ``E = 2 sqrt(r) b`` behind the reference
resistance ``r``, with shared voltage and opposite currents across each
connection.  It is an independent route to the same waves.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import get_lapack_funcs, lu_factor, lu_solve

from . import components as cm
from .circuit import Circuit, forward_mask
from .errors import InvalidInputError, RangeError, SingularSystemError, WaveSimError
from .waves import WavePair, waves_to_vi

COND_LIMIT = 1e12
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class AssembledSystem:
    wavelength: float
    s_block: np.ndarray
    pairing: np.ndarray
    src: np.ndarray

    @property
    def P(self) -> np.ndarray:
        n = self.pairing.size
        p = np.zeros((n, n))
        p[np.arange(n), self.pairing] = 1.0
        return p


@dataclass(frozen=True, eq=False)
class SolveResult:
    wavelength: float
    a: np.ndarray
    b: np.ndarray
    v: np.ndarray
    i: np.ndarray
    monitors: dict[str, cm.MonitorReading]
    pd_currents: dict[str, float]
    laser_return: dict[str, float]
    cond: float


def component_block(c: Circuit, comp, wavelength: float, drive: dict | None) -> np.ndarray:
    try:
        s = comp.model.smatrix(wavelength, drive)
    except RangeError as exc:
        raise RangeError(f"{comp.name}: {exc}") from None
    if c.unidirectional:
        s = np.where(forward_mask(s.shape[0]), s, 0.0)
    return s


def assemble(c: Circuit, wavelength: float, overrides: dict[str, float] | None = None) -> AssembledSystem:
    if not wavelength > 0:
        raise InvalidInputError(f"wavelength must be > 0, got {wavelength}")
    n = c.nports
    s = np.zeros((n, n), dtype=np.complex128)
    src = np.zeros(n, dtype=np.complex128)
    drives = c.drive_values(0.0, overrides)
    for comp in c.components:
        p = comp.ports
        s[p[0]:p[-1] + 1, p[0]:p[-1] + 1] = component_block(c, comp, wavelength, drives.get(comp.name))
        if comp.kind == "laser":
            src[p[0]] = cm.laser_emission(comp.model)
    for mon in c.monitors:
        left, right = mon.ports
        s[left, right] = s[right, left] = 1.0
    return AssembledSystem(wavelength, s, c.pairing, src)


def _rcond(lu: np.ndarray, matrix: np.ndarray) -> float:
    gecon = get_lapack_funcs("gecon", (lu,))
    anorm = float(np.max(np.sum(np.abs(matrix), axis=0)))
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0:
        return 0.0
    return float(rcond)


def _factor_solve(m: np.ndarray, rhs: np.ndarray, wavelength: float) -> tuple[np.ndarray, float]:
    if not np.all(np.isfinite(m)):
        raise SingularSystemError(f"non-finite system matrix at {wavelength:.9g} m")
    lu, piv = lu_factor(m, check_finite=False)
    rcond = _rcond(lu, m)
    cond = math.inf if rcond == 0 else 1.0 / rcond
    if cond > COND_LIMIT:
        raise SingularSystemError(
            f"resonant system near-singular at {wavelength:.9g} m (condition ~{cond:.3g}): add loss"
        )
    x = lu_solve((lu, piv), rhs, check_finite=False)
    scale = max(float(np.max(np.abs(rhs))) if rhs.size else 0.0, np.finfo(float).tiny)
    resid = float(np.max(np.abs(m @ x - rhs))) if rhs.size else 0.0
    if resid > RESIDUAL_TOL * scale and np.any(rhs):
        raise SingularSystemError(f"solve residual {resid:.3g} too large at {wavelength:.9g} m")
    return x, cond


def _result(c: Circuit, system: AssembledSystem, a: np.ndarray, b: np.ndarray, cond: float) -> SolveResult:
    pe = waves_to_vi(WavePair(a, b), c.rr)
    monitors = {m.name: cm.monitor_read(a[m.ports[0]], a[m.ports[1]]) for m in c.monitors}
    pds = {p.name: float(cm.pd_read(p.model, a[p.ports[0]])) for p in c.photodetectors}
    lasers = {l.name: float(abs(a[l.ports[0]]) ** 2) for l in c.lasers}
    return SolveResult(system.wavelength, a, b, pe.v, pe.i, monitors, pds, lasers, cond)


def solve_wave(c: Circuit, wavelength: float, overrides: dict[str, float] | None = None) -> SolveResult:
    system = assemble(c, wavelength, overrides)
    n0 = c.n_device_ports
    pair0 = c.device_pairing
    s0 = system.s_block[:n0, :n0]
    src0 = system.src[:n0]
    m = np.eye(n0, dtype=np.complex128) - s0[:, pair0]
    b0, cond = _factor_solve(m, src0, wavelength)

    a = np.zeros(c.nports, dtype=np.complex128)
    b = np.zeros(c.nports, dtype=np.complex128)
    b[:n0] = b0
    a[:n0] = b0[pair0]
    for mon in c.monitors:
        fwd, bwd = b0[mon.first], b0[mon.second]
        left, right = mon.ports
        a[left] = b[right] = fwd
        a[right] = b[left] = bwd
    return _result(c, system, a, b, cond)


def solve_nodal(c: Circuit, wavelength: float, overrides: dict[str, float] | None = None) -> SolveResult:
    system = assemble(c, wavelength, overrides)
    n = c.nports
    r = c.rr
    s = system.s_block
    eye = np.eye(n, dtype=np.complex128)
    m = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    rhs = np.zeros(2 * n, dtype=np.complex128)
    # Port law: V - r I = E with E = 2 sqrt(r) (S a + e) and a = (V + r I)/(2 sqrt(r)).
    m[:n, :n] = eye - s
    m[:n, n:] = -r * (eye + s)
    rhs[:n] = 2.0 * math.sqrt(r) * system.src
    # Connections: equal voltage, current leaving one port enters the other.
    row = n
    for p in range(n):
        q = int(c.pairing[p])
        if p < q:
            m[row, p], m[row, q] = 1.0, -1.0
            m[row + 1, n + p], m[row + 1, n + q] = 1.0, 1.0
            row += 2
    x, cond = _factor_solve(m, rhs, wavelength)
    v, i = x[:n], x[n:]
    sr = math.sqrt(r)
    a = (v + r * i) / (2 * sr)
    b = (v - r * i) / (2 * sr)
    return _result(c, system, a, b, cond)


SOLVERS = {"wave": solve_wave, "nodal": solve_nodal}


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("WAVESIM_THREADS")
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise InvalidInputError(f"WAVESIM_THREADS must be an integer, got {env!r}") from None
        else:
            threads = os.cpu_count() or 1
    return max(1, int(threads))


def _run_points(fn, items, threads: int | None):
    """Evaluate ``fn`` over ``items`` in order; failures become (None, message)."""

    def guarded(item):
        try:
            return fn(item), "ok"
        except WaveSimError as exc:
            return None, str(exc).replace(",", ";").replace("\n", " ")

    nthreads = resolve_threads(threads)
    if nthreads == 1 or len(items) < 2:
        return [guarded(x) for x in items]
    with ThreadPoolExecutor(max_workers=nthreads) as pool:
        return list(pool.map(guarded, items))


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def result_columns(c: Circuit) -> list[str]:
    cols = []
    for m in c.monitors:
        cols += [f"{m.name}.p_fwd_w", f"{m.name}.p_bwd_w", f"{m.name}.phase_fwd_rad", f"{m.name}.phase_bwd_rad"]
    cols += [f"{p.name}.i_a" for p in c.photodetectors]
    cols += [f"{l.name}.p_ret_w" for l in c.lasers]
    return cols


def result_values(c: Circuit, res: SolveResult | None) -> list[float]:
    if res is None:
        return [math.nan] * len(result_columns(c))
    vals = []
    for m in c.monitors:
        r = res.monitors[m.name]
        vals += [r.p_fwd, r.p_bwd, r.phase_fwd, r.phase_bwd]
    vals += [res.pd_currents[p.name] for p in c.photodetectors]
    vals += [res.laser_return[l.name] for l in c.lasers]
    return vals


@dataclass(eq=False)
class SweepResult:
    circuit: Circuit
    wavelengths: np.ndarray
    results: list[SolveResult | None]
    status: list[str]

    def column(self, name: str) -> np.ndarray:
        idx = result_columns(self.circuit).index(name)
        return np.array([result_values(self.circuit, r)[idx] for r in self.results])

    def monitor(self, name: str, quantity: str = "p_fwd") -> np.ndarray:
        return np.array([getattr(r.monitors[name], quantity) if r else math.nan for r in self.results])

    def pd_current(self, name: str) -> np.ndarray:
        return np.array([r.pd_currents[name] if r else math.nan for r in self.results])

    @property
    def failures(self) -> int:
        return sum(s != "ok" for s in self.status)

    def to_csv(self) -> str:
        lines = [",".join(["wavelength_m", *result_columns(self.circuit), "status"])]
        for wl, res, st in zip(self.wavelengths, self.results, self.status):
            lines.append(",".join([_fmt(wl), *(_fmt(v) for v in result_values(self.circuit, res)), st]))
        return "\n".join(lines) + "\n"


def sweep(c: Circuit, lambda_start: float, lambda_stop: float, points: int,
          method: str = "wave", threads: int | None = None,
          overrides: dict[str, float] | None = None) -> SweepResult:
    if points < 2:
        raise InvalidInputError("a sweep needs at least 2 points")
    if not 0 < lambda_start < lambda_stop:
        raise InvalidInputError("sweep needs 0 < start < stop")
    solver = SOLVERS[method]
    wl = np.linspace(lambda_start, lambda_stop, int(points))
    out = _run_points(lambda lam: solver(c, float(lam), overrides), list(wl), threads)
    return SweepResult(c, wl, [r for r, _ in out], [s for _, s in out])


@dataclass(eq=False)
class Sweep2DResult:
    circuit: Circuit
    wavelength: float
    names: tuple[str, str]
    values: tuple[np.ndarray, np.ndarray]
    results: list[SolveResult | None]  # row-major, first parameter outer
    status: list[str]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values[0].size, self.values[1].size

    def grid(self, monitor: str, quantity: str = "p_bwd") -> np.ndarray:
        flat = [getattr(r.monitors[monitor], quantity) if r else math.nan for r in self.results]
        return np.array(flat).reshape(self.shape)

    def pd_grid(self, pd: str) -> np.ndarray:
        return np.array([r.pd_currents[pd] if r else math.nan for r in self.results]).reshape(self.shape)

    def argmin(self, monitor: str, quantity: str = "p_bwd") -> tuple[int, int]:
        g = self.grid(monitor, quantity)
        idx = int(np.nanargmin(g))
        return divmod(idx, self.shape[1])

    def to_csv(self) -> str:
        lines = [",".join([*self.names, *result_columns(self.circuit), "status"])]
        k = 0
        for va in self.values[0]:
            for vb in self.values[1]:
                res, st = self.results[k], self.status[k]
                lines.append(",".join([_fmt(va), _fmt(vb), *(_fmt(v) for v in result_values(self.circuit, res)), st]))
                k += 1
        return "\n".join(lines) + "\n"


def sweep2d(c: Circuit, param_a: tuple[str, np.ndarray], param_b: tuple[str, np.ndarray],
            wavelength: float, method: str = "wave", threads: int | None = None) -> Sweep2DResult:
    (name_a, va), (name_b, vb) = param_a, param_b
    c.check_bindings([name_a, name_b])
    if name_a == name_b:
        raise InvalidInputError("sweep2d needs two distinct parameters")
    va = np.asarray(va, dtype=float)
    vb = np.asarray(vb, dtype=float)
    solver = SOLVERS[method]
    items = [{name_a: float(x), name_b: float(y)} for x in va for y in vb]
    out = _run_points(lambda ov: solver(c, wavelength, ov), items, threads)
    return Sweep2DResult(c, wavelength, (name_a, name_b), (va, vb),
                         [r for r, _ in out], [s for _, s in out])
