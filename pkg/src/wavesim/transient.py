"""Baseband complex-envelope transient engine.

Components with a propagation delay (waveguides, phase shifters with a
length) act as delay lines: their outgoing waves are their S-matrix applied
to the incident waves ``k`` steps earlier, with ``k = round(tau/dt)``.  All
other components are instantaneous; at each step the instantaneous
subnetwork is resolved by fixed-point iteration

    b <- S_inst (P b) + S_del a_delayed + e

warm-started from the previous step.  S-matrices are evaluated once at the
carrier wavelength; phase shifters are re-evaluated from their drives at
every step.  Dispersion inside the modulation bandwidth is neglected.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from . import components as cm
from .circuit import Circuit
from .errors import ConvergenceError, InstabilityError, InvalidInputError
from .frequency import component_block
from .stimulus import Stimulus, eval_stimulus

__all__ = ["Stimulus", "eval_stimulus", "quantize_delay", "run_transient", "TransientResult"]

log = logging.getLogger(__name__)

MAX_ITER = 1000
FP_TOL = 1e-12
INSTABILITY_FACTOR = 1e3
QUANT_WARN = 0.01


def _quantize(tau: float, dt: float) -> tuple[int, str | None]:
    if tau < 0:
        raise InvalidInputError("delay must be >= 0")
    if tau == 0:
        return 0, None
    steps = max(1, int(round(tau / dt)))
    err = abs(steps * dt - tau) / tau
    if err > QUANT_WARN:
        return steps, (
            f"delay {tau:.4g} s quantized to {steps} step(s) of {dt:.4g} s "
            f"({100 * err:.3g}% error); use a smaller dt"
        )
    return steps, None


def quantize_delay(tau: float, dt: float) -> int:
    """Whole-step delay for ``tau``; logs a warning when the relative
    quantization error exceeds 1%."""
    steps, msg = _quantize(tau, dt)
    if msg:
        log.warning(msg)
    return steps


@dataclass(eq=False)
class TransientResult:
    times: np.ndarray
    columns: dict[str, np.ndarray]
    warnings: list[str] = field(default_factory=list)
    iterations: int = 0

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def to_csv(self, decimate: int = 1) -> str:
        names = list(self.columns)
        lines = [",".join(["time_s", *names])]
        data = [self.times, *(self.columns[n] for n in names)]
        for k in range(0, self.times.size, max(1, int(decimate))):
            lines.append(",".join(f"{col[k]:.17g}" for col in data))
        return "\n".join(lines) + "\n"


def _loop_components(c: Circuit, s_inst: np.ndarray, pair: np.ndarray) -> list[str]:
    coupling = np.abs(s_inst[:, pair]) > 0
    _, labels = connected_components(coupling, directed=True, connection="strong")
    owner = {}
    for comp in c.components:
        for p in comp.ports:
            owner[p] = comp.name
    names = []
    for lab in np.unique(labels):
        ports = np.flatnonzero(labels == lab)
        if ports.size > 1 or coupling[ports[0], ports[0]]:
            names += [owner[p] for p in ports if owner[p] not in names]
    return names


def run_transient(c: Circuit, tstop: float, dt: float, carrier_lambda: float | None = None,
                  max_iter: int = MAX_ITER, tol: float = FP_TOL) -> TransientResult:
    if not dt > 0:
        raise InvalidInputError("dt must be > 0")
    if not tstop >= 0:
        raise InvalidInputError("tstop must be >= 0")
    if carrier_lambda is None:
        lasers = c.lasers
        carrier_lambda = lasers[0].model.wavelength0 if lasers else cm.DEFAULT_LAMBDA0

    n0 = c.n_device_ports
    pair = np.asarray(c.device_pairing)
    drives0 = c.drive_values(0.0)
    s_inst = np.zeros((n0, n0), dtype=np.complex128)
    s_del = np.zeros((n0, n0), dtype=np.complex128)
    src = np.zeros(n0, dtype=np.complex128)
    warnings: list[str] = []
    delay_ports: list[int] = []
    delay_steps: list[int] = []
    dynamic = []  # (component, slice, target matrix)
    time_varying = any(s.kind != "dc" for s in c.stimuli.values())

    for comp in c.components:
        p = slice(comp.ports[0], comp.ports[-1] + 1)
        k, msg = _quantize(comp.model.delay(), dt)
        if msg:
            msg = f"{comp.name}: {msg}"
            log.warning(msg)
            warnings.append(msg)
        target = s_del if k > 0 else s_inst
        target[p, p] = component_block(c, comp, carrier_lambda, drives0.get(comp.name))
        if k > 0:
            delay_ports += list(comp.ports)
            delay_steps += [k] * comp.nports
        if comp.kind == "laser":
            src[comp.ports[0]] = cm.laser_emission(comp.model)
        if comp.model.inputs and time_varying:
            dynamic.append((comp, p, target))

    dports = np.array(delay_ports, dtype=np.intp)
    dk = np.array(delay_steps, dtype=np.intp)
    depth = int(dk.max()) + 1 if dk.size else 1
    history = np.zeros((depth, n0), dtype=np.complex128)

    nsteps = int(math.floor(tstop / dt + 1e-9)) + 1
    times = np.arange(nsteps) * dt
    source_amp = math.sqrt(float(np.sum(np.abs(src) ** 2)))
    limit = INSTABILITY_FACTOR * source_amp

    drive_names = list(c.stimuli)
    drive_trace = np.zeros((len(drive_names), nsteps))
    firsts = np.array([m.first for m in c.monitors], dtype=np.intp)
    seconds = np.array([m.second for m in c.monitors], dtype=np.intp)
    p_fwd = np.zeros((len(c.monitors), nsteps))
    p_bwd = np.zeros((len(c.monitors), nsteps))
    pds = c.photodetectors
    pd_ports = np.array([p.ports[0] for p in pds], dtype=np.intp)
    pd_resp = np.array([p.model.responsivity for p in pds])
    filters = [cm.SinglePoleFilter(p.model.bandwidth_hz, dt) for p in pds]
    pd_trace = np.zeros((len(pds), nsteps))

    x = np.zeros(n0, dtype=np.complex128)
    a_del = np.zeros(n0, dtype=np.complex128)
    total_iter = 0
    for n in range(nsteps):
        t = n * dt
        if dynamic:
            drives = c.drive_values(t)
            for comp, p, target in dynamic:
                target[p, p] = component_block(c, comp, carrier_lambda, drives[comp.name])
        for j, name in enumerate(drive_names):
            drive_trace[j, n] = eval_stimulus(c.stimuli[name], t)

        if dports.size:
            a_del[dports] = history[(n - dk) % depth, dports]
        c0 = s_del @ a_del + src

        scale = max(source_amp, float(np.max(np.abs(c0))) if n0 else 0.0)
        for damping in (1.0, 0.5):
            y = x
            converged = False
            for it in range(max_iter):
                fy = c0 + s_inst @ y[pair]
                new = fy if damping == 1.0 else y + damping * (fy - y)
                delta = float(np.max(np.abs(new - y))) if n0 else 0.0
                y = new
                if delta <= tol * max(float(np.max(np.abs(y))) if n0 else 0.0, scale):
                    converged = True
                    break
            total_iter += it + 1
            if converged:
                break
        if not converged:
            loop = _loop_components(c, s_inst, pair)
            raise ConvergenceError(
                f"fixed point did not converge at t={t:.6g} s after {max_iter} iterations; "
                f"zero-delay loop through: {', '.join(loop) or 'unknown'}"
            )
        x = y
        if source_amp > 0 and n0 and float(np.max(np.abs(x))) > limit:
            raise InstabilityError(
                f"wave amplitude exceeded {INSTABILITY_FACTOR:g} x sqrt(source power) at t={t:.6g} s"
            )
        a = x[pair]
        history[n % depth] = a

        if firsts.size:
            p_fwd[:, n] = np.abs(x[firsts]) ** 2
            p_bwd[:, n] = np.abs(x[seconds]) ** 2
        if pds:
            inst = pd_resp * np.abs(a[pd_ports]) ** 2
            for j, f in enumerate(filters):
                pd_trace[j, n] = f.step(float(inst[j]))

    columns: dict[str, np.ndarray] = {}
    for j, name in enumerate(drive_names):
        columns[name] = drive_trace[j]
    for j, m in enumerate(c.monitors):
        columns[f"{m.name}.p_fwd_w"] = p_fwd[j]
        columns[f"{m.name}.p_bwd_w"] = p_bwd[j]
    for j, p in enumerate(pds):
        columns[f"{p.name}.i_a"] = pd_trace[j]
    return TransientResult(times, columns, warnings, total_iter)
