"""Elaboration of a parsed netlist into a solvable circuit.

Ports are numbered globally by instance declaration order, then port order
within the instance.  Monitors are spliced into their nets
(``X`` becomes ``X_a -- monitor -- X_b``) and their ports are numbered after
all instance ports, so the device ports ``0..n_device_ports-1`` are laid out
identically whether or not monitors are present.
"""
from __future__ import annotations

import cmath
import dataclasses
import os
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import components as cm
from . import sparam
from .errors import ElaborationError, InvalidInputError, SParamParseError, WaveSimError
from .netlist import Netlist, Value
from .stimulus import Stimulus, eval_stimulus
from .waves import DEFAULT_RR, ReferenceImpedance

# netlist attribute -> model field, per component type
_ATTRS: dict[str, dict[str, str]] = {
    "laser": {"power": "power", "wavelength0": "wavelength0", "phase": "phase", "isolator": "isolator"},
    "pd": {"responsivity": "responsivity", "bandwidth": "bandwidth_hz"},
    "wg": {"length": "length", "neff": "neff", "ng": "ng", "lambda0": "lambda0", "loss": "loss"},
    "dc": {"kappa": "kappa", "loss": "loss", "imbalance": "imbalance"},
    "ybranch": {"loss": "loss"},
    "bragg": {"periods": "periods", "nbar": "nbar", "dn": "dn", "pitch": "pitch", "duty": "duty",
              "mirror": "mirror"},
    "ps_thermal": {"p_pi": "p_pi", "r_heater": "r_heater", "loss": "insertion_loss_db",
                   "length": "length", "ng": "ng"},
    "ps_pn": {"v_pi": "v_pi", "length": "length", "loss": "insertion_loss_db", "ng": "ng"},
    "term": {},
    "spfile": {},
}
_BOOL_FIELDS = {"isolator", "mirror"}


@dataclass(frozen=True, eq=False)
class Component:
    name: str
    kind: str
    model: cm.Device
    ports: tuple[int, ...]
    nets: tuple[str, ...]
    defaults: dict[str, float] = field(default_factory=dict)

    @property
    def nports(self) -> int:
        return len(self.ports)


@dataclass(frozen=True, eq=False)
class MonitorSite:
    """A monitor spliced into ``net``.

    ``ports`` are the monitor's own (left, right) port numbers; ``first`` and
    ``second`` are the device ports the net originally joined, in declaration
    order.  Forward means travel from ``first`` towards ``second``.
    """

    name: str
    net: str
    ports: tuple[int, int]
    first: int
    second: int


@dataclass(frozen=True, eq=False)
class Circuit:
    components: tuple[Component, ...]
    monitors: tuple[MonitorSite, ...]
    pairing: np.ndarray
    device_pairing: np.ndarray
    rr: float = DEFAULT_RR
    stimuli: dict[str, Stimulus] = field(default_factory=dict)
    unidirectional: bool = False

    @property
    def nports(self) -> int:
        return int(self.pairing.size)

    @property
    def n_device_ports(self) -> int:
        return int(self.device_pairing.size)

    def component(self, name: str) -> Component:
        for c in self.components:
            if c.name == name:
                return c
        raise KeyError(name)

    def of_kind(self, kind: str) -> list[Component]:
        return [c for c in self.components if c.kind == kind]

    @property
    def lasers(self) -> list[Component]:
        return self.of_kind("laser")

    @property
    def photodetectors(self) -> list[Component]:
        return self.of_kind("pd")

    def bindings(self) -> list[str]:
        """Every ``instance.param`` name that drives or sweeps may target."""
        return [f"{c.name}.{p}" for c in self.components for p in c.model.inputs]

    def drive_values(self, t: float = 0.0, overrides: dict[str, float] | None = None) -> dict[str, dict]:
        """Input values per driven component at time ``t``.

        Frequency-domain solves use ``t = 0``.  ``overrides`` (keyed
        ``instance.param``) take precedence over stimuli and attributes.
        """
        overrides = overrides or {}
        values: dict[str, dict] = {}
        for c in self.components:
            if not c.model.inputs:
                continue
            d = {}
            for p in c.model.inputs:
                key = f"{c.name}.{p}"
                if key in overrides:
                    d[p] = float(overrides[key])
                elif key in self.stimuli:
                    d[p] = eval_stimulus(self.stimuli[key], t)
                else:
                    d[p] = c.defaults.get(p, 0.0)
            values[c.name] = d
        for c in self.components:
            nb = getattr(c.model, "neighbor", None)
            if nb is not None:
                values[c.name]["v_neighbor"] = values[nb]["v"]
        return values

    def check_bindings(self, names) -> None:
        valid = set(self.bindings())
        for n in names:
            if n not in valid:
                raise ElaborationError(
                    f"unknown parameter binding {n!r}; valid bindings: {', '.join(sorted(valid)) or 'none'}"
                )


def set_unidirectional(c: Circuit) -> Circuit:
    """Copy of ``c`` solved with forward-only component responses.

    In every component the first ``n // 2`` ports are inputs and the rest are
    outputs; only input-to-output transmissions survive.  Monitors stay
    transparent.
    """
    return dataclasses.replace(c, unidirectional=True)


def forward_mask(n: int) -> np.ndarray:
    mask = np.zeros((n, n), dtype=bool)
    k = n // 2
    mask[k:, :k] = True
    return mask


def _resolve(v: Value, params: dict[str, float], inst, key: str):
    if isinstance(v, str):
        if v in params:
            return params[v]
        if key == "path":
            return v
        raise ElaborationError(f"{inst.name}: attribute {key}={v!r} is neither a number nor a known .param")
    return v


def _build_model(inst, attrs: dict, base_dir: str | None) -> tuple[cm.Device, dict[str, float]]:
    kind = inst.type
    cls = cm.MODEL_TYPES[kind]
    defaults = {p: float(attrs.pop(p)) for p in cls.inputs if p in attrs}
    try:
        if kind == "term":
            refl = float(attrs.pop("reflectivity", 0.0))
            phase = float(attrs.pop("phase", 0.0))
            _reject_unknown(inst, attrs, ["reflectivity", "phase"])
            return cm.TerminatorModel(refl * cmath.exp(1j * phase) if phase else complex(refl)), defaults
        if kind == "spfile":
            path = attrs.pop("path", None)
            _reject_unknown(inst, attrs, ["path"])
            if path is None:
                raise ElaborationError(f"{inst.name}: spfile needs path=<file>")
            full = path if os.path.isabs(path) or base_dir is None else os.path.join(base_dir, path)
            try:
                table = sparam.load_table(full)
            except OSError as exc:
                raise ElaborationError(f"{inst.name}: cannot read {full}: {exc.strerror}") from None
            except SParamParseError as exc:
                raise ElaborationError(f"{inst.name}: {full}: {exc}") from None
            if table.n != len(inst.nets):
                raise ElaborationError(
                    f"{inst.name}: table has {table.n} ports but {len(inst.nets)} nets are connected"
                )
            return cm.SParamFileModel(table, path), defaults
        mapping = _ATTRS[kind]
        _reject_unknown(inst, attrs, list(mapping) + list(cls.inputs))
        kwargs = {}
        for key, val in attrs.items():
            fld = mapping[key]
            kwargs[fld] = bool(val) if fld in _BOOL_FIELDS else float(val)
        return cls(**kwargs), defaults
    except (InvalidInputError, WaveSimError) as exc:
        if isinstance(exc, ElaborationError):
            raise
        raise ElaborationError(f"{inst.name}: {exc}") from None


def _reject_unknown(inst, attrs: dict, valid) -> None:
    unknown = sorted(set(attrs) - set(valid))
    if unknown:
        raise ElaborationError(
            f"{inst.name}: unknown attribute(s) {', '.join(unknown)} for {inst.type}; "
            f"valid: {', '.join(sorted(valid)) or 'none'}"
        )


def elaborate(nl: Netlist, base_dir: str | None = None, rr: float | None = None) -> Circuit:
    params = dict(nl.params)
    if rr is None:
        rr = params.get("RR", DEFAULT_RR)
    try:
        rr = ReferenceImpedance(rr).r
    except InvalidInputError as exc:
        raise ElaborationError(str(exc)) from None

    comps: list[Component] = []
    endpoints: dict[str, list[int]] = defaultdict(list)
    next_port = 0
    for inst in nl.instances:
        attrs = {k: _resolve(v, params, inst, k) for k, v in inst.attrs.items()}
        model, defaults = _build_model(inst, attrs, base_dir)
        ports = tuple(range(next_port, next_port + len(inst.nets)))
        next_port += len(inst.nets)
        for net, p in zip(inst.nets, ports):
            endpoints[net].append(p)
        comps.append(Component(inst.name, inst.type, model, ports, inst.nets, defaults))

    n_dev = next_port
    device_pairing = np.full(n_dev, -1, dtype=np.intp)
    for net, eps in endpoints.items():
        if len(eps) == 1:
            raise ElaborationError(f"unterminated net {net!r}: only one endpoint (close it with a 'term')")
        if len(eps) > 2:
            raise ElaborationError(f"multi-drop net {net!r} unsupported: {len(eps)} endpoints (use a ybranch or dc)")
        p, q = eps
        device_pairing[p] = q
        device_pairing[q] = p

    by_name = {c.name: c for c in comps}
    monitors: list[MonitorSite] = []
    pairing = np.concatenate([device_pairing, np.full(2 * len(nl.monitors), -1, dtype=np.intp)])
    chain_tail: dict[str, int] = {}
    for mon in nl.monitors:
        if mon.net not in endpoints:
            raise ElaborationError(f"monitor {mon.name!r} references unknown net {mon.net!r}")
        first, second = endpoints[mon.net]
        left, right = next_port, next_port + 1
        next_port += 2
        tail = chain_tail.get(mon.net, first)
        pairing[tail] = left
        pairing[left] = tail
        pairing[right] = second
        pairing[second] = right
        chain_tail[mon.net] = right
        monitors.append(MonitorSite(mon.name, mon.net, (left, right), first, second))

    stimuli: dict[str, Stimulus] = {}
    for d in nl.drives:
        if d.instance not in by_name:
            raise ElaborationError(f"drive {d.target!r} references unknown instance {d.instance!r}")
        if d.param not in by_name[d.instance].model.inputs:
            valid = by_name[d.instance].model.inputs
            raise ElaborationError(
                f"drive {d.target!r}: {by_name[d.instance].kind} has no drivable input {d.param!r}"
                f" (valid: {', '.join(valid) or 'none'})"
            )
        if d.target in stimuli:
            raise ElaborationError(f"input {d.target!r} driven twice")
        try:
            stimuli[d.target] = Stimulus(d.kind, d.args)
        except InvalidInputError as exc:
            raise ElaborationError(f"drive {d.target!r}: {exc}") from None

    for x in nl.crosstalk:
        chi = x.chi
        if isinstance(chi, str):
            if chi not in params:
                raise ElaborationError(f"crosstalk {x.a}-{x.b}: unknown parameter {chi!r}")
            chi = params[chi]
        for self_name, other in ((x.a, x.b), (x.b, x.a)):
            c = by_name.get(self_name)
            if c is None:
                raise ElaborationError(f"crosstalk references unknown instance {self_name!r}")
            if c.kind != "ps_thermal":
                raise ElaborationError(f"crosstalk: {self_name!r} is a {c.kind}, not a ps_thermal")
            if c.model.neighbor is not None:
                raise ElaborationError(f"crosstalk: {self_name!r} already has neighbor {c.model.neighbor!r}")
            try:
                model = dataclasses.replace(c.model, neighbor=other, crosstalk_chi=float(chi))
            except InvalidInputError as exc:
                raise ElaborationError(f"crosstalk {x.a}-{x.b}: {exc}") from None
            by_name[self_name] = dataclasses.replace(c, model=model)
    comps = [by_name[c.name] for c in comps]

    pairing.setflags(write=False)
    device_pairing.setflags(write=False)
    return Circuit(tuple(comps), tuple(monitors), pairing, device_pairing, rr, stimuli)


def load_circuit(path: str, rr: float | None = None) -> Circuit:
    from .netlist import parse_netlist

    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return elaborate(parse_netlist(text), base_dir=os.path.dirname(os.path.abspath(path)), rr=rr)
