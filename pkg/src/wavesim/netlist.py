"""Line-oriented netlist language: AST, parser and canonical printer.

Grammar (``#`` starts a comment)::

    .param <name> <number>
    <type> <name> ( <net> ... ) [key=value ...]
    .monitor <name> <net>
    .drive <instance>.<param> dc(v) | pwl(t0 v0 t1 v1 ...) | square(v_lo v_hi period duty t_rise)
    .crosstalk <psA> <psB> <chi>
    .end

Attribute values are decimal numbers or bare words (parameter names, file
paths).  Parameters are substituted by name only; there is no expression
evaluation.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import NetlistSyntaxError

# Port counts; None means "decided by the device" (s-parameter files).
ARITY: dict[str, int | None] = {
    "laser": 1,
    "pd": 1,
    "wg": 2,
    "dc": 4,
    "ybranch": 3,
    "bragg": 2,
    "ps_thermal": 2,
    "ps_pn": 2,
    "term": 1,
    "spfile": None,
}

Value = float | str

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_NAME_RE = re.compile(rf"^{_NAME}$")
_INSTANCE_RE = re.compile(r"^(\S+)\s+(\S+)\s*\(([^()]*)\)\s*(.*)$")
_DRIVE_RE = re.compile(rf"^({_NAME})\.({_NAME})\s+({_NAME})\s*\(([^()]*)\)\s*$")


@dataclass
class Instance:
    type: str
    name: str
    nets: tuple[str, ...]
    attrs: dict[str, Value] = field(default_factory=dict)
    line: int | None = field(default=None, compare=False)


@dataclass
class MonitorDecl:
    name: str
    net: str
    line: int | None = field(default=None, compare=False)


@dataclass
class DriveDecl:
    instance: str
    param: str
    kind: str
    args: tuple[float, ...]
    line: int | None = field(default=None, compare=False)

    @property
    def target(self) -> str:
        return f"{self.instance}.{self.param}"


@dataclass
class CrosstalkDecl:
    a: str
    b: str
    chi: Value
    line: int | None = field(default=None, compare=False)


@dataclass
class Netlist:
    params: dict[str, float] = field(default_factory=dict)
    instances: list[Instance] = field(default_factory=list)
    monitors: list[MonitorDecl] = field(default_factory=list)
    drives: list[DriveDecl] = field(default_factory=list)
    crosstalk: list[CrosstalkDecl] = field(default_factory=list)

    def instance(self, name: str) -> Instance:
        for inst in self.instances:
            if inst.name == name:
                return inst
        raise KeyError(name)


def parse_number(token: str) -> float:
    return float(token)


def _value(token: str) -> Value:
    try:
        return parse_number(token)
    except ValueError:
        return token


def _split_args(body: str) -> list[str]:
    return [t for t in re.split(r"[\s,]+", body.strip()) if t]


def parse_netlist(text: str) -> Netlist:
    nl = Netlist()
    names: set[str] = set()
    monitor_names: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.lstrip()
        if not stripped:
            continue
        indent = len(line) - len(stripped)

        def err(msg: str, token: str | None = None) -> NetlistSyntaxError:
            col = indent + 1
            if token is not None and token in stripped:
                col = indent + stripped.index(token) + 1
            return NetlistSyntaxError(msg, lineno, col)

        if stripped.startswith("."):
            directive, _, rest = stripped.partition(" ")
            rest = rest.strip()
            if directive == ".end":
                if rest:
                    raise err(".end takes no arguments", rest)
                break
            if directive == ".param":
                parts = rest.split()
                if len(parts) != 2 or not _NAME_RE.match(parts[0]):
                    raise err("expected '.param <name> <number>'")
                try:
                    nl.params[parts[0]] = parse_number(parts[1])
                except ValueError:
                    raise err(f"parameter value {parts[1]!r} is not a number", parts[1]) from None
            elif directive == ".monitor":
                parts = rest.split()
                if len(parts) != 2:
                    raise err("expected '.monitor <name> <net>'")
                if parts[0] in monitor_names or parts[0] in names:
                    raise err(f"duplicate name {parts[0]!r}", parts[0])
                monitor_names.add(parts[0])
                nl.monitors.append(MonitorDecl(parts[0], parts[1], lineno))
            elif directive == ".drive":
                m = _DRIVE_RE.match(rest)
                if not m:
                    raise err("expected '.drive <instance>.<param> kind(args)'")
                inst, param, kind, body = m.groups()
                if kind not in ("dc", "pwl", "square"):
                    raise err(f"unknown stimulus kind {kind!r}", kind)
                try:
                    args = tuple(parse_number(t) for t in _split_args(body))
                except ValueError as exc:
                    raise err(f"bad stimulus argument: {exc}", body.strip() or None) from None
                nl.drives.append(DriveDecl(inst, param, kind, args, lineno))
            elif directive == ".crosstalk":
                parts = rest.split()
                if len(parts) != 3:
                    raise err("expected '.crosstalk <psA> <psB> <chi>'")
                nl.crosstalk.append(CrosstalkDecl(parts[0], parts[1], _value(parts[2]), lineno))
            else:
                raise err(f"unknown directive {directive!r}", directive)
            continue

        m = _INSTANCE_RE.match(stripped)
        if not m:
            raise err("expected '<type> <name> ( <net> ... ) [key=value ...]'")
        typ, name, net_body, attr_body = m.groups()
        if typ not in ARITY:
            raise err(f"unknown component type {typ!r}", typ)
        if not _NAME_RE.match(name):
            raise err(f"invalid instance name {name!r}", name)
        if name in names or name in monitor_names:
            raise err(f"duplicate instance name {name!r}", name)
        nets = tuple(net_body.split())
        arity = ARITY[typ]
        if arity is not None and len(nets) != arity:
            raise err(f"{typ} requires {arity} nets, got {len(nets)}", "(")
        if arity is None and not nets:
            raise err(f"{typ} requires at least one net", "(")
        attrs: dict[str, Value] = {}
        for tok in attr_body.split():
            key, eq, val = tok.partition("=")
            if not eq or not _NAME_RE.match(key) or not val:
                raise err(f"expected key=value, got {tok!r}", tok)
            if key in attrs:
                raise err(f"duplicate attribute {key!r}", tok)
            attrs[key] = _value(val)
        names.add(name)
        nl.instances.append(Instance(typ, name, nets, attrs, lineno))
    return nl


def _fmt(v: Value) -> str:
    if isinstance(v, str):
        return v
    return repr(float(v))


def print_netlist(nl: Netlist) -> str:
    """Canonical text form; ``parse_netlist(print_netlist(x)) == x``."""
    out = []
    for k, v in nl.params.items():
        out.append(f".param {k} {_fmt(v)}")
    for inst in nl.instances:
        line = f"{inst.type} {inst.name} ({' '.join(inst.nets)})"
        if inst.attrs:
            line += " " + " ".join(f"{k}={_fmt(v)}" for k, v in inst.attrs.items())
        out.append(line)
    for mon in nl.monitors:
        out.append(f".monitor {mon.name} {mon.net}")
    for d in nl.drives:
        out.append(f".drive {d.target} {d.kind}({' '.join(_fmt(a) for a in d.args)})")
    for x in nl.crosstalk:
        out.append(f".crosstalk {x.a} {x.b} {_fmt(x.chi)}")
    out.append(".end")
    return "\n".join(out) + "\n"
