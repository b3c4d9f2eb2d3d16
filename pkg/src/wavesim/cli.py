"""``wavesim`` command-line front end.

Data (CSV, netlists) goes to ``--out`` or standard output; summaries and
warnings go to standard error.

Exit codes: 0 success, 1 validation failure, 2 solver failure, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import components as cm
from . import frequency, sparam
from .circuit import Circuit, elaborate, load_circuit, set_unidirectional
from .errors import SolverError, WaveSimError
from .netlist import parse_netlist
from .presets import PRESETS, preset
from .transient import run_transient

log = logging.getLogger("wavesim")

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _summary(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc.strerror or exc}", EXIT_IO) from None


def _load(args) -> Circuit:
    if args.preset:
        try:
            text = preset(args.preset)
        except KeyError as exc:
            raise CliError(exc.args[0], EXIT_VALIDATION) from None
        c = elaborate(parse_netlist(text), rr=args.rr)
    else:
        try:
            c = load_circuit(args.netlist, rr=args.rr)
        except OSError as exc:
            raise CliError(f"cannot read {args.netlist}: {exc.strerror or exc}", EXIT_IO) from None
    if getattr(args, "unidirectional", False):
        c = set_unidirectional(c)
    return c


def _carrier(c: Circuit, value: float | None) -> float:
    if value is not None:
        return value
    lasers = c.lasers
    return lasers[0].model.wavelength0 if lasers else cm.DEFAULT_LAMBDA0


def _param_range(spec: str) -> tuple[str, np.ndarray]:
    name, eq, rng = spec.partition("=")
    parts = rng.split(":")
    if not eq or len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected NAME=lo:hi:count, got {spec!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range in {spec!r}") from None
    if count < 1:
        raise argparse.ArgumentTypeError(f"count must be >= 1 in {spec!r}")
    return name.strip(), np.linspace(lo, hi, count)


# --- subcommands ------------------------------------------------------------

def cmd_check(args) -> int:
    c = _load(args)
    wl = _carrier(c, None)
    drives = c.drive_values(0.0)
    errors = warnings = 0
    for comp in c.components:
        model = comp.model
        if isinstance(model, cm.SParamFileModel):
            mats = [(w, m) for w, m in zip(model.table.wavelengths, model.table.matrices)]
        else:
            mats = [(wl, model.smatrix(wl, drives.get(comp.name)))]
        for w, m in mats:
            rep = sparam.validate(sparam.SMatrix(m), model.expected)
            for flag in rep.failures():
                if flag == "passive":
                    errors += 1
                    _summary(f"error: {comp.name}: passivity violation at {w:.6g} m, "
                             f"max singular value {rep.max_singular_value:.6g}")
                else:
                    warnings += 1
                    detail = rep.unitarity_error if flag == "lossless" else rep.reciprocity_error
                    _summary(f"warning: {comp.name}: not {flag} at {w:.6g} m (error {detail:.3g})")
    _summary(f"{len(c.components)} components, {len(c.monitors)} monitors, "
             f"{c.nports} ports: {errors} error(s), {warnings} warning(s)")
    return EXIT_VALIDATION if errors else EXIT_OK


def cmd_sweep(args) -> int:
    c = _load(args)
    res = frequency.sweep(c, args.start, args.stop, args.points, method=args.solver)
    _write(res.to_csv(), args.out)
    if res.failures == len(res.status):
        _summary(f"error: all {len(res.status)} points failed: {res.status[0]}")
        return EXIT_SOLVER
    if res.failures:
        _summary(f"warning: {res.failures} of {len(res.status)} points failed")
    for m in c.monitors:
        for q in ("p_fwd", "p_bwd"):
            p = res.monitor(m.name, q)
            if np.all(np.isnan(p)):
                continue
            k = int(np.nanargmax(p))
            _summary(f"{m.name}.{q}: peak {p[k]:.6g} W at {res.wavelengths[k]:.9g} m")
    return EXIT_OK


def cmd_sweep2d(args) -> int:
    if len(args.param) != 2:
        raise CliError("sweep2d needs exactly two --param options", EXIT_VALIDATION)
    c = _load(args)
    monitor = args.monitor or (c.monitors[0].name if c.monitors else None)
    if monitor is None or monitor not in {m.name for m in c.monitors}:
        raise CliError(f"no such monitor {args.monitor!r}", EXIT_VALIDATION)
    wl = _carrier(c, args.wavelength)
    res = frequency.sweep2d(c, args.param[0], args.param[1], wl, method=args.solver)
    _write(res.to_csv(), args.out)
    failed = sum(s != "ok" for s in res.status)
    if failed == len(res.status):
        _summary(f"error: all {failed} points failed: {res.status[0]}")
        return EXIT_SOLVER
    if failed:
        _summary(f"warning: {failed} of {len(res.status)} points failed")
    i, j = res.argmin(monitor, "p_bwd")
    g = res.grid(monitor, "p_bwd")
    _summary(f"{monitor}.p_bwd: min {g[i, j]:.6g} W at cell ({i}, {j}), "
             f"{res.names[0]}={res.values[0][i]:.6g} {res.names[1]}={res.values[1][j]:.6g}")
    return EXIT_OK


def cmd_transient(args) -> int:
    c = _load(args)
    res = run_transient(c, args.tstop, args.dt, _carrier(c, args.wavelength))
    _write(res.to_csv(args.decimate), args.out)
    for name, col in res.columns.items():
        if name.endswith(("_w", ".i_a")):
            _summary(f"{name}: final {col[-1]:.6g}, min {col.min():.6g}, max {col.max():.6g}")
    return EXIT_OK


def cmd_preset(args) -> int:
    try:
        text = preset(args.name)
    except KeyError as exc:
        raise CliError(exc.args[0], EXIT_VALIDATION) from None
    _write(text, args.out)
    return EXIT_OK


# --- argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wavesim", description="Bidirectional power-wave photonic circuit simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group(required=True)
    src.add_argument("--netlist", help="netlist file")
    src.add_argument("--preset", help=f"built-in testbench ({', '.join(sorted(PRESETS))})")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--rr", type=float, help="reference impedance override (ohm)")
    common.add_argument("--unidirectional", action="store_true", help="keep forward transmissions only")
    common.add_argument("--solver", choices=sorted(frequency.SOLVERS), default="wave")

    p = sub.add_parser("check", parents=[common], help="parse, elaborate and validate a netlist")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", parents=[common], help="wavelength sweep")
    p.add_argument("--start", type=float, required=True, help="first wavelength (m)")
    p.add_argument("--stop", type=float, required=True, help="last wavelength (m)")
    p.add_argument("--points", type=int, required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sweep2d", parents=[common], help="2-D sweep of two drive parameters")
    p.add_argument("--param", type=_param_range, action="append", default=[],
                   metavar="NAME=lo:hi:count", help="give twice; the first is the outer (row) axis")
    p.add_argument("--lambda", dest="wavelength", type=float, help="wavelength (m); default: laser wavelength")
    p.add_argument("--monitor", help="monitor reported in the summary (default: first)")
    p.set_defaults(func=cmd_sweep2d)

    p = sub.add_parser("transient", parents=[common], help="time-domain envelope simulation")
    p.add_argument("--tstop", type=float, required=True, help="end time (s)")
    p.add_argument("--dt", type=float, required=True, help="time step (s)")
    p.add_argument("--lambda", dest="wavelength", type=float, help="carrier wavelength (m); default: laser wavelength")
    p.add_argument("--decimate", type=int, default=1, help="write every Nth step")
    p.set_defaults(func=cmd_transient)

    p = sub.add_parser("preset", help="write a built-in testbench netlist")
    p.add_argument("name", help=", ".join(sorted(PRESETS)))
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_preset)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("warning: %(message)s"))
    log.addHandler(handler)
    if log.level == logging.NOTSET:
        log.setLevel(logging.WARNING)
    try:
        return args.func(args)
    except CliError as exc:
        _summary(f"error: {exc}")
        return exc.code
    except SolverError as exc:
        _summary(f"error: {exc}")
        return EXIT_SOLVER
    except WaveSimError as exc:
        _summary(f"error: {exc}")
        return EXIT_VALIDATION
    except ValueError as exc:  # remaining malformed numeric input
        _summary(f"error: {exc}")
        return EXIT_VALIDATION
    finally:
        log.removeHandler(handler)


if __name__ == "__main__":
    sys.exit(main())
