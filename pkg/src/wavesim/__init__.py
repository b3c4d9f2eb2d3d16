"""Bidirectional power-wave simulator for photonic integrated circuits."""
from .circuit import Circuit, elaborate, load_circuit, set_unidirectional
from .errors import (
    ConvergenceError,
    ElaborationError,
    InstabilityError,
    InvalidInputError,
    NetlistSyntaxError,
    SingularSystemError,
    SolverError,
    SParamParseError,
    WaveSimError,
)
from .frequency import solve_nodal, solve_wave, sweep, sweep2d
from .netlist import parse_netlist, print_netlist
from .presets import PRESETS, preset
from .transient import run_transient

__version__ = "0.1.0"

__all__ = [
    "Circuit", "elaborate", "load_circuit", "set_unidirectional",
    "ConvergenceError", "ElaborationError", "InstabilityError", "InvalidInputError",
    "NetlistSyntaxError", "SingularSystemError", "SolverError", "SParamParseError", "WaveSimError",
    "solve_nodal", "solve_wave", "sweep", "sweep2d",
    "parse_netlist", "print_netlist", "PRESETS", "preset", "run_transient",
]
