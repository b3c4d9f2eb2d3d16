"""Power-wave algebra for ports with a real reference impedance.

Currents are positive *into* the component port, so ``a`` is the wave incident
on the component and ``b`` the wave it emits.  All quantities are complex
baseband envelopes; wave amplitudes are in sqrt(W).

The helpers accept scalars or numpy arrays alike.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

DEFAULT_RR = 1.0


def _require_finite(name: str, value) -> None:
    if not np.all(np.isfinite(value)):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class ReferenceImpedance:
    """Purely resistive reference impedance shared by all ports of a circuit."""

    r: float = DEFAULT_RR

    def __post_init__(self):
        r = float(self.r)
        if not math.isfinite(r) or r <= 0.0:
            raise InvalidInputError(f"reference impedance must be positive and finite, got {self.r!r}")
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class WavePair:
    a: complex
    b: complex

    def __post_init__(self):
        _require_finite("a", self.a)
        _require_finite("b", self.b)


@dataclass(frozen=True)
class PortElectricals:
    v: complex
    i: complex

    def __post_init__(self):
        _require_finite("v", self.v)
        _require_finite("i", self.i)


def _r(zr: ReferenceImpedance | float) -> float:
    if isinstance(zr, ReferenceImpedance):
        return zr.r
    return ReferenceImpedance(zr).r


def vi_to_waves(pe: PortElectricals, zr: ReferenceImpedance | float) -> WavePair:
    r = _r(zr)
    sr = math.sqrt(r)
    return WavePair((pe.v + r * pe.i) / (2 * sr), (pe.v - r * pe.i) / (2 * sr))


def waves_to_vi(w: WavePair, zr: ReferenceImpedance | float) -> PortElectricals:
    r = _r(zr)
    sr = math.sqrt(r)
    return PortElectricals(sr * (w.a + w.b), (w.a - w.b) / sr)


def thevenin_source(b, zr: ReferenceImpedance | float):
    """Open-circuit voltage E of a port that must emit wave ``b``.

    The port is a source E in series with the reference resistance, i.e.
    ``V = r*I + E``; plugging that into the outgoing-wave definition gives
    back ``b`` independently of the current.
    """
    _require_finite("b", b)
    return 2.0 * math.sqrt(_r(zr)) * b


def reflection_coefficient(z_load, zr: ReferenceImpedance | float):
    r = _r(zr)
    _require_finite("z_load", z_load)
    den = z_load + r
    if np.any(den == 0):
        raise ZeroDivisionError(f"load impedance {z_load!r} equals -r; reflection coefficient undefined")
    return (z_load - r) / den
