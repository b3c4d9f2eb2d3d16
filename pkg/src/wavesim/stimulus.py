"""Drive waveforms (volts versus seconds) bound to device inputs."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

@dataclass(frozen=True)
class Stimulus:
    kind: str
    args: tuple[float, ...]

    def __post_init__(self):
        args = tuple(float(x) for x in self.args)
        object.__setattr__(self, "args", args)
        if not all(math.isfinite(x) for x in args):
            raise InvalidInputError(f"{self.kind} stimulus arguments must be finite")
        if self.kind == "dc":
            if len(args) != 1:
                raise InvalidInputError("dc() takes exactly one value")
        elif self.kind == "pwl":
            if len(args) < 2 or len(args) % 2:
                raise InvalidInputError("pwl() takes pairs of (time, value)")
            times = args[0::2]
            if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
                raise InvalidInputError("pwl() times must be strictly ascending")
        elif self.kind == "square":
            if len(args) != 5:
                raise InvalidInputError("square() takes v_lo v_hi period duty t_rise")
            _, _, period, duty, t_rise = args
            if period <= 0:
                raise InvalidInputError("square() period must be > 0")
            if not 0.0 < duty < 1.0:
                raise InvalidInputError("square() duty must be in (0, 1)")
            if t_rise < 0:
                raise InvalidInputError("square() t_rise must be >= 0")
            if t_rise > min(duty, 1.0 - duty) * period:
                raise InvalidInputError("square() t_rise longer than a half-period")
        else:
            raise InvalidInputError(f"unknown stimulus kind {self.kind!r}")

    @classmethod
    def dc(cls, v: float) -> "Stimulus":
        return cls("dc", (v,))


def eval_stimulus(s: Stimulus, t: float) -> float:
    if s.kind == "dc":
        return s.args[0]
    if s.kind == "pwl":
        return float(np.interp(t, s.args[0::2], s.args[1::2]))
    v_lo, v_hi, period, duty, t_rise = s.args
    tau = t % period
    t_high = duty * period
    if tau < t_rise:
        return v_lo + (v_hi - v_lo) * tau / t_rise
    if tau < t_high:
        return v_hi
    if tau < t_high + t_rise:
        return v_hi - (v_hi - v_lo) * (tau - t_high) / t_rise
    return v_lo
