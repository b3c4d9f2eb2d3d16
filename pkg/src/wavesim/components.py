"""Device models.

Every model reduces, at a given wavelength and set of drive values, to a
dense S-matrix over its ports.  Lasers additionally inject an emitted wave at
their port; photodetectors read the incident wave.  Models carrying a length
also report a propagation delay for the transient engine.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from . import sparam
from .errors import InvalidInputError, UnsupportedConfigurationError

C0 = 299_792_458.0
DEFAULT_NG = 4.2
DEFAULT_LAMBDA0 = 1550e-9


def _field_gain(loss_db: float) -> float:
    return 10.0 ** (-loss_db / 20.0)


def _phase_two_port(gain: float, phi: float) -> np.ndarray:
    t = gain * np.exp(-1j * phi)
    return np.array([[0.0, t], [t, 0.0]], dtype=np.complex128)


class Device:
    """Base protocol for models usable in a circuit."""

    kind: ClassVar[str] = ""
    nports: ClassVar[int] = 0
    # Drive-able quantities (bound through ``.drive`` or sweeps).
    inputs: ClassVar[tuple[str, ...]] = ()
    # Validation flags the model's S-matrix is expected to satisfy.
    expected: ClassVar[tuple[str, ...]] = ("passive",)

    def smatrix(self, wavelength: float, drive: dict | None = None) -> np.ndarray:
        raise NotImplementedError

    def delay(self) -> float:
        return 0.0


@dataclass(frozen=True)
class LaserModel(Device):
    power: float = 1e-3
    wavelength0: float = DEFAULT_LAMBDA0
    phase: float = 0.0
    isolator: bool = True

    kind: ClassVar[str] = "laser"
    nports: ClassVar[int] = 1

    def __post_init__(self):
        if not self.power >= 0:
            raise InvalidInputError(f"laser power must be >= 0, got {self.power}")
        if not self.isolator:
            raise UnsupportedConfigurationError(
                "lasers without an isolator are not supported; back-injection physics is not modelled"
            )

    def smatrix(self, wavelength, drive=None):
        return np.zeros((1, 1), dtype=np.complex128)


def laser_emission(m: LaserModel) -> complex:
    if not m.isolator:
        raise UnsupportedConfigurationError("lasers without an isolator are not supported")
    return math.sqrt(m.power) * complex(math.cos(m.phase), math.sin(m.phase))


@dataclass(frozen=True)
class PhotodetectorModel(Device):
    responsivity: float = 1.0
    bandwidth_hz: float | None = None

    kind: ClassVar[str] = "pd"
    nports: ClassVar[int] = 1

    def __post_init__(self):
        if not self.responsivity >= 0:
            raise InvalidInputError("responsivity must be >= 0")
        if self.bandwidth_hz is not None and not self.bandwidth_hz > 0:
            raise InvalidInputError("photodetector bandwidth must be > 0")

    def smatrix(self, wavelength, drive=None):
        return np.zeros((1, 1), dtype=np.complex128)


def pd_read(m: PhotodetectorModel, a):
    """Instantaneous photocurrent for incident wave ``a``."""
    return m.responsivity * np.abs(a) ** 2


class SinglePoleFilter:
    """Backward-difference discretisation of ``tau*dy/dt = x - y``.

    Unconditionally stable; with no bandwidth the input passes straight through.
    """

    def __init__(self, bandwidth_hz: float | None, dt: float):
        if bandwidth_hz is None or math.isinf(bandwidth_hz):
            self.alpha = None
        else:
            self.alpha = 2.0 * math.pi * bandwidth_hz * dt
        self.y = 0.0

    def step(self, x: float) -> float:
        if self.alpha is None:
            self.y = x
        else:
            self.y = (self.y + self.alpha * x) / (1.0 + self.alpha)
        return self.y


@dataclass(frozen=True)
class ThermalPhaseShifterModel(Device):
    p_pi: float = 20e-3
    r_heater: float = 1000.0
    crosstalk_chi: float = 0.0
    insertion_loss_db: float = 0.0
    neighbor: str | None = None
    length: float = 0.0
    ng: float = DEFAULT_NG

    kind: ClassVar[str] = "ps_thermal"
    nports: ClassVar[int] = 2
    inputs: ClassVar[tuple[str, ...]] = ("v",)

    def __post_init__(self):
        if not self.p_pi > 0:
            raise InvalidInputError("p_pi must be > 0")
        if not self.r_heater > 0:
            raise InvalidInputError("r_heater must be > 0")
        if not 0.0 <= self.crosstalk_chi < 1.0:
            raise InvalidInputError("crosstalk chi must lie in [0, 1)")
        if self.length < 0:
            raise InvalidInputError("length must be >= 0")

    def smatrix(self, wavelength, drive=None):
        drive = drive or {}
        phi = thermal_phase(self, drive.get("v", 0.0), drive.get("v_neighbor", 0.0))
        return _phase_two_port(_field_gain(self.insertion_loss_db), phi)

    def delay(self):
        return self.ng * self.length / C0


def thermal_phase(m: ThermalPhaseShifterModel, v_self: float, v_neighbor: float = 0.0) -> float:
    p_self = v_self * v_self / m.r_heater
    p_neighbor = v_neighbor * v_neighbor / m.r_heater
    return math.pi * (p_self + m.crosstalk_chi * p_neighbor) / m.p_pi


@dataclass(frozen=True)
class DepletionPhaseShifterModel(Device):
    v_pi: float = 4.8
    length: float = 800e-6
    insertion_loss_db: float = 0.0
    ng: float = DEFAULT_NG

    kind: ClassVar[str] = "ps_pn"
    nports: ClassVar[int] = 2
    inputs: ClassVar[tuple[str, ...]] = ("v",)

    def __post_init__(self):
        if not self.v_pi > 0:
            raise InvalidInputError("v_pi must be > 0")
        if self.length < 0:
            raise InvalidInputError("length must be >= 0")

    def smatrix(self, wavelength, drive=None):
        phi = depletion_phase(self, (drive or {}).get("v", 0.0))
        return _phase_two_port(_field_gain(self.insertion_loss_db), phi)

    def delay(self):
        return self.ng * self.length / C0


def depletion_phase(m: DepletionPhaseShifterModel, v: float) -> float:
    # Linear law; a polynomial phi(V) would slot in here.
    return math.pi * v / m.v_pi


@dataclass(frozen=True)
class MonitorModel(Device):
    kind: ClassVar[str] = "monitor"
    nports: ClassVar[int] = 2
    expected: ClassVar[tuple[str, ...]] = ("passive", "lossless", "reciprocal")

    def smatrix(self, wavelength, drive=None):
        return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)


@dataclass(frozen=True)
class MonitorReading:
    p_fwd: float
    p_bwd: float
    phase_fwd: float
    phase_bwd: float


def _phase(z: complex) -> float:
    # Undefined for a dark signal; report 0 deterministically.
    return 0.0 if z == 0 else float(np.angle(z))


def monitor_read(forward: complex, backward: complex) -> MonitorReading:
    """Readout from the wave entering the monitor's first port (forward) and
    the wave entering its second port (backward)."""
    return MonitorReading(
        float(abs(forward) ** 2), float(abs(backward) ** 2), _phase(forward), _phase(backward)
    )


@dataclass(frozen=True)
class TerminatorModel(Device):
    reflectivity: complex = 0.0

    kind: ClassVar[str] = "term"
    nports: ClassVar[int] = 1

    def __post_init__(self):
        if abs(self.reflectivity) > 1.0:
            raise InvalidInputError(f"terminator |reflectivity| must be <= 1, got {abs(self.reflectivity)}")

    def smatrix(self, wavelength, drive=None):
        return np.array([[self.reflectivity]], dtype=np.complex128)


# --- passive devices backed by the sparam generators -------------------------

@dataclass(frozen=True)
class WaveguideModel(Device):
    length: float = 0.0
    neff: float = 2.4
    ng: float = DEFAULT_NG
    lambda0: float = DEFAULT_LAMBDA0
    loss: float = 0.0  # dB/cm

    kind: ClassVar[str] = "wg"
    nports: ClassVar[int] = 2
    expected: ClassVar[tuple[str, ...]] = ("passive", "reciprocal")

    def __post_init__(self):
        if self.length < 0:
            raise InvalidInputError("waveguide length must be >= 0")

    def smatrix(self, wavelength, drive=None):
        return sparam.gen_waveguide(self.length, self.neff, self.ng, self.lambda0, self.loss, wavelength).data

    def delay(self):
        return self.ng * self.length / C0


@dataclass(frozen=True)
class CouplerModel(Device):
    kappa: float = 0.5
    loss: float = 0.0  # excess loss, dB
    imbalance: float = 0.0

    kind: ClassVar[str] = "dc"
    nports: ClassVar[int] = 4
    expected: ClassVar[tuple[str, ...]] = ("passive", "reciprocal")

    def __post_init__(self):
        if not 0.0 <= self.kappa <= 1.0:
            raise InvalidInputError(f"kappa must be in [0, 1], got {self.kappa}")

    def smatrix(self, wavelength, drive=None):
        return sparam.gen_directional_coupler(self.kappa, self.loss, self.imbalance).data


@dataclass(frozen=True)
class YBranchModel(Device):
    loss: float = 0.0

    kind: ClassVar[str] = "ybranch"
    nports: ClassVar[int] = 3
    expected: ClassVar[tuple[str, ...]] = ("passive", "reciprocal")

    def smatrix(self, wavelength, drive=None):
        return sparam.gen_y_branch(self.loss).data


@dataclass(frozen=True)
class BraggModel(Device):
    """Uniform grating described by its mean index, index contrast and pitch."""

    periods: int = 120
    nbar: float = 2.4306
    dn: float = 0.06
    pitch: float = 317e-9
    duty: float = 0.5
    mirror: bool = False

    kind: ClassVar[str] = "bragg"
    nports: ClassVar[int] = 2
    expected: ClassVar[tuple[str, ...]] = ("passive", "lossless", "reciprocal")

    def __post_init__(self):
        if int(self.periods) != self.periods or self.periods < 1:
            raise InvalidInputError("periods must be a positive integer")
        if not 0.0 <= self.duty <= 1.0:
            raise InvalidInputError("duty must be in [0, 1]")
        if self.pitch <= 0:
            raise InvalidInputError("pitch must be > 0")
        object.__setattr__(self, "periods", int(self.periods))

    @property
    def layers(self) -> tuple[float, float, float, float]:
        """(n1, n2, w1, w2) with length-weighted mean index ``nbar`` at 50% duty."""
        n1 = self.nbar + self.dn / 2.0
        n2 = self.nbar - self.dn / 2.0
        w1 = self.duty * self.pitch
        return n1, n2, w1, self.pitch - w1

    def smatrix(self, wavelength, drive=None):
        n1, n2, w1, w2 = self.layers
        return sparam.gen_bragg_reflector(self.periods, n1, n2, w1, w2, wavelength, self.mirror).data


@dataclass(frozen=True, eq=False)
class SParamFileModel(Device):
    table: sparam.SParamTable
    path: str = ""

    kind: ClassVar[str] = "spfile"

    @property
    def nports(self) -> int:
        return self.table.n

    def smatrix(self, wavelength, drive=None):
        return sparam.interpolate(self.table, wavelength).data


MODEL_TYPES: dict[str, type[Device]] = {
    cls.kind: cls
    for cls in (
        LaserModel, PhotodetectorModel, WaveguideModel, CouplerModel, YBranchModel, BraggModel,
        ThermalPhaseShifterModel, DepletionPhaseShifterModel, TerminatorModel, SParamFileModel,
    )
}
