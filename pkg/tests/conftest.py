import math

import numpy as np
import pytest

from wavesim.circuit import elaborate
from wavesim.netlist import parse_netlist
from wavesim.presets import preset

C0 = 299792458.0


def build(text, **kw):
    return elaborate(parse_netlist(text), **kw)


def wg_transmission(length, neff0, ng, lambda0, loss_db_cm, wl):
    """Independent scalar waveguide model used as a test oracle."""
    neff = neff0 - (ng - neff0) * (wl - lambda0) / lambda0
    return 10 ** (-loss_db_cm * length * 100 / 20) * np.exp(-2j * math.pi * neff * length / wl)


def mi_oracle(wl, kappa=0.5, power=1e-3, l1=100e-6, l2=200e-6, loop=30e-6,
              neff=2.4, ng=4.2, loss=3.0, lambda0=1550e-9):
    """Closed-form coupler / double-pass arm / loop-mirror cascade.

    Returns (pd field, laser-return field)."""
    t = lambda L: wg_transmission(L, neff, ng, lambda0, loss, wl)
    r1 = t(l1) ** 2 * t(loop)
    r2 = t(l2) ** 2 * t(loop)
    amp = math.sqrt(power)
    pd = 1j * math.sqrt(kappa * (1 - kappa)) * (r1 + r2) * amp
    ret = ((1 - kappa) * r1 - kappa * r2) * amp
    return pd, ret


@pytest.fixture(scope="session")
def presets():
    return {name: build(preset(name)) for name in ("mi", "mim", "fpc", "rcc")}


ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS[criterion] = (bool(ok), detail)
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} ({detail})")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
