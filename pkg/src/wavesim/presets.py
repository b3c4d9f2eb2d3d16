"""Self-contained netlists for the reference testbenches.

mi   Michelson interferometer: 3-dB coupler, waveguide arms, Y-branch loop mirrors.
mim  Michelson interferometer modulator: the loop mirrors carry a thermal and a
     800 um carrier-depletion phase shifter, the latter square-driven 0 <-> 4.8 V.
fpc  Fabry-Perot cavity between two 120-period, 317 nm pitch Bragg reflectors
     with a one-period cavity; the second reflector is the mirror image of the
     first so the cavity is symmetric.
rcc  Reflection cancellation circuit: 90/10 tap to a photodetector, an
     adjustable splitter (MZI, PS1) feeding a phase-tunable loop reflector
     (PS2), and an output adjustable splitter (MZI, PSATT) towards a
     reflecting device.
"""
from __future__ import annotations

MI = """\
# Michelson interferometer
.param RR 1.0
.param NEFF 2.4
.param NG 4.2
.param LOSS 3.0
.param L_ARM1 100e-6
.param L_ARM2 200e-6
.param L_LOOP 30e-6
laser LD1 (n_src) power=1e-3 wavelength0=1550e-9
dc DC1 (n_src n_pd n_arm1 n_arm2) kappa=0.5
wg ARM1 (n_arm1 n_y1) length=L_ARM1 neff=NEFF ng=NG loss=LOSS
ybranch Y1 (n_y1 n_l1a n_l1b)
wg LOOP1 (n_l1a n_l1b) length=L_LOOP neff=NEFF ng=NG loss=LOSS
wg ARM2 (n_arm2 n_y2) length=L_ARM2 neff=NEFF ng=NG loss=LOSS
ybranch Y2 (n_y2 n_l2a n_l2b)
wg LOOP2 (n_l2a n_l2b) length=L_LOOP neff=NEFF ng=NG loss=LOSS
pd PD1 (n_pd) responsivity=1.0
.monitor MLD n_src
.monitor MPD n_pd
.end
"""

MIM = """\
# Michelson interferometer modulator
.param RR 1.0
.param NEFF 2.4
.param NG 4.2
.param LOSS 3.0
.param L_ARM 100e-6
.param VPI 4.8
laser LD1 (n_src) power=1e-3 wavelength0=1550e-9
dc DC1 (n_src n_pd n_arm1 n_arm2) kappa=0.5
wg ARM1 (n_arm1 n_y1) length=L_ARM neff=NEFF ng=NG loss=LOSS
ybranch Y1 (n_y1 n_l1a n_l1b)
ps_thermal PS1 (n_l1a n_l1b) p_pi=20e-3 r_heater=1000 length=100e-6 ng=NG loss=0.2
wg ARM2 (n_arm2 n_y2) length=L_ARM neff=NEFF ng=NG loss=LOSS
ybranch Y2 (n_y2 n_l2a n_l2b)
ps_pn PM1 (n_l2a n_l2b) v_pi=VPI length=800e-6 ng=NG loss=1.0
pd PD1 (n_pd) responsivity=1.0
.monitor MLD n_src
.monitor MPD n_pd
.drive PS1.v dc(0)
.drive PM1.v square(0 4.8 2e-9 0.5 20e-12)
.end
"""

FPC = """\
# Bragg-grating Fabry-Perot cavity
.param RR 1.0
.param NBAR 2.4306
.param DN 0.06
.param PITCH 317e-9
.param PERIODS 120
laser LD1 (n_src) power=1e-3 wavelength0=1540.77e-9
bragg BR1 (n_src n_c1) periods=PERIODS nbar=NBAR dn=DN pitch=PITCH
wg CAV (n_c1 n_c2) length=PITCH neff=NBAR ng=NBAR loss=0
bragg BR2 (n_c2 n_out) periods=PERIODS nbar=NBAR dn=DN pitch=PITCH mirror=1
pd PD1 (n_out) responsivity=1.0
.monitor MIN n_src
.monitor MOUT n_out
.end
"""

# The device reflection phase and PSATT bias place an exact cancellation
# null on the (PS1.v, PS2.v) = (1.2 V, 2.1 V) node of a 0:3:61 grid.
RCC = """\
# Reflection cancellation circuit
.param RR 1.0
.param IMB 0.0
.param XT 0.0
.param PPI 6e-3
.param RH 1000
laser LD1 (n_src) power=1e-3 wavelength0=1550e-9
dc TAP (n_src n_pd n_t1 n_t2) kappa=0.1
pd PD1 (n_pd) responsivity=1.0
term TT (n_t2)
dc AS1A (n_t1 n_a1x n_a1u n_a1l) kappa=0.5 imbalance=IMB
term TA1 (n_a1x)
ps_thermal PS1 (n_a1u n_a1v) p_pi=PPI r_heater=RH v=0
dc AS1B (n_a1v n_a1l n_ref n_out) kappa=0.5 imbalance=IMB
ybranch YR (n_ref n_r1 n_r2)
ps_thermal PS2 (n_r1 n_r2) p_pi=PPI r_heater=RH v=0
dc AS2A (n_out n_a2x n_a2u n_a2l) kappa=0.5 imbalance=IMB
term TA2 (n_a2x)
ps_thermal PSATT (n_a2u n_a2v) p_pi=PPI r_heater=RH v=1.5066681307670302
dc AS2B (n_a2v n_a2l n_dev n_thru) kappa=0.5 imbalance=IMB
term DEV (n_dev) reflectivity=0.5 phase=5.162709508481864
term TOUT (n_thru)
.monitor MLD n_src
.monitor MPD n_pd
.crosstalk PS1 PS2 XT
.end
"""

PRESETS = {"mi": MI, "mim": MIM, "fpc": FPC, "rcc": RCC}


def preset(name: str) -> str:
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; valid presets: {', '.join(sorted(PRESETS))}") from None
