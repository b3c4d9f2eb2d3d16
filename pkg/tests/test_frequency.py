import math

import numpy as np
import pytest

from conftest import build, mi_oracle
from wavesim.circuit import set_unidirectional
from wavesim.errors import ElaborationError, InvalidInputError, RangeError, SingularSystemError
from wavesim.frequency import (
    assemble,
    result_columns,
    solve_nodal,
    solve_wave,
    sweep,
    sweep2d,
)
from wavesim.presets import preset

WL = 1550e-9
SOLVERS = [solve_wave, solve_nodal]


def laser_term(refl, between=""):
    return f"laser LD (n1) power=1e-3\n{between}term T (n2) reflectivity={refl}\n"


def mirror_line(refl, wg=""):
    body = "laser LD (n1) power=1e-3\n"
    if wg:
        body += f"wg W (n1 n2) {wg}\nterm T (n2) reflectivity={refl}\n"
    else:
        body += f"term T (n1) reflectivity={refl}\n"
    return body + ".monitor M n1\n"


class TestAssemble:
    def test_laser_term(self):
        c = build("laser LD (a) power=1e-3\nterm T (a) reflectivity=0.3\n")
        sy = assemble(c, WL)
        np.testing.assert_array_equal(sy.s_block, np.diag([0, 0.3]))
        np.testing.assert_array_equal(sy.src, [math.sqrt(1e-3), 0])
        np.testing.assert_array_equal(sy.P, [[0, 1], [1, 0]])

    def test_mi_port_count(self, presets):
        c = presets["mi"]
        kinds = [x.kind for x in c.components]
        two_ports = kinds.count("wg") + len(c.monitors)
        n = 2 * two_ports + 3 * kinds.count("ybranch") + 4 * kinds.count("dc") + 1 + 1
        assert assemble(c, WL).s_block.shape == (n, n)

    def test_fpc_reflections_only_at_gratings(self, presets):
        c = presets["fpc"]
        diag = np.diag(assemble(c, 1541e-9).s_block)
        bragg_ports = {p for comp in c.of_kind("bragg") for p in comp.ports}
        nonzero = set(np.flatnonzero(diag))
        assert nonzero == bragg_ports

    def test_out_of_table_names_component(self, tmp_path):
        from pathlib import Path

        data = Path(__file__).parent / "data" / "twoport.sparam"
        c = build(f"laser L (a)\nspfile DEV (a b) path={data}\nterm T (b)\n")
        with pytest.raises(RangeError, match="DEV"):
            solve_wave(c, 1.6e-6)

    def test_bad_wavelength(self, presets):
        with pytest.raises(InvalidInputError):
            assemble(presets["mi"], -1.0)


class TestSolveExamples:
    @pytest.mark.parametrize("solve", SOLVERS)
    def test_open_line(self, solve):
        r = solve(build(mirror_line(0.0)), WL)
        assert r.monitors["M"].p_fwd == pytest.approx(1e-3, rel=1e-12)
        assert r.monitors["M"].p_bwd == pytest.approx(0.0, abs=1e-20)

    @pytest.mark.parametrize("solve", SOLVERS)
    def test_mirror(self, solve):
        r = solve(build(mirror_line(1.0)), WL)
        assert r.monitors["M"].p_bwd == pytest.approx(1e-3, rel=1e-12)

    @pytest.mark.parametrize("solve", SOLVERS)
    def test_double_pass_loss(self, solve):
        r = solve(build(mirror_line(1.0, "length=1e-2 loss=3")), WL)
        assert r.monitors["M"].p_bwd == pytest.approx(1e-3 * 10 ** -0.6, rel=1e-10)
        assert r.monitors["M"].p_bwd == pytest.approx(0.2512e-3, rel=1e-3)

    @pytest.mark.parametrize("solve", SOLVERS)
    def test_laser_return_monitor(self, solve):
        refl = 0.01 / math.sqrt(1e-3)
        r = solve(build(mirror_line(refl)), WL)
        assert r.laser_return["LD"] == pytest.approx(1e-4, rel=1e-10)
        assert r.monitors["M"].p_fwd == pytest.approx(1e-3, rel=1e-12)

    @pytest.mark.parametrize("solve", SOLVERS)
    def test_pd_reads_incident_power(self, solve):
        r = solve(build("laser L (a) power=2e-3\npd D (a) responsivity=0.8\n"), WL)
        assert r.pd_currents["D"] == pytest.approx(1.6e-3, rel=1e-12)
        assert r.b[1] == 0

    def test_fixed_point_consistency(self, presets):
        for name, c in presets.items():
            r = solve_wave(c, 1545e-9)
            sy = assemble(c, 1545e-9)
            np.testing.assert_allclose(r.a, r.b[c.pairing], atol=1e-15)
            resid = np.max(np.abs(r.b - (sy.s_block @ r.a + sy.src)))
            assert resid <= 1e-10 * max(1e-30, np.max(np.abs(r.b))), name


class TestSolverEquivalence:
    @pytest.mark.parametrize("name", ["mi", "mim", "fpc", "rcc"])
    def test_random_wavelengths(self, presets, name):
        c = presets[name]
        rng = np.random.default_rng(7)
        for wl in rng.uniform(1535e-9, 1560e-9, 20):
            w, n = solve_wave(c, wl), solve_nodal(c, wl)
            scale = max(np.max(np.abs(w.b)), np.max(np.abs(w.a)))
            assert np.max(np.abs(w.b - n.b)) <= 1e-9 * scale
            assert np.max(np.abs(w.a - n.a)) <= 1e-9 * scale

    @pytest.mark.parametrize("solve", SOLVERS)
    def test_reference_impedance_invariance(self, solve):
        text = preset("mi")
        base = solve(build(text, rr=1.0), 1551e-9)
        scale = np.max(np.abs(base.b))
        for r in (50.0, 377.0):
            res = solve(build(text, rr=r), 1551e-9)
            assert np.max(np.abs(res.a - base.a)) <= 1e-10 * scale
            assert np.max(np.abs(res.b - base.b)) <= 1e-10 * scale
            np.testing.assert_allclose(res.v, math.sqrt(r) * (res.a + res.b), atol=1e-12)
            assert not np.allclose(res.v, base.v)

    def test_wave_solver_waves_are_r_free(self):
        a = solve_wave(build(preset("rcc"), rr=1.0), WL)
        b = solve_wave(build(preset("rcc"), rr=377.0), WL)
        np.testing.assert_array_equal(a.b, b.b)


class TestPhysics:
    def test_mi_matches_closed_form(self, presets):
        c = presets["mi"]
        for wl in np.linspace(1540e-9, 1560e-9, 41):
            r = solve_wave(c, wl)
            pd, ret = mi_oracle(wl)
            assert r.monitors["MPD"].p_fwd == pytest.approx(abs(pd) ** 2, rel=1e-9)
            assert r.laser_return["LD1"] == pytest.approx(abs(ret) ** 2, rel=1e-9)

    @pytest.mark.parametrize("solve", SOLVERS)
    def test_energy_conservation_lossless(self, solve):
        c = build(preset("mi").replace(".param LOSS 3.0", ".param LOSS 0.0"))
        for wl in np.linspace(1540e-9, 1560e-9, 15):
            r = solve(c, wl)
            absorbed = r.pd_currents["PD1"] + r.laser_return["LD1"]
            assert absorbed == pytest.approx(1e-3, rel=1e-10)

    def test_passive_circuit_never_gains(self, presets):
        for c in presets.values():
            r = solve_wave(c, 1548e-9)
            out = sum(r.pd_currents.values()) + sum(r.laser_return.values())
            assert out <= 1e-3 * (1 + 1e-12)

    def test_singular_resonator_reported(self):
        # lossless cavity between two perfect mirrors, exactly on resonance
        L = 311 * WL / (2 * 2.4)
        c = build(f"laser L (a)\nterm T (a)\nterm M1 (x) reflectivity=1\n"
                  f"wg W (x y) length={L!r} neff=2.4 ng=2.4 loss=0\nterm M2 (y) reflectivity=1\n")
        with pytest.raises(SingularSystemError, match="add loss"):
            solve_wave(c, WL)
        with pytest.raises(SingularSystemError):
            solve_nodal(c, WL)
        res = sweep(c, WL, WL + 1e-9, 3, threads=1)
        assert res.status[0] != "ok"
        assert res.status[1:] == ["ok", "ok"]
        assert "add loss" in res.to_csv().splitlines()[1]


class TestMonitorNeutrality:
    @pytest.mark.parametrize("name", ["mi", "fpc", "rcc"])
    def test_adding_monitor_is_bit_exact(self, name):
        text = preset(name)
        base = build(text)
        nets = sorted({n for comp in base.components for n in comp.nets})
        extra = build(text.replace(".end", "".join(f".monitor X{i} {n}\n" for i, n in enumerate(nets)) + ".end"))
        for wl in (1541e-9, 1550.3e-9):
            r0, r1 = solve_wave(base, wl), solve_wave(extra, wl)
            n0 = base.n_device_ports
            np.testing.assert_array_equal(r0.b[:n0], r1.b[:n0])
            for m in base.monitors:
                assert r0.monitors[m.name] == r1.monitors[m.name]

    def test_nodal_monitor_neutral(self):
        base = build(preset("mi"))
        extra = build(preset("mi").replace(".end", ".monitor X n_arm2\n.end"))
        r0, r1 = solve_nodal(base, WL), solve_nodal(extra, WL)
        n0 = base.n_device_ports
        np.testing.assert_allclose(r1.b[:n0], r0.b[:n0], atol=1e-15)

    def test_monitor_reads_both_directions(self):
        c = build(preset("mi").replace(".end", ".monitor X n_arm1\n.end"))
        r = solve_wave(c, WL)
        fwd = r.b[c.component("DC1").ports[2]]
        bwd = r.b[c.component("ARM1").ports[0]]
        assert r.monitors["X"].p_fwd == abs(fwd) ** 2
        assert r.monitors["X"].p_bwd == abs(bwd) ** 2


class TestUnidirectional:
    def test_mirror_reflection_removed(self):
        c = set_unidirectional(build(mirror_line(1.0)))
        assert solve_wave(c, WL).monitors["M"].p_bwd == 0

    def test_waveguide_chain_unchanged(self):
        text = ("laser L (a)\nwg W1 (a b) length=1e-4\nwg W2 (b c) length=2e-4 loss=2\n"
                "pd D (c)\n.monitor M b\n")
        c = build(text)
        for solve in SOLVERS:
            r0, r1 = solve(c, WL), solve(set_unidirectional(c), WL)
            np.testing.assert_allclose(r1.b, r0.b, atol=1e-15)

    def test_fpc_band_pass_lost(self, presets):
        wl = 1540.77e-9
        bi = solve_wave(presets["fpc"], wl).monitors["MOUT"].p_fwd
        uni = solve_wave(set_unidirectional(presets["fpc"]), wl).monitors["MOUT"].p_fwd
        assert 10 * math.log10(bi / uni) > 20

    def test_nodal_agrees(self, presets):
        c = set_unidirectional(presets["rcc"])
        w, n = solve_wave(c, WL), solve_nodal(c, WL)
        np.testing.assert_allclose(n.b, w.b, atol=1e-12 * np.max(np.abs(w.b)))


class TestSweep:
    def test_flat_waveguide(self):
        c = build("laser L (a)\nwg W (a b) length=1e-3 loss=2\npd D (b)\n")
        res = sweep(c, 1530e-9, 1570e-9, 41, threads=1)
        assert np.ptp(res.pd_current("D")) <= 1e-14 * 1e-3
        assert res.failures == 0

    def test_mi_fringe_count(self, presets):
        res = sweep(presets["mi"], 1540e-9, 1560e-9, 2001)
        p = res.monitor("MPD", "p_fwd")
        peaks = np.sum((p[1:-1] > p[:-2]) & (p[1:-1] > p[2:]))
        fsr = 1550e-9 ** 2 / (2 * 4.2 * 100e-6)
        assert abs(peaks - 20e-9 / fsr) <= 1

    def test_fpc_peak(self, presets):
        res = sweep(presets["fpc"], 1530e-9, 1552e-9, 2201)
        t = res.monitor("MOUT", "p_fwd")
        assert abs(res.wavelengths[np.argmax(t)] - 1541e-9) <= 2e-9

    def test_csv_schema(self, presets):
        c = presets["mi"]
        text = sweep(c, 1549e-9, 1551e-9, 5, threads=1).to_csv()
        rows = [line.split(",") for line in text.splitlines()]
        assert rows[0] == ["wavelength_m", *result_columns(c), "status"]
        assert rows[0][1:5] == ["MLD.p_fwd_w", "MLD.p_bwd_w", "MLD.phase_fwd_rad", "MLD.phase_bwd_rad"]
        assert "PD1.i_a" in rows[0]
        assert len(rows) == 6
        assert all(len(r) == len(rows[0]) and r[-1] == "ok" for r in rows[1:])
        assert float(rows[1][0]) == 1549e-9

    def test_thread_determinism(self, presets):
        c = presets["fpc"]
        a = sweep(c, 1535e-9, 1545e-9, 301, threads=1).to_csv()
        b = sweep(c, 1535e-9, 1545e-9, 301, threads=8).to_csv()
        assert a == b

    def test_env_thread_count(self, presets, monkeypatch):
        monkeypatch.setenv("WAVESIM_THREADS", "bogus")
        with pytest.raises(InvalidInputError):
            sweep(presets["mi"], 1549e-9, 1551e-9, 3)

    @pytest.mark.parametrize("args", [(1551e-9, 1549e-9, 5), (1549e-9, 1551e-9, 1)])
    def test_bad_ranges(self, presets, args):
        with pytest.raises(InvalidInputError):
            sweep(presets["mi"], *args)


class TestSweep2D:
    def test_transposition(self, presets):
        c = presets["rcc"]
        va, vb = np.linspace(0, 3, 7), np.linspace(0.5, 2.5, 5)
        g1 = sweep2d(c, ("PS1.v", va), ("PS2.v", vb), WL, threads=1).grid("MLD", "p_bwd")
        g2 = sweep2d(c, ("PS2.v", vb), ("PS1.v", va), WL, threads=1).grid("MLD", "p_bwd")
        np.testing.assert_array_equal(g1, g2.T)

    def test_single_cell(self, presets):
        res = sweep2d(presets["rcc"], ("PS1.v", [1.2]), ("PS2.v", [2.1]), WL)
        lines = res.to_csv().splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("PS1.v,PS2.v,MLD.p_fwd_w")
        assert res.argmin("MLD") == (0, 0)

    def test_drive_override_matches_solve(self, presets):
        c = presets["rcc"]
        res = sweep2d(c, ("PS1.v", [0.7, 1.9]), ("PSATT.v", [0.3]), WL)
        direct = solve_wave(c, WL, {"PS1.v": 1.9, "PSATT.v": 0.3})
        assert res.grid("MLD")[1, 0] == direct.monitors["MLD"].p_bwd

    def test_row_major(self, presets):
        res = sweep2d(presets["rcc"], ("PS1.v", [0.0, 1.0]), ("PS2.v", [0.0, 1.0, 2.0]), WL)
        rows = [r.split(",")[:2] for r in res.to_csv().splitlines()[1:]]
        assert [tuple(map(float, r)) for r in rows] == [(a, b) for a in (0, 1) for b in (0, 1, 2)]

    def test_unknown_binding(self, presets):
        with pytest.raises(ElaborationError, match="PSX.v"):
            sweep2d(presets["rcc"], ("PSX.v", [0.0]), ("PS2.v", [0.0]), WL)

    def test_same_parameter_twice(self, presets):
        with pytest.raises(InvalidInputError):
            sweep2d(presets["rcc"], ("PS1.v", [0.0]), ("PS1.v", [0.0]), WL)
