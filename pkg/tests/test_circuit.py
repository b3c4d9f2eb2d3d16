from pathlib import Path

import numpy as np
import pytest

from wavesim.circuit import elaborate, load_circuit, set_unidirectional, forward_mask
from wavesim.errors import ElaborationError
from wavesim.netlist import parse_netlist
from wavesim.presets import PRESETS, preset

DATA = Path(__file__).parent / "data"


def build(text, **kw):
    return elaborate(parse_netlist(text), **kw)


CHAIN = """\
laser LD (n1) power=1e-3
wg W (n1 n2) length=10e-6
term T (n2)
"""


class TestElaborate:
    def test_chain_counts(self):
        c = build(CHAIN)
        assert len(c.components) == 3
        assert c.nports == 4
        np.testing.assert_array_equal(c.pairing, [1, 0, 3, 2])

    def test_pairing_is_fixed_point_free_involution(self):
        for text in PRESETS.values():
            c = build(text)
            p = c.pairing
            np.testing.assert_array_equal(p[p], np.arange(c.nports))
            assert np.all(p != np.arange(c.nports))
            d = c.device_pairing
            np.testing.assert_array_equal(d[d], np.arange(c.n_device_ports))

    def test_deterministic(self):
        a, b = build(PRESETS["rcc"]), build(PRESETS["rcc"])
        np.testing.assert_array_equal(a.pairing, b.pairing)
        assert [x.ports for x in a.components] == [x.ports for x in b.components]

    def test_monitor_splice(self):
        c = build(CHAIN + ".monitor M n2\n")
        m = c.monitors[0]
        assert m.ports == (4, 5)
        assert (m.first, m.second) == (2, 3)
        assert c.pairing[2] == 4 and c.pairing[5] == 3
        np.testing.assert_array_equal(c.device_pairing, [1, 0, 3, 2])

    def test_two_monitors_same_net_chain(self):
        c = build(CHAIN + ".monitor M1 n1\n.monitor M2 n1\n")
        assert list(c.pairing) == [4, 7, 3, 2, 0, 6, 5, 1]

    def test_reference_impedance(self):
        assert build(CHAIN).rr == 1.0
        assert build(".param RR 50\n" + CHAIN).rr == 50.0
        assert build(".param RR 50\n" + CHAIN, rr=377.0).rr == 377.0
        with pytest.raises(ElaborationError):
            build(CHAIN, rr=-1.0)

    def test_param_substitution(self):
        c = build(".param L 25e-6\n" + CHAIN.replace("10e-6", "L"))
        assert c.component("W").model.length == 25e-6

    def test_term_phase(self):
        c = build("laser L (a)\nterm T (a) reflectivity=0.5 phase=1.5707963267948966\n")
        assert c.component("T").model.reflectivity == pytest.approx(0.5j)

    def test_drive_binding(self):
        c = build(PRESETS["mim"])
        assert set(c.stimuli) == {"PS1.v", "PM1.v"}
        assert c.drive_values(0.5e-9)["PM1"]["v"] == pytest.approx(4.8)
        assert c.drive_values(1.5e-9)["PM1"]["v"] == 0.0
        assert c.drive_values(0.0, {"PM1.v": 1.0})["PM1"]["v"] == 1.0

    def test_crosstalk_symmetric(self):
        c = build(PRESETS["rcc"].replace(".param XT 0.0", ".param XT 0.1"))
        assert c.component("PS1").model.neighbor == "PS2"
        assert c.component("PS2").model.crosstalk_chi == 0.1
        d = c.drive_values(0.0, {"PS1.v": 2.0, "PS2.v": 1.0})
        assert d["PS1"]["v_neighbor"] == 1.0
        assert d["PS2"]["v_neighbor"] == 2.0

    def test_bindings(self):
        c = build(PRESETS["rcc"])
        assert c.bindings() == ["PS1.v", "PS2.v", "PSATT.v"]
        with pytest.raises(ElaborationError, match="valid bindings"):
            c.check_bindings(["PS9.v"])

    def test_unidirectional_copy(self):
        c = build(CHAIN)
        u = set_unidirectional(c)
        assert u.unidirectional and not c.unidirectional
        m = forward_mask(4)
        assert m[2:, :2].all() and not m[:2].any() and not m[:, 2:].any()

    def test_spfile_relative_path(self, tmp_path):
        (tmp_path / "dev.sparam").write_text((DATA / "twoport.sparam").read_text())
        net = tmp_path / "top.net"
        net.write_text("laser L (a)\nspfile S (a b) path=dev.sparam\nterm T (b)\n")
        c = load_circuit(str(net))
        assert c.component("S").model.nports == 2


class TestElaborateErrors:
    def test_unterminated(self):
        with pytest.raises(ElaborationError, match="unterminated net 'n2'"):
            build("laser LD (n1)\nwg W (n1 n2)\n")

    def test_multi_drop_names_net(self):
        with pytest.raises(ElaborationError, match="multi-drop net 'x'"):
            build("laser L (x)\nterm A (x)\nterm B (x)\n")

    @pytest.mark.parametrize("extra,msg", [
        (".drive NOPE.v dc(1)\n", "unknown instance"),
        (".drive W.v dc(1)\n", "no drivable input"),
        (".monitor M zz\n", "unknown net"),
        (".crosstalk W T 0.1\n", "not a ps_thermal"),
        (".crosstalk Q T 0.1\n", "unknown instance"),
    ])
    def test_dangling_references(self, extra, msg):
        with pytest.raises(ElaborationError, match=msg):
            build(CHAIN + extra)

    def test_bad_attribute(self):
        with pytest.raises(ElaborationError, match="unknown attribute"):
            build(CHAIN.replace("length=10e-6", "colour=3"))

    def test_unknown_param(self):
        with pytest.raises(ElaborationError, match="LEN"):
            build(CHAIN.replace("10e-6", "LEN"))

    def test_model_validation_wrapped(self):
        with pytest.raises(ElaborationError, match="LD"):
            build(CHAIN.replace("power=1e-3", "power=-1"))

    def test_bad_stimulus(self):
        with pytest.raises(ElaborationError, match="PM1"):
            build(PRESETS["mim"].replace("square(0 4.8 2e-9 0.5 20e-12)", "square(0 4.8 0 0.5 0)"))

    def test_spfile_port_mismatch(self):
        data = DATA / "twoport.sparam"
        with pytest.raises(ElaborationError, match="2 ports"):
            build(f"spfile S (a) path={data}\nlaser L (a)\n")

    def test_missing_spfile(self, tmp_path):
        with pytest.raises(ElaborationError, match="cannot read"):
            build(f"spfile S (a b) path={tmp_path}/none.sparam\nlaser L (a)\nterm T (b)\n")


class TestPresets:
    @pytest.mark.parametrize("name", ["mi", "mim", "fpc", "rcc"])
    def test_elaborates(self, name):
        c = build(preset(name))
        assert c.lasers

    def test_unknown(self):
        with pytest.raises(KeyError, match="valid presets: fpc, mi, mim, rcc"):
            preset("xyz")

    def test_mi_topology(self):
        nl = parse_netlist(preset("mi"))
        kinds = [i.type for i in nl.instances]
        assert kinds.count("dc") == 1
        assert nl.instances[kinds.index("dc")].attrs["kappa"] == 0.5
        assert kinds.count("ybranch") == 2
        assert kinds.count("wg") == 4
        assert kinds.count("laser") == kinds.count("pd") == 1
        assert nl.monitors

    def test_fpc_reflectors(self):
        c = build(preset("fpc"))
        br = c.of_kind("bragg")
        assert len(br) == 2
        assert all(b.model.periods == 120 for b in br)
        assert all(b.model.pitch == 317e-9 for b in br)
        assert c.component("CAV").model.length == 317e-9

    def test_mim_drive(self):
        nl = parse_netlist(preset("mim"))
        d = {x.target: x for x in nl.drives}
        assert d["PM1.v"].kind == "square"
        assert d["PM1.v"].args[:2] == (0.0, 4.8)
        assert build(preset("mim")).component("PM1").model.v_pi == 4.8

    def test_rcc_tap(self):
        nl = parse_netlist(preset("rcc"))
        assert nl.instance("TAP").attrs["kappa"] == 0.1
        assert [i.type for i in nl.instances].count("ps_thermal") == 3
        assert [(x.a, x.b) for x in nl.crosstalk] == [("PS1", "PS2")]
