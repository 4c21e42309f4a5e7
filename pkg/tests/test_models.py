import math

import numpy as np
import pytest

from cycleflux import (
    NonPositiveFrequency,
    PumpParams,
    TransistorParams,
    ZeroGapChannel,
    bose_occupation,
    boson_rates,
    build_pump,
    build_transistor,
    directed_cycle_from_labels,
    enumerate_cycles,
    fermi_occupation,
    fermion_rates,
    rank_cycles,
    reservoir_currents,
    solve_steady_state,
    validate_detailed_balance,
)
from cycleflux.models import PUMP_SPIN_CYCLE_LABELS, transistor_label


def test_fermi_occupation_values():
    assert fermi_occupation(0.0, 1.0, 0.0) == 0.5
    assert fermi_occupation(1.0, 1.0, 1.0) == 0.5
    assert fermi_occupation(1e6, 1.0, 0.0) == 0.0
    assert fermi_occupation(1.0, 1.0, 0.0) == pytest.approx(1.0 / (math.e + 1.0), rel=1e-12)


def test_bose_occupation_values():
    assert bose_occupation(1.0, 1.0) == pytest.approx(1.0 / (math.e - 1.0), rel=1e-12)
    assert bose_occupation(1.0, 0.2) == pytest.approx(1.0 / (math.exp(5.0) - 1.0), rel=1e-12)
    assert bose_occupation(1.0, 1e-4) == 0.0  # far beyond double range
    with pytest.raises(NonPositiveFrequency):
        bose_occupation(0.0, 1.0)
    with pytest.raises(NonPositiveFrequency):
        bose_occupation(-1.0, 1.0)


def test_rate_pairs_obey_detailed_balance():
    kin, kout = fermion_rates(1.3, 0.7, 0.2, 0.05)
    assert kin / kout == pytest.approx(math.exp(-(1.3 - 0.2) / 0.7), rel=1e-14)
    up, down = boson_rates(2.0, 0.9, 0.03)
    assert up / down == pytest.approx(math.exp(-2.0 / 0.9), rel=1e-14)
    # negative gap swaps the roles
    f, b = boson_rates(-2.0, 0.9, 0.03)
    assert (f, b) == (down, up)


def test_pump_energies_at_defaults():
    net = build_pump(PumpParams(eps_U=1.0))
    E = {s.label: s.energy for s in net.states}
    assert E["|00⟩"] == 0.0
    assert E["|0↑⟩"] == -1.0
    assert E["|0↓⟩"] == 1.0
    assert E["|10⟩"] == 1.0
    assert E["|1↑⟩"] == 3.0  # 1 + (-1) + 3
    assert E["|1↓⟩"] == 5.0


def test_pump_channel_layout():
    net = build_pump()
    assert net.n_states == 6
    assert len(net.channels) == 12
    assert len(net.edges("collapsed")) == 9
    by_res = {}
    for ch in net.channels:
        by_res.setdefault(ch.reservoir, 0)
        by_res[ch.reservoir] += 1
    assert by_res == {1: 3, 2: 3, 3: 4, 4: 2}


def test_pump_detailed_balance_every_channel():
    net = build_pump(PumpParams(T1=1.3, mu3=0.2))
    for diag in validate_detailed_balance(net):
        assert not diag.zero_rate
        assert abs(diag.residual) < 1e-12


def test_pump_cycle_census():
    assert 2 * len(enumerate_cycles(build_pump())) == 28


def test_pump_spin_cycle_exists_and_transports():
    net = build_pump(PumpParams(T1=1.2))
    walk = directed_cycle_from_labels(net, PUMP_SPIN_CYCLE_LABELS)
    keys = {c.key for c in enumerate_cycles(net)}
    assert walk.key in keys


def test_pump_spinless_reservoirs_move_no_spin():
    net = build_pump(PumpParams(T1=1.4))
    rep = reservoir_currents(net, solve_steady_state(net))
    assert rep.spin[1] == 0.0
    assert rep.spin[2] == 0.0
    assert rep.spin[3] + rep.spin[4] == pytest.approx(0.0, abs=1e-18)


def test_transistor_energies_at_defaults():
    net = build_transistor()
    E = {s.label: s.energy for s in net.states}
    assert E[transistor_label("G", "↑", "G")] == 0.5
    assert E[transistor_label("+", "↑", "-")] == 6.5
    assert E[transistor_label("-", "↓", "+")] == 5.5
    assert E[transistor_label("-", "↑", "+")] == 6.5
    assert E[transistor_label("+", "↓", "-")] == 5.5


def test_transistor_channel_layout():
    net = build_transistor()
    assert net.n_states == 18
    assert len(net.channels) == 33
    by_res = {}
    for ch in net.channels:
        by_res.setdefault(ch.reservoir, 0)
        by_res[ch.reservoir] += 1
    assert by_res == {0: 12, 1: 9, 2: 12}
    # every edge is single-bath, so collapsing changes nothing
    assert len(net.edges("collapsed")) == 33


def test_transistor_detailed_balance_every_channel():
    for diag in validate_detailed_balance(build_transistor()):
        assert not diag.zero_rate
        assert abs(diag.residual) < 1e-12


def test_transistor_zero_gap_rejected():
    # w_M = 10 makes the qubit flip gapless when the qutrits pull by -10
    with pytest.raises(ZeroGapChannel):
        build_transistor(TransistorParams(w_M=10.0))


def test_transistor_middle_gap_structure():
    net = build_transistor()
    gaps = sorted(
        {round(abs(ch.transported["energy"]), 12) for ch in net.channels if ch.reservoir == 1}
    )
    # w_M + w_LM s_l + w_MR s_r over s in {-1, 0, 1}
    assert gaps == [1.0, 9.0, 11.0, 19.0, 21.0]


def test_transistor_mirror_symmetry():
    base = TransistorParams(T_L=2.5, T_R=0.2, T_M=0.7)
    swapped = TransistorParams(T_L=0.2, T_R=2.5, T_M=0.7)
    rep1 = reservoir_currents(*(lambda n: (n, solve_steady_state(n)))(build_transistor(base)))
    rep2 = reservoir_currents(*(lambda n: (n, solve_steady_state(n)))(build_transistor(swapped)))
    assert rep2.heat[2] == pytest.approx(rep1.heat[0], rel=1e-9)
    assert rep2.heat[0] == pytest.approx(rep1.heat[2], rel=1e-9)
    assert rep2.heat[1] == pytest.approx(rep1.heat[1], rel=1e-9)


def test_transistor_top_cycle_middle_energy_cancels():
    net = build_transistor()
    top = rank_cycles(net, 1)[0]
    assert top.transport[1]["energy"] == 0.0


def test_pump_equilibrium_when_all_baths_equal():
    net = build_pump(PumpParams(T1=1.0, T2=1.0, T3=1.0, T4=1.0))
    rep = reservoir_currents(net, solve_steady_state(net))
    for table in (rep.heat, rep.spin, rep.particle):
        for v in table.values():
            assert abs(v) < 1e-18
