import numpy as np
import pytest

from conftest import two_state_spec
from cycleflux import (
    AbsorbingState,
    PumpParams,
    all_cycle_records,
    build_network,
    build_pump,
    compare_with_analytic,
    count_cycle_completions,
    empirical_cycle_flux,
    simulate,
    simulate_and_count,
    solve_steady_state,
)
from cycleflux.gillespie import Trajectory


def _traj(states, channels=None, total_time=1.0):
    states = np.asarray(states, dtype=np.int64)
    n = len(states) - 1
    return Trajectory(
        states=states,
        dwell=np.full(n + 1, total_time / (n + 1)),
        channels=np.asarray(channels if channels is not None else [0] * n, dtype=np.int64),
        seed=0,
        total_time=total_time,
    )


def test_two_state_occupancy(two_state):
    traj = simulate(two_state, 20000.0, seed=3)
    occ = traj.occupancy(2)
    # closed form 3/5; dwell-time average converges ~1/sqrt(T)
    assert occ[0] == pytest.approx(0.6, abs=0.02)
    assert occ.sum() == pytest.approx(1.0, rel=1e-12)


def test_seed_reproducibility(two_state):
    a = simulate(two_state, 500.0, seed=11)
    b = simulate(two_state, 500.0, seed=11)
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.dwell, b.dwell)
    assert np.array_equal(a.channels, b.channels)
    c = simulate(two_state, 500.0, seed=12)
    assert not np.array_equal(a.states, c.states)


def test_dwell_times_sum_to_total(two_state):
    traj = simulate(two_state, 123.0, seed=5)
    assert traj.dwell.sum() == pytest.approx(123.0, rel=1e-12)
    assert (traj.dwell[:-1] > 0).all()


def test_trajectory_steps_follow_channels(ring3):
    traj = simulate(ring3, 50.0, seed=2)
    adj = ring3.adjacency
    for a, b in zip(traj.states[:-1], traj.states[1:]):
        assert b in adj[a]


def test_absorbing_state_raises():
    spec = two_state_spec(k12=1.0, k21=0.0)
    net = build_network(spec)
    with pytest.raises(AbsorbingState):
        simulate(net, 1000.0, seed=0)


def test_hand_traced_single_triangle():
    report = count_cycle_completions(_traj([0, 1, 2, 0]))
    assert report.counts == {((0, 1, 2), ()): [1, 0]}


def test_hand_traced_reverse_triangle():
    report = count_cycle_completions(_traj([0, 2, 1, 0]))
    assert report.counts == {((0, 1, 2), ()): [0, 1]}


def test_hand_traced_excursion_discarded():
    # 0,1,2,1,3,0: the 1-2-1 excursion pops silently, then loop 0-1-3
    report = count_cycle_completions(_traj([0, 1, 2, 1, 3, 0]))
    assert report.counts == {((0, 1, 3), ()): [1, 0]}


def test_hand_traced_nested_loops():
    # 0,1,2,3,1 pops (1,2,3); continuing 0 closes (0,1)-excursion, dropped
    report = count_cycle_completions(_traj([0, 1, 2, 3, 1, 0]))
    assert report.counts == {((1, 2, 3), ()): [1, 0]}


def test_multigraph_two_cycle_counting():
    # distinct channels out and back count; same channel does not
    r = count_cycle_completions(_traj([0, 1, 0], channels=[0, 1]), mode="multigraph")
    assert r.counts == {((0, 1), (0, 1)): [1, 0]}
    r = count_cycle_completions(_traj([0, 1, 0], channels=[0, 0]), mode="multigraph")
    assert r.counts == {}
    r = count_cycle_completions(_traj([0, 1, 0], channels=[0, 1]), mode="collapsed")
    assert r.counts == {}


def test_symmetric_ring_orientation_balance(ring3):
    traj = simulate(ring3, 40000.0, seed=17)
    report = count_cycle_completions(traj)
    est = empirical_cycle_flux(report)[((0, 1, 2), ())]
    # forward and backward rates agree within 3 sigma of each other
    diff = abs(est.j_forward - est.j_backward)
    sigma = np.hypot(est.stderr(), est.stderr(True))
    assert diff <= 3 * sigma
    assert est.j_forward == pytest.approx(1.0 / 9.0, rel=0.05)


def test_streamed_and_buffered_paths_agree(ring3):
    traj = simulate(ring3, 3000.0, seed=23)
    buffered = count_cycle_completions(traj)
    streamed, occ, n_jumps = simulate_and_count(ring3, 3000.0, seed=23)
    assert buffered.counts == streamed.counts
    assert n_jumps == traj.n_jumps
    np.testing.assert_allclose(occ, traj.occupancy(3), rtol=1e-12)


def test_pump_occupancy_matches_steady_state():
    net = build_pump(PumpParams(T1=1.2))
    p = solve_steady_state(net)
    _, occ, _ = simulate_and_count(net, 2e6, seed=7)
    # dwell fractions within a few sigma; error scale ~ sqrt(t_corr/T)
    assert np.abs(occ - p).max() < 0.01


def test_compare_with_analytic_helper(ring3):
    records = all_cycle_records(ring3)
    report, _, _ = simulate_and_count(ring3, 50000.0, seed=31)
    comps = compare_with_analytic(report, records)
    assert len(comps) == 2
    for c in comps:
        assert abs(c.z) < 4.0
