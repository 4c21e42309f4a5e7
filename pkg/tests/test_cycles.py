import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ring_spec
from cycleflux import (
    CycleBudgetExceeded,
    build_network,
    canonical_form,
    directed_cycle_from_labels,
    enumerate_cycles,
)
from cycleflux.cycles import simple_vertex_cycles
from oracles import dfs_undirected_cycles


def test_triangle_single_cycle(ring3):
    cycles = enumerate_cycles(ring3)
    assert len(cycles) == 1
    assert cycles[0].vertices == (0, 1, 2)
    # two directed per canonical cycle
    assert 2 * len(cycles) == 2


def test_pump_cycle_census(pump_default):
    cycles = enumerate_cycles(pump_default)
    assert len(cycles) == 14
    assert 2 * len(cycles) == 28
    lengths = sorted(len(c) for c in cycles)
    # prism graph: 2 triangles, 3 squares, 6 pentagons, 3 hexagons
    assert lengths == [3, 3, 4, 4, 4, 5, 5, 5, 5, 5, 5, 6, 6, 6]


def test_transistor_census_matches_dfs_oracle(transistor_default):
    cycles = enumerate_cycles(transistor_default, budget=500_000)
    oracle = dfs_undirected_cycles(transistor_default.adjacency)
    assert len(cycles) == len(oracle)
    assert [c.vertices for c in cycles] == oracle


def test_no_two_cycles_in_collapsed_mode(two_state):
    assert enumerate_cycles(two_state) == []


def test_budget_guard(transistor_default):
    with pytest.raises(CycleBudgetExceeded):
        enumerate_cycles(transistor_default, budget=100)


def test_canonical_rotation():
    c = canonical_form((2, 3, 1))
    assert c.vertices == (1, 2, 3)
    assert not c.reversed_input


def test_canonical_orientation_flag():
    c = canonical_form((1, 3, 2))
    assert c.vertices == (1, 2, 3)
    assert c.reversed_input


def test_canonical_idempotent():
    c1 = canonical_form((4, 0, 2, 7))
    c2 = canonical_form(c1.vertices)
    assert c2.vertices == c1.vertices
    assert not c2.reversed_input


def test_canonical_rejects_non_simple():
    with pytest.raises(ValueError):
        canonical_form((0, 1, 0, 2))
    with pytest.raises(ValueError):
        canonical_form((3,))


def test_cycle_steps_orientations():
    c = canonical_form((0, 1, 2))
    assert c.steps() == [(0, 1), (1, 2), (2, 0)]
    assert c.steps(reverse=True) == [(0, 2), (2, 1), (1, 0)]


def test_cycle_serialisation(pump_default):
    c = directed_cycle_from_labels(
        pump_default, ["|00⟩", "|10⟩", "|1↑⟩", "|0↑⟩", "|0↓⟩", "|00⟩"]
    )
    # canonical forward starts at |00⟩ (id 0) and goes towards the smaller
    # neighbour id first, i.e. the walk above is the reversed orientation
    assert c.vertices == (0, 2, 1, 4, 3)
    assert c.reversed_input
    s = c.format(pump_default.labels)
    assert s == "|00⟩→|0↓⟩→|0↑⟩→|1↑⟩→|10⟩→|00⟩"


def test_multigraph_two_cycles():
    spec = {
        "states": [{"label": "a", "energy": 0.0}, {"label": "b", "energy": 0.0}],
        "reservoirs": [
            {"id": 0, "statistics": "boson", "T": 1.0, "coupling": 1.0},
            {"id": 1, "statistics": "boson", "T": 2.0, "coupling": 1.0},
        ],
        "channels": [
            {"from": 0, "to": 1, "reservoir": 0, "rate_fw": 2.0, "rate_bw": 1.0,
             "transported": {"energy": 0.0, "particle": 0.0, "spin": 0.0}},
            {"from": 0, "to": 1, "reservoir": 1, "rate_fw": 1.0, "rate_bw": 3.0,
             "transported": {"energy": 0.0, "particle": 0.0, "spin": 0.0}},
        ],
        "mode": "multigraph",
    }
    net = build_network(spec)
    cycles = enumerate_cycles(net)
    assert len(cycles) == 1
    assert cycles[0].vertices == (0, 1)
    assert cycles[0].channels == (0, 1)


def test_multigraph_expands_parallel_channels(pump_default):
    from dataclasses import replace

    net = replace(pump_default, mode="multigraph")
    cycles = enumerate_cycles(net)
    collapsed = enumerate_cycles(pump_default)
    # 3 upper edges with 2 channels each: 3 parallel-pair 2-cycles, and each
    # vertex cycle multiplies by 2 per upper edge it uses
    two_cycles = [c for c in cycles if len(c) == 2]
    assert len(two_cycles) == 3
    multi = [c for c in cycles if len(c) >= 3]
    expected = 0
    for c in collapsed:
        uses_upper = sum(
            1 for a, b in c.steps() if (min(a, b), max(a, b)) in {(0, 3), (1, 4), (2, 5)}
        )
        expected += 2 ** uses_upper
    assert len(multi) == expected


@st.composite
def small_graphs(draw):
    n = draw(st.integers(min_value=3, max_value=8))
    possible = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = draw(
        st.lists(st.sampled_from(possible), min_size=n - 1, max_size=len(possible), unique=True)
    )
    return n, edges


@given(small_graphs())
@settings(max_examples=120, deadline=None)
def test_enumeration_matches_dfs_oracle(graph):
    n, edges = graph
    adj = [set() for _ in range(n)]
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    adjacency = [tuple(sorted(s)) for s in adj]
    mine = sorted(simple_vertex_cycles(adjacency))
    oracle = dfs_undirected_cycles(adjacency)
    assert mine == oracle


@given(st.permutations(list(range(6))))
@settings(max_examples=60, deadline=None)
def test_canonical_invariant_under_rotation_and_reversal(perm):
    verts = tuple(perm)
    base = canonical_form(verts)
    for k in range(len(verts)):
        rotated = verts[k:] + verts[:k]
        assert canonical_form(rotated).key == base.key
        assert canonical_form(tuple(reversed(rotated))).key == base.key
