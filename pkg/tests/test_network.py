import json
import math

import numpy as np
import pytest

from conftest import ring_spec, two_state_spec
from cycleflux import (
    DanglingReference,
    DisconnectedGraph,
    DuplicateChannel,
    InvalidChannel,
    InvalidRate,
    InvalidReservoir,
    build_laplacian,
    build_network,
    build_pump,
    network_to_json,
    validate_detailed_balance,
)
from cycleflux.network import ReservoirSpec


def test_minimal_ring(ring3):
    assert ring3.n_states == 3
    assert len(ring3.channels) == 3
    assert len(ring3.edges()) == 3


def test_pump_network_shape():
    net = build_pump()
    assert net.n_states == 6
    # 12 per-reservoir channels collapse onto 9 effective edges: the three
    # upper-dot edges are each driven by both spinless reservoirs
    assert len(net.channels) == 12
    assert len(net.edges("collapsed")) == 9
    assert len(net.edges("multigraph")) == 12


def test_isolated_state_rejected():
    spec = ring_spec(3)
    spec["states"].append({"label": "orphan", "energy": 0.0})
    with pytest.raises(DisconnectedGraph):
        build_network(spec)


def test_negative_rate_rejected():
    spec = two_state_spec(k12=-1.0)
    with pytest.raises(InvalidRate):
        build_network(spec)


def test_nan_rate_rejected():
    spec = two_state_spec(k12=float("nan"))
    with pytest.raises(InvalidRate):
        build_network(spec)


def test_dangling_state_reference():
    spec = two_state_spec()
    spec["channels"][0]["to"] = 5
    with pytest.raises(DanglingReference):
        build_network(spec)


def test_dangling_reservoir_reference():
    spec = two_state_spec()
    spec["channels"][0]["reservoir"] = 9
    with pytest.raises(DanglingReference):
        build_network(spec)


def test_duplicate_channel_rejected():
    spec = two_state_spec()
    spec["channels"].append(dict(spec["channels"][0]))
    with pytest.raises(DuplicateChannel):
        build_network(spec)


def test_reversed_duplicate_rejected():
    # same unordered pair + reservoir entered in the opposite direction
    spec = two_state_spec()
    dup = dict(spec["channels"][0])
    dup["from"], dup["to"] = dup["to"], dup["from"]
    spec["channels"].append(dup)
    with pytest.raises(DuplicateChannel):
        build_network(spec)


def test_self_loop_rejected():
    spec = two_state_spec()
    spec["channels"][0]["to"] = 0
    with pytest.raises(InvalidChannel):
        build_network(spec)


def test_reservoir_validation():
    with pytest.raises(InvalidReservoir):
        ReservoirSpec(0, "boson", temperature=-1.0)
    with pytest.raises(InvalidReservoir):
        ReservoirSpec(0, "boson", temperature=1.0, coupling=0.0)
    with pytest.raises(InvalidReservoir):
        ReservoirSpec(0, "anyon", temperature=1.0)
    with pytest.raises(InvalidReservoir):
        ReservoirSpec(0, "boson", temperature=1.0, chemical_potential=0.5)


def test_laplacian_symmetric_ring(ring3):
    L = build_laplacian(ring3)
    assert np.allclose(L, [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])


def test_laplacian_two_state(two_state):
    L = build_laplacian(two_state)
    assert np.allclose(L, [[2, -3], [-2, 3]])


def test_laplacian_column_sums_and_signs():
    net = build_pump()
    L = build_laplacian(net)
    assert np.abs(L.sum(axis=0)).max() <= 1e-12 * np.abs(L).max()
    off = L - np.diag(np.diag(L))
    assert (off <= 0).all()
    assert (np.diag(L) >= 0).all()
    # 0 is an eigenvalue
    assert min(abs(np.linalg.eigvals(L))) < 1e-12 * np.abs(L).max()


def test_detailed_balance_boson_channel():
    # rates gamma*(N+1) down / gamma*N up across a gap of 1 at T=1
    n = 1.0 / math.expm1(1.0)
    spec = {
        "states": [{"label": "g", "energy": 0.0}, {"label": "e", "energy": 1.0}],
        "reservoirs": [{"id": 0, "statistics": "boson", "T": 1.0, "coupling": 1.0}],
        "channels": [
            {
                "from": 0,
                "to": 1,
                "reservoir": 0,
                "rate_fw": n,
                "rate_bw": n + 1.0,
                "transported": {"energy": 1.0, "particle": 0.0, "spin": 0.0},
            }
        ],
    }
    diag = validate_detailed_balance(build_network(spec))
    assert abs(diag[0].residual) < 1e-12
    assert not diag[0].zero_rate


def test_detailed_balance_fermion_at_symmetric_point():
    spec = {
        "states": [{"label": "0", "energy": 0.0}, {"label": "1", "energy": 0.0}],
        "reservoirs": [
            {"id": 0, "statistics": "fermion", "T": 2.0, "mu": 0.0, "coupling": 1.0}
        ],
        "channels": [
            {
                "from": 0,
                "to": 1,
                "reservoir": 0,
                "rate_fw": 0.5,
                "rate_bw": 0.5,
                "transported": {"energy": 0.0, "particle": 1.0, "spin": 0.0},
            }
        ],
    }
    diag = validate_detailed_balance(build_network(spec))
    assert diag[0].residual == pytest.approx(0.0, abs=1e-15)


def test_detailed_balance_detects_corruption():
    spec = ring_spec(3)
    offset = 0.37
    spec["channels"][0]["rate_fw"] = math.exp(offset)  # was 1.0
    net = build_network(spec)
    residuals = [d.residual for d in validate_detailed_balance(net)]
    assert residuals[0] == pytest.approx(offset, rel=1e-12)
    assert residuals[1] == pytest.approx(0.0, abs=1e-15)


def test_detailed_balance_zero_rate_flagged():
    spec = two_state_spec(k12=0.0, k21=1.0)
    diag = validate_detailed_balance(build_network(spec))
    assert diag[0].zero_rate
    assert math.isnan(diag[0].residual)


def test_json_round_trip():
    net = build_pump()
    blob = json.dumps(network_to_json(net), ensure_ascii=False)
    net2 = build_network(json.loads(blob))
    assert net2.labels == net.labels
    assert net2.mode == net.mode
    assert len(net2.channels) == len(net.channels)
    for a, b in zip(net.channels, net2.channels):
        assert a == b
    for a, b in zip(net.reservoirs, net2.reservoirs):
        assert a == b
    assert np.array_equal(net.rate_matrix, net2.rate_matrix)


def test_rescaled_scales_rates_linearly():
    net = build_pump()
    net2 = net.rescaled(10.0)
    assert np.allclose(net2.rate_matrix, 10.0 * net.rate_matrix, rtol=0, atol=0)
