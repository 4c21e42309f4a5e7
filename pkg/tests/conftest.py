import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cycleflux import PumpParams, TransistorParams, build_network, build_pump, build_transistor


def ring_spec(n: int = 3, rate: float = 1.0) -> dict:
    """Symmetric n-state ring driven by one bosonic reservoir."""
    return {
        "states": [{"label": f"s{i}", "energy": 0.0} for i in range(n)],
        "reservoirs": [{"id": 0, "statistics": "boson", "T": 1.0, "coupling": 1.0}],
        "channels": [
            {
                "from": i,
                "to": (i + 1) % n,
                "reservoir": 0,
                "rate_fw": rate,
                "rate_bw": rate,
                "transported": {"energy": 0.0, "particle": 0.0, "spin": 0.0},
            }
            for i in range(n)
        ],
    }


def two_state_spec(k12: float = 2.0, k21: float = 3.0) -> dict:
    return {
        "states": [{"label": "a", "energy": 0.0}, {"label": "b", "energy": 0.0}],
        "reservoirs": [{"id": 0, "statistics": "boson", "T": 1.0, "coupling": 1.0}],
        "channels": [
            {
                "from": 0,
                "to": 1,
                "reservoir": 0,
                "rate_fw": k12,
                "rate_bw": k21,
                "transported": {"energy": 0.0, "particle": 0.0, "spin": 0.0},
            }
        ],
    }


@pytest.fixture
def ring3():
    return build_network(ring_spec(3))


@pytest.fixture
def two_state():
    return build_network(two_state_spec())


@pytest.fixture(scope="session")
def pump_default():
    return build_pump(PumpParams())


@pytest.fixture(scope="session")
def pump_biased():
    return build_pump(PumpParams(T1=1.2))


@pytest.fixture(scope="session")
def transistor_default():
    return build_transistor(TransistorParams())
