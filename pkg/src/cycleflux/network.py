"""State-transition network data model and Laplacian construction.

A network is a set of quantum states (graph vertices), a set of thermal
reservoirs, and a list of directed transition channels.  Each channel is
owned by exactly one reservoir and carries forward/backward rates plus
annotations of the quantities (energy, particle, spin) transported into
the system on a forward transition.

Two graph views are supported:

* ``collapsed`` (default): parallel channels acting on the same unordered
  state pair are merged into one effective edge whose directional rates
  are the reservoir sums.  This is the view in which cycles are counted.
* ``multigraph``: every channel is its own edge, so a loop between two
  states through two distinct reservoirs is a legal 2-cycle.

Channels are always stored per reservoir regardless of mode, since
per-reservoir currents and detailed-balance checks need the breakdown;
the mode only controls the derived edge list and cycle semantics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    DanglingReference,
    DisconnectedGraph,
    DuplicateChannel,
    InvalidChannel,
    InvalidRate,
    InvalidReservoir,
)

COLLAPSED = "collapsed"
MULTIGRAPH = "multigraph"

FERMION = "fermion"
BOSON = "boson"

#: quantities every model builder annotates on each channel
QUANTITIES = ("energy", "particle", "spin")


@dataclass(frozen=True)
class StateNode:
    """A system eigenstate: dense integer id, unique label, energy, quantum numbers."""

    id: int
    label: str
    energy: float
    quantum_numbers: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ReservoirSpec:
    """A thermal reservoir with golden-rule prefactor ``coupling``.

    ``chemical_potential`` must be 0 for bosonic reservoirs.
    """

    id: int
    statistics: str
    temperature: float
    chemical_potential: float = 0.0
    coupling: float = 1.0
    name: str = ""

    def __post_init__(self):
        if self.statistics not in (FERMION, BOSON):
            raise InvalidReservoir(
                f"reservoir {self.id}: statistics must be '{FERMION}' or '{BOSON}', "
                f"got {self.statistics!r}"
            )
        if not (self.temperature > 0.0) or not math.isfinite(self.temperature):
            raise InvalidReservoir(
                f"reservoir {self.id}: temperature must be strictly positive"
            )
        if not (self.coupling > 0.0) or not math.isfinite(self.coupling):
            raise InvalidReservoir(
                f"reservoir {self.id}: coupling must be strictly positive"
            )
        if self.statistics == BOSON and self.chemical_potential != 0.0:
            raise InvalidReservoir(
                f"reservoir {self.id}: bosonic reservoirs must have zero chemical potential"
            )
        if not self.name:
            object.__setattr__(self, "name", str(self.id))


@dataclass(frozen=True)
class TransitionChannel:
    """A reservoir-induced transition between two states.

    ``rate_forward`` drives ``from_state -> to_state``; ``transported``
    maps quantity name to the amount carried into the system on one
    forward transition (sign convention: positive = into the system).
    """

    from_state: int
    to_state: int
    reservoir: int
    rate_forward: float
    rate_backward: float
    transported: Mapping[str, float] = field(default_factory=dict)

    @property
    def pair(self) -> tuple[int, int]:
        a, b = self.from_state, self.to_state
        return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Edge:
    """A directed pair of flows between two states in a given graph view.

    For collapsed edges ``a < b`` and the rates are summed over the
    contributing channels; for multigraph edges ``(a, b)`` is the owning
    channel's ``(from_state, to_state)``.
    """

    a: int
    b: int
    rate_ab: float
    rate_ba: float
    channel_indices: tuple[int, ...]


@dataclass(frozen=True)
class TransitionNetwork:
    """Immutable transition network; all analysis routines are pure reads."""

    states: tuple[StateNode, ...]
    reservoirs: tuple[ReservoirSpec, ...]
    channels: tuple[TransitionChannel, ...]
    mode: str = COLLAPSED

    @property
    def n_states(self) -> int:
        return len(self.states)

    @cached_property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.states)

    @cached_property
    def energies(self) -> np.ndarray:
        e = np.array([s.energy for s in self.states], dtype=float)
        e.setflags(write=False)
        return e

    @cached_property
    def reservoir_by_id(self) -> dict[int, ReservoirSpec]:
        return {r.id: r for r in self.reservoirs}

    def state_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no state labelled {label!r}") from None

    @cached_property
    def rate_matrix(self) -> np.ndarray:
        """Total rate matrix K with K[i, j] = sum over channels of rate i->j."""
        K = np.zeros((self.n_states, self.n_states))
        for ch in self.channels:
            K[ch.from_state, ch.to_state] += ch.rate_forward
            K[ch.to_state, ch.from_state] += ch.rate_backward
        K.setflags(write=False)
        return K

    @cached_property
    def collapsed_edges(self) -> tuple[Edge, ...]:
        by_pair: dict[tuple[int, int], list[int]] = {}
        for idx, ch in enumerate(self.channels):
            by_pair.setdefault(ch.pair, []).append(idx)
        K = self.rate_matrix
        return tuple(
            Edge(a, b, K[a, b], K[b, a], tuple(members))
            for (a, b), members in sorted(by_pair.items())
        )

    def edges(self, mode: str | None = None) -> tuple[Edge, ...]:
        """Edge list in the requested graph view (defaults to ``self.mode``)."""
        mode = self.mode if mode is None else mode
        if mode == COLLAPSED:
            return self.collapsed_edges
        return tuple(
            Edge(ch.from_state, ch.to_state, ch.rate_forward, ch.rate_backward, (i,))
            for i, ch in enumerate(self.channels)
        )

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Undirected support adjacency (sorted neighbour lists) over all channels."""
        nbrs: list[set[int]] = [set() for _ in range(self.n_states)]
        for ch in self.channels:
            if ch.rate_forward > 0.0 or ch.rate_backward > 0.0:
                nbrs[ch.from_state].add(ch.to_state)
                nbrs[ch.to_state].add(ch.from_state)
        return tuple(tuple(sorted(n)) for n in nbrs)

    def rescaled(self, factor: float) -> "TransitionNetwork":
        """Copy of the network with every rate multiplied by ``factor``.

        Fluxes scale linearly with ``factor`` while flux ratios, affinities
        and the steady state are invariant; use this to pull extreme rate
        magnitudes back into comfortable double range.
        """
        if not (factor > 0.0) or not math.isfinite(factor):
            raise InvalidRate("rescale factor must be positive and finite")
        chans = tuple(
            TransitionChannel(
                ch.from_state,
                ch.to_state,
                ch.reservoir,
                ch.rate_forward * factor,
                ch.rate_backward * factor,
                dict(ch.transported),
            )
            for ch in self.channels
        )
        return TransitionNetwork(self.states, self.reservoirs, chans, self.mode)


def _check_connected(n: int, adjacency) -> None:
    if n == 0:
        raise DisconnectedGraph("network has no states")
    seen = {0}
    stack = [0]
    while stack:
        for w in adjacency[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != n:
        missing = sorted(set(range(n)) - seen)
        raise DisconnectedGraph(
            f"support graph is disconnected; states {missing} unreachable from state 0"
        )


def build_network(spec: Mapping) -> TransitionNetwork:
    """Construct and validate a :class:`TransitionNetwork` from a declarative spec.

    ``spec`` follows the JSON schema documented in the README: top-level
    keys ``states`` (label, energy, quantum_numbers), ``reservoirs``
    (id, statistics, T, mu, coupling), ``channels`` (from, to, reservoir,
    rate_fw, rate_bw, transported) and optionally ``mode``.

    Raises :class:`DisconnectedGraph`, :class:`InvalidRate`,
    :class:`DanglingReference`, :class:`DuplicateChannel`,
    :class:`InvalidChannel` or :class:`InvalidReservoir` on bad input.
    """
    mode = spec.get("mode", COLLAPSED)
    if mode not in (COLLAPSED, MULTIGRAPH):
        raise InvalidChannel(f"unknown mode {mode!r}")

    states = []
    labels_seen = set()
    for i, s in enumerate(spec.get("states", [])):
        label = s.get("label", f"state{i}")
        if label in labels_seen:
            raise InvalidChannel(f"duplicate state label {label!r}")
        labels_seen.add(label)
        states.append(
            StateNode(
                id=i,
                label=label,
                energy=float(s.get("energy", 0.0)),
                quantum_numbers=dict(s.get("quantum_numbers", {})),
            )
        )

    reservoirs = []
    for r in spec.get("reservoirs", []):
        if "id" not in r:
            raise DanglingReference("reservoir entry lacks an id")
        reservoirs.append(
            ReservoirSpec(
                id=int(r["id"]),
                statistics=r.get("statistics", BOSON),
                temperature=float(r.get("T", r.get("temperature", 0.0))),
                chemical_potential=float(r.get("mu", r.get("chemical_potential", 0.0))),
                coupling=float(r.get("coupling", 1.0)),
                name=str(r.get("name", "")),
            )
        )
    rids = [r.id for r in reservoirs]
    if len(set(rids)) != len(rids):
        raise DanglingReference("duplicate reservoir ids")
    rid_set = set(rids)

    n = len(states)
    channels = []
    seen_keys = set()
    for c in spec.get("channels", []):
        frm = int(c["from"])
        to = int(c["to"])
        res = int(c["reservoir"])
        if not (0 <= frm < n) or not (0 <= to < n):
            raise DanglingReference(f"channel references unknown state: {frm}->{to}")
        if res not in rid_set:
            raise DanglingReference(f"channel references unknown reservoir {res}")
        if frm == to:
            raise InvalidChannel(f"self-loop channel on state {frm}")
        kf = float(c.get("rate_fw", c.get("rate_forward", 0.0)))
        kb = float(c.get("rate_bw", c.get("rate_backward", 0.0)))
        for k in (kf, kb):
            if not math.isfinite(k) or k < 0.0:
                raise InvalidRate(
                    f"channel {frm}->{to} via reservoir {res}: rate {k!r} "
                    "must be finite and non-negative"
                )
        key = (min(frm, to), max(frm, to), res)
        if key in seen_keys:
            raise DuplicateChannel(
                f"duplicate channel for state pair {key[:2]} and reservoir {res}"
            )
        seen_keys.add(key)
        channels.append(
            TransitionChannel(
                from_state=frm,
                to_state=to,
                reservoir=res,
                rate_forward=kf,
                rate_backward=kb,
                transported=dict(c.get("transported", {})),
            )
        )

    net = TransitionNetwork(
        states=tuple(states),
        reservoirs=tuple(reservoirs),
        channels=tuple(channels),
        mode=mode,
    )
    _check_connected(n, net.adjacency)
    return net


def build_laplacian(net: TransitionNetwork) -> np.ndarray:
    """Laplacian transition matrix L of the network.

    ``L[i, j] = -k(j -> i)`` for ``i != j`` and ``L[j, j]`` is the total
    escape rate of state j, so every column sums to zero exactly (the
    diagonal is built as minus the column sum of the off-diagonal part).
    """
    K = net.rate_matrix
    L = -K.T.copy()
    np.fill_diagonal(L, 0.0)
    np.fill_diagonal(L, -L.sum(axis=0))
    return L


@dataclass(frozen=True)
class ChannelDiagnostic:
    """Local-detailed-balance residual of one channel.

    ``residual = ln(k_fw / k_bw) + (dE - mu * dn) / T`` with the owning
    reservoir's temperature and chemical potential; zero for rates that
    obey local detailed balance.  ``zero_rate`` flags channels whose
    ratio is undefined (residual reported as nan, not fatal).
    """

    channel_index: int
    from_state: int
    to_state: int
    reservoir: int
    residual: float
    zero_rate: bool


def validate_detailed_balance(net: TransitionNetwork) -> list[ChannelDiagnostic]:
    """Per-channel local-detailed-balance residuals (see :class:`ChannelDiagnostic`)."""
    out = []
    E = net.energies
    for idx, ch in enumerate(net.channels):
        res = net.reservoir_by_id[ch.reservoir]
        dE = E[ch.to_state] - E[ch.from_state]
        dn = float(ch.transported.get("particle", 0.0))
        target = -(dE - res.chemical_potential * dn) / res.temperature
        if ch.rate_forward > 0.0 and ch.rate_backward > 0.0:
            residual = math.log(ch.rate_forward / ch.rate_backward) - target
            zero = False
        else:
            residual = math.nan
            zero = True
        out.append(
            ChannelDiagnostic(idx, ch.from_state, ch.to_state, ch.reservoir, residual, zero)
        )
    return out


def network_to_json(net: TransitionNetwork) -> dict:
    """Lossless JSON-serialisable description (inverse of :func:`build_network`)."""
    return {
        "states": [
            {
                "label": s.label,
                "energy": s.energy,
                "quantum_numbers": dict(s.quantum_numbers),
            }
            for s in net.states
        ],
        "reservoirs": [
            {
                "id": r.id,
                "statistics": r.statistics,
                "T": r.temperature,
                "mu": r.chemical_potential,
                "coupling": r.coupling,
                "name": r.name,
            }
            for r in net.reservoirs
        ],
        "channels": [
            {
                "from": c.from_state,
                "to": c.to_state,
                "reservoir": c.reservoir,
                "rate_fw": c.rate_forward,
                "rate_bw": c.rate_backward,
                "transported": dict(c.transported),
            }
            for c in net.channels
        ],
        "mode": net.mode,
    }


def save_network(net: TransitionNetwork, path: str | Path) -> None:
    Path(path).write_text(json.dumps(network_to_json(net), indent=2, ensure_ascii=False))


def load_network(path: str | Path) -> TransitionNetwork:
    return build_network(json.loads(Path(path).read_text()))
