"""Cycle weights, rooted spanning-tree minors, cycle fluxes and rankings.

The one-directional flux of a cycle orientation is the product of its
directed rates times the weight sum of the spanning trees rooted on the
cycle (a principal minor of the Laplacian), normalised by the weight sum
of the trees rooted on every individual state:

    j = weight(orientation) * det(L[C;C]) / sum_i det(L[i;i])

Both orientations of a canonical cycle are carried in one record, along
with the affinity and the quantities transported per forward completion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .cycles import CanonicalCycle, enumerate_cycles
from .errors import NumericalUnderflow
from .network import COLLAPSED, MULTIGRAPH, TransitionNetwork, build_laplacian
from .steady import principal_minors, solve_steady_state


def rooted_minor(L: np.ndarray, vertices: Iterable[int]) -> float:
    """det of L with the rows and columns of ``vertices`` deleted.

    Equals the weight sum of spanning trees rooted on (oriented towards)
    the vertex set, hence non-negative; tiny negative round-off is clamped.
    Deleting every vertex leaves the empty matrix, whose determinant is 1.
    """
    idx = sorted(set(vertices))
    n = L.shape[0]
    if len(idx) == n:
        return 1.0
    sub = np.delete(np.delete(L, idx, axis=0), idx, axis=1)
    return max(float(np.linalg.det(sub)), 0.0)


def cycle_weight(net: TransitionNetwork, cycle: CanonicalCycle, reverse: bool = False) -> float:
    """Product of directed rates along one orientation of the cycle.

    Collapsed cycles use the reservoir-summed edge rates; multigraph
    cycles use the rates of their specific channels.
    """
    if cycle.channels is None:
        K = net.rate_matrix
        w = 1.0
        for a, b in cycle.steps(reverse):
            w *= K[a, b]
        return w
    w = 1.0
    steps = cycle.steps(reverse)
    chans = cycle.channels if not reverse else tuple(reversed(cycle.channels))
    for (a, b), ci in zip(steps, chans):
        ch = net.channels[ci]
        w *= ch.rate_forward if ch.from_state == a else ch.rate_backward
    return w


@dataclass(frozen=True)
class CycleFluxRecord:
    """Flux data for both orientations of one canonical cycle.

    ``transport[rid][q]`` is the expected amount of quantity q drawn from
    reservoir rid per forward completion; on collapsed edges driven by
    several reservoirs the attribution splits by rate share.
    """

    cycle: CanonicalCycle
    pi_forward: float
    pi_backward: float
    rooted_minor: float
    normalization: float
    j_forward: float
    j_backward: float
    transport: dict[int, dict[str, float]]

    @property
    def j_net(self) -> float:
        return self.j_forward - self.j_backward

    @property
    def traffic(self) -> float:
        return max(self.j_forward, self.j_backward)

    @property
    def affinity(self) -> float:
        """ln of the forward/backward weight ratio; the driving force."""
        if self.pi_forward > 0.0 and self.pi_backward > 0.0:
            return math.log(self.pi_forward / self.pi_backward)
        if self.pi_forward == self.pi_backward:
            return math.nan
        return math.inf if self.pi_forward > self.pi_backward else -math.inf


def _cycle_transport(net: TransitionNetwork, cycle: CanonicalCycle) -> dict[int, dict[str, float]]:
    out: dict[int, dict[str, float]] = {r.id: {} for r in net.reservoirs}

    def add(rid: int, quantities, weight: float, sign: float) -> None:
        table = out[rid]
        for q, val in quantities.items():
            table[q] = table.get(q, 0.0) + sign * weight * float(val)

    if cycle.channels is not None:
        for (a, b), ci in zip(cycle.steps(), cycle.channels):
            ch = net.channels[ci]
            sign = 1.0 if ch.from_state == a else -1.0
            add(ch.reservoir, ch.transported, 1.0, sign)
        return out

    K = net.rate_matrix
    members: dict[tuple[int, int], list[int]] = {}
    for i, ch in enumerate(net.channels):
        members.setdefault(ch.pair, []).append(i)
    for a, b in cycle.steps():
        total = K[a, b]
        if total <= 0.0:
            continue  # no forward completion can traverse this step
        for ci in members[(min(a, b), max(a, b))]:
            ch = net.channels[ci]
            if ch.from_state == a:
                rate, sign = ch.rate_forward, 1.0
            else:
                rate, sign = ch.rate_backward, -1.0
            if rate > 0.0:
                add(ch.reservoir, ch.transported, rate / total, sign)
    return out


def normalization_constant(L: np.ndarray) -> float:
    """Sum over states of the rooted spanning-tree weights, sum_i det(L[i;i])."""
    total = float(np.clip(principal_minors(L), 0.0, None).sum())
    if total <= 0.0 or not math.isfinite(total):
        raise NumericalUnderflow(
            "spanning-tree normalisation left double range; rescale the rates "
            "globally (TransitionNetwork.rescaled) and recompute"
        )
    return total


def cycle_flux_pair(
    net: TransitionNetwork,
    cycle: CanonicalCycle | Sequence[int],
    L: np.ndarray | None = None,
    normalization: float | None = None,
) -> CycleFluxRecord:
    """Flux record of one canonical cycle (L and normalisation reusable)."""
    if not isinstance(cycle, CanonicalCycle):
        from .cycles import canonical_form

        cycle = canonical_form(cycle)
    if L is None:
        L = build_laplacian(net)
    if normalization is None:
        normalization = normalization_constant(L)
    minor = rooted_minor(L, cycle.vertices)
    pi_f = cycle_weight(net, cycle)
    pi_b = cycle_weight(net, cycle, reverse=True)
    return CycleFluxRecord(
        cycle=CanonicalCycle(cycle.vertices, cycle.channels),
        pi_forward=pi_f,
        pi_backward=pi_b,
        rooted_minor=minor,
        normalization=normalization,
        j_forward=pi_f * minor / normalization,
        j_backward=pi_b * minor / normalization,
        transport=_cycle_transport(net, cycle),
    )


def all_cycle_records(
    net: TransitionNetwork,
    cycles: Sequence[CanonicalCycle] | None = None,
    mode: str | None = None,
) -> list[CycleFluxRecord]:
    """Flux records for every cycle, sharing one Laplacian and normalisation."""
    if cycles is None:
        cycles = enumerate_cycles(net, mode=mode)
    L = build_laplacian(net)
    norm = normalization_constant(L)
    return [cycle_flux_pair(net, c, L, norm) for c in cycles]


def rank_cycles(
    net: TransitionNetwork,
    k: int | None = None,
    key: str = "traffic",
    records: Sequence[CycleFluxRecord] | None = None,
) -> list[CycleFluxRecord]:
    """Top-k cycles sorted by ``traffic`` (default) or ``net`` flux magnitude.

    Traffic ranking max(J_f, J_b) surfaces the busiest trajectories even
    when they are futile; ties break on the canonical key, so the order
    is deterministic across parameter sweeps.
    """
    if key not in ("traffic", "net"):
        raise ValueError(f"unknown ranking key {key!r}")
    if records is None:
        records = all_cycle_records(net)
    metric = (lambda r: r.traffic) if key == "traffic" else (lambda r: abs(r.j_net))
    ranked = sorted(records, key=lambda r: (-metric(r), r.cycle.key))
    return ranked if k is None else ranked[:k]


@dataclass(frozen=True)
class EdgeDecomposition:
    """Cycle-flux decomposition of one directed edge flux.

    ``contributions`` holds (record, signed j_net) for every cycle through
    the edge, oriented along (a -> b).  ``residual_rel`` is the mismatch
    against the steady-state edge flux relative to the larger of the net
    flux magnitude and the gross one-directional cycle traffic (so that a
    vanishing net flux at equilibrium does not blow the ratio up).
    """

    a: int
    b: int
    contributions: tuple
    cycle_sum: float
    steady_flux: float

    @property
    def residual(self) -> float:
        return abs(self.cycle_sum - self.steady_flux)

    @property
    def residual_rel(self) -> float:
        gross = sum(r.j_forward + r.j_backward for r, _ in self.contributions)
        scale = max(abs(self.steady_flux), gross)
        return self.residual / scale if scale > 0.0 else 0.0


def decompose_edge_flux(
    net: TransitionNetwork,
    edge: tuple[int, int],
    records: Sequence[CycleFluxRecord] | None = None,
    p: np.ndarray | None = None,
    channel: int | None = None,
) -> EdgeDecomposition:
    """Net flux through ``edge = (a, b)`` as a sum of net cycle fluxes.

    In multigraph mode pass ``channel`` to select the specific parallel
    channel whose flux is decomposed.  The steady-state reference flux is
    recomputed independently from the stationary distribution.
    """
    a, b = edge
    if channel is not None and net.channels[channel].pair != (min(a, b), max(a, b)):
        raise ValueError(f"channel {channel} does not connect states {a} and {b}")
    if records is None:
        records = all_cycle_records(net)
    if p is None:
        p = solve_steady_state(net)

    contributions = []
    total = 0.0
    for rec in records:
        steps = rec.cycle.steps()
        if channel is not None:
            if rec.cycle.channels is None:
                raise ValueError("channel-level decomposition needs multigraph cycles")
            # a simple cycle traverses any given channel at most once
            sign = 0.0
            for (u, v), ci in zip(steps, rec.cycle.channels):
                if ci == channel:
                    sign = 1.0 if (u, v) == (a, b) else -1.0
        elif (a, b) in steps:
            sign = 1.0
        elif (b, a) in steps:
            sign = -1.0
        else:
            sign = 0.0
        if sign != 0.0:
            contributions.append((rec, sign * rec.j_net))
            total += sign * rec.j_net

    if channel is not None:
        ch = net.channels[channel]
        if (ch.from_state, ch.to_state) == (a, b):
            steady = ch.rate_forward * p[a] - ch.rate_backward * p[b]
        else:
            steady = ch.rate_backward * p[a] - ch.rate_forward * p[b]
    else:
        K = net.rate_matrix
        steady = K[a, b] * p[a] - K[b, a] * p[b]
    return EdgeDecomposition(a, b, tuple(contributions), total, float(steady))


def decompose_all_edges(
    net: TransitionNetwork,
    records: Sequence[CycleFluxRecord] | None = None,
    p: np.ndarray | None = None,
) -> list[EdgeDecomposition]:
    """Decomposition of every collapsed edge (both computed quantities shared)."""
    if records is None:
        records = all_cycle_records(net)
    if p is None:
        p = solve_steady_state(net)
    return [
        decompose_edge_flux(net, (e.a, e.b), records, p)
        for e in net.edges(COLLAPSED)
    ]


def entropy_production(
    net: TransitionNetwork, records: Sequence[CycleFluxRecord] | None = None
) -> float:
    """Cycle-form entropy production rate, sum_C (J_f - J_b) ln(Pi_f / Pi_b).

    Non-negative term by term; zero exactly at equilibrium.  Scales
    linearly under global rate rescaling (it is a rate, not an entropy).
    Cycles with a one-directional orientation of nonzero flux contribute
    +inf (formally irreversible).
    """
    if records is None:
        records = all_cycle_records(net)
    total = 0.0
    for rec in records:
        if rec.j_forward == rec.j_backward:
            continue
        a = rec.affinity
        if math.isnan(a):
            continue
        total += rec.j_net * a
        if math.isinf(total):
            return math.inf
    return total
