"""Stationary distribution, edge fluxes and per-reservoir currents.

The stationary vector is obtained by subtraction-free Gaussian elimination
on the rate matrix (the state-reduction scheme of Grassmann, Taksar and
Heyman), which is entrywise relatively accurate even when the stationary
probabilities span many orders of magnitude.  It is cross-checked against
the independent tree-theorem route ``p_i ~ det(L[i;i])``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import MissingAnnotation, SingularBeyondRankOne
from .network import COLLAPSED, TransitionNetwork, build_laplacian

#: relative tolerance for the stationarity residual ||Lp|| <= tol * ||L|| * ||p||
RESIDUAL_RTOL = 1e-10
#: relative tolerance for the GTH vs tree-theorem cross-check
CROSS_CHECK_RTOL = 1e-8


def principal_minors(L: np.ndarray) -> np.ndarray:
    """All first principal minors det(L[i;i]) of the Laplacian.

    By the matrix-tree theorem each minor is the weight sum of the
    spanning trees converging on state i, hence non-negative.
    """
    n = L.shape[0]
    out = np.empty(n)
    for i in range(n):
        sub = np.delete(np.delete(L, i, axis=0), i, axis=1)
        out[i] = np.linalg.det(sub)
    return out


def steady_state_from_tree_theorem(L: np.ndarray) -> np.ndarray:
    """Stationary distribution as normalised principal minors of L."""
    d = np.clip(principal_minors(L), 0.0, None)
    total = d.sum()
    if not (total > 0.0) or not np.isfinite(total):
        raise SingularBeyondRankOne(
            "all rooted spanning-tree weights vanish; no unique stationary state"
        )
    return d / total


def _n_terminal_classes(K: np.ndarray) -> int:
    """Number of closed communicating classes of the directed support of K."""
    n = K.shape[0]
    support = csr_matrix((K > 0.0).astype(np.int8))
    n_comp, labels = connected_components(support, directed=True, connection="strong")
    has_exit = np.zeros(n_comp, dtype=bool)
    rows, cols = support.nonzero()
    for i, j in zip(rows, cols):
        if labels[i] != labels[j]:
            has_exit[labels[i]] = True
    return int((~has_exit).sum())


def _gth(K: np.ndarray) -> np.ndarray | None:
    """State-reduction stationary vector; None when a pivot vanishes."""
    A = np.array(K, dtype=float)
    np.fill_diagonal(A, 0.0)
    n = A.shape[0]
    for k in range(n - 1, 0, -1):
        s = A[k, :k].sum()
        if not (s > 0.0):
            return None
        A[:k, k] /= s
        A[:k, :k] += np.outer(A[:k, k], A[k, :k])
    p = np.ones(n)
    for k in range(1, n):
        p[k] = p[:k] @ A[:k, k]
    return p / p.sum()


def solve_steady_state(net: TransitionNetwork, check: bool = True) -> np.ndarray:
    """Stationary probability vector p with Lp = 0 and sum(p) = 1.

    Raises :class:`SingularBeyondRankOne` when the network admits more
    than one stationary distribution (more than one closed communicating
    class), which cannot happen for networks whose channels all carry
    strictly positive rates in both directions.

    With ``check=True`` the result is verified against the independent
    tree-theorem ratios det(L[i;i]) to ``CROSS_CHECK_RTOL`` entrywise.
    """
    K = net.rate_matrix
    if _n_terminal_classes(K) != 1:
        raise SingularBeyondRankOne(
            "network has more than one closed communicating class"
        )
    L = build_laplacian(net)
    p = _gth(K)
    if p is None:
        # zero pivot: some state only reaches lower-indexed states through
        # transitions that vanished; the minor route still applies.
        p = steady_state_from_tree_theorem(L)

    scale = np.abs(L).max() * np.abs(p).max()
    residual = np.abs(L @ p).max()
    if residual > RESIDUAL_RTOL * scale:
        raise SingularBeyondRankOne(
            f"stationarity residual {residual:.3e} exceeds {RESIDUAL_RTOL:.0e} * {scale:.3e}"
        )
    if check:
        q = steady_state_from_tree_theorem(L)
        denom = np.maximum(np.maximum(p, q), 1e-300)
        worst = np.abs(p - q) / denom
        if worst.max() > CROSS_CHECK_RTOL:
            raise SingularBeyondRankOne(
                "steady-state cross-check failed: elimination and tree-theorem "
                f"routes disagree by {worst.max():.3e} (entrywise relative)"
            )
    return p


@dataclass(frozen=True)
class EdgeFlow:
    """Directional probability flows along one edge or channel."""

    a: int
    b: int
    forward: float   # flow a -> b
    backward: float  # flow b -> a
    reservoir: int | None = None

    @property
    def net(self) -> float:
        return self.forward - self.backward


@dataclass(frozen=True)
class EdgeFluxMap:
    """Per-channel and per-edge steady flows for a given probability vector."""

    per_channel: tuple[EdgeFlow, ...]
    per_edge: tuple[EdgeFlow, ...]
    n_states: int

    def divergence(self) -> np.ndarray:
        """Signed net outflow per state; zero at stationarity (Kirchhoff law)."""
        div = np.zeros(self.n_states)
        for f in self.per_channel:
            div[f.a] += f.net
            div[f.b] -= f.net
        return div

    @property
    def max_flow(self) -> float:
        return max((max(f.forward, f.backward) for f in self.per_channel), default=0.0)


def edge_fluxes(net: TransitionNetwork, p: np.ndarray, mode: str | None = None) -> EdgeFluxMap:
    """One-directional and net flows per channel and per edge under p."""
    per_channel = tuple(
        EdgeFlow(
            ch.from_state,
            ch.to_state,
            ch.rate_forward * p[ch.from_state],
            ch.rate_backward * p[ch.to_state],
            ch.reservoir,
        )
        for ch in net.channels
    )
    mode = net.mode if mode is None else mode
    if mode == COLLAPSED:
        per_edge = tuple(
            EdgeFlow(e.a, e.b, e.rate_ab * p[e.a], e.rate_ba * p[e.b])
            for e in net.edges(COLLAPSED)
        )
    else:
        per_edge = per_channel
    return EdgeFluxMap(per_channel, per_edge, net.n_states)


@dataclass(frozen=True)
class CurrentReport:
    """Steady currents from each reservoir into the system.

    ``heat`` subtracts the chemical-potential work: for a channel of
    reservoir v each transferred particle carries mu_v of non-heat energy,
    so heat = energy - mu_v * particle.  Energy currents sum to zero over
    reservoirs at stationarity; so do globally conserved quantities.
    """

    reservoir_ids: tuple[int, ...]
    energy: dict[int, float]
    heat: dict[int, float]
    particle: dict[int, float]
    spin: dict[int, float]

    def rows(self, sweep_value: float | str = "") -> list[tuple]:
        """CSV rows (sweep_value, reservoir_id, quantity, current)."""
        out = []
        for rid in self.reservoir_ids:
            for quantity, table in (
                ("energy", self.energy),
                ("heat", self.heat),
                ("particle", self.particle),
                ("spin", self.spin),
            ):
                out.append((sweep_value, rid, quantity, table[rid]))
        return out


def reservoir_currents(net: TransitionNetwork, p: np.ndarray) -> CurrentReport:
    """Per-reservoir energy/heat/particle/spin currents (positive = into system).

    Every channel must carry ``energy``, ``particle`` and ``spin``
    annotations; a missing key raises :class:`MissingAnnotation`.
    """
    ids = tuple(r.id for r in net.reservoirs)
    energy = {rid: 0.0 for rid in ids}
    heat = {rid: 0.0 for rid in ids}
    particle = {rid: 0.0 for rid in ids}
    spin = {rid: 0.0 for rid in ids}
    for idx, ch in enumerate(net.channels):
        for q in ("energy", "particle", "spin"):
            if q not in ch.transported:
                raise MissingAnnotation(
                    f"channel #{idx} ({ch.from_state}->{ch.to_state}) lacks the "
                    f"{q!r} annotation"
                )
        j = ch.rate_forward * p[ch.from_state] - ch.rate_backward * p[ch.to_state]
        mu = net.reservoir_by_id[ch.reservoir].chemical_potential
        de = float(ch.transported["energy"])
        dn = float(ch.transported["particle"])
        ds = float(ch.transported["spin"])
        energy[ch.reservoir] += de * j
        heat[ch.reservoir] += (de - mu * dn) * j
        particle[ch.reservoir] += dn * j
        spin[ch.reservoir] += ds * j
    return CurrentReport(ids, energy, heat, particle, spin)
