"""Simple-cycle enumeration and canonical cycle identities.

Cycles are enumerated with Johnson's blocking algorithm on the directed
support graph and post-filtered to canonical undirected cycles, so each
bidirectional cycle is reported once with a well-defined pairing of its
two orientations:

* canonical rotation starts at the smallest vertex id;
* the forward orientation is the one whose second vertex id is smaller
  than its last (ties between 2-cycle orientations break on channel ids).

In collapsed mode a cycle needs at least three vertices; in multigraph
mode a two-state loop through two distinct parallel channels is a legal
cycle and every step of every cycle fixes a specific channel.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, Sequence

from .errors import CycleBudgetExceeded
from .network import COLLAPSED, MULTIGRAPH, TransitionNetwork

DEFAULT_CYCLE_BUDGET = 200_000


@dataclass(frozen=True)
class CanonicalCycle:
    """A cycle in canonical rotation plus the orientation of its source.

    ``vertices`` lists the forward orientation starting at the minimal id;
    ``channels`` (multigraph only) holds the channel index of each forward
    step, aligned with ``vertices``.  ``reversed_input`` records whether
    the cycle this canonical form was derived from ran opposite to the
    forward orientation; it is not part of the identity key.
    """

    vertices: tuple[int, ...]
    channels: tuple[int, ...] | None = None
    reversed_input: bool = False

    @property
    def key(self) -> tuple:
        """Identity of the undirected cycle; a total order for tie-breaking."""
        return (self.vertices, self.channels or ())

    def __len__(self) -> int:
        return len(self.vertices)

    def steps(self, reverse: bool = False) -> list[tuple[int, int]]:
        """Directed vertex pairs of the forward (or backward) orientation."""
        v = self.vertices
        pairs = [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]
        if reverse:
            pairs = [(b, a) for a, b in reversed(pairs)]
        return pairs

    def format(self, labels: Sequence[str] | None = None) -> str:
        """Serialise as an arrow-joined closed label sequence."""
        names = [str(v) if labels is None else labels[v] for v in self.vertices]
        return "→".join(names + [names[0]])


def canonical_form(
    vertices: Sequence[int], channels: Sequence[int] | None = None
) -> CanonicalCycle:
    """Canonical identity of a cycle given as an ordered vertex list.

    ``channels[i]``, when given, is the channel used on the step from
    ``vertices[i]`` to ``vertices[i+1]`` (wrapping).  Idempotent: feeding
    a canonical cycle's own vertex order back returns the same key with
    ``reversed_input=False``.
    """
    v = tuple(vertices)
    k = len(v)
    if k < 2 or len(set(v)) != k:
        raise ValueError(f"not a simple cycle: {v!r}")
    ch = tuple(channels) if channels is not None else None
    if ch is not None and len(ch) != k:
        raise ValueError("need one channel per step")

    m = v.index(min(v))
    fwd_v = v[m:] + v[:m]
    # reversal keeps the minimal vertex first: (v0, vk-1, ..., v1)
    rev_v = (fwd_v[0],) + tuple(reversed(fwd_v[1:]))
    fwd_ch = None if ch is None else ch[m:] + ch[:m]
    # step i of the reversed orientation is the reverse of forward step -(i+1)
    rev_ch = None if ch is None else tuple(reversed(fwd_ch))

    if k == 2:
        use_reversed = False if ch is None else fwd_ch > rev_ch
    elif fwd_v[1] < fwd_v[-1]:
        use_reversed = False
    elif fwd_v[1] > fwd_v[-1]:
        use_reversed = True
    else:  # pragma: no cover - impossible for simple cycles of length > 2
        use_reversed = False
    if use_reversed:
        return CanonicalCycle(rev_v, rev_ch, reversed_input=True)
    return CanonicalCycle(fwd_v, fwd_ch, reversed_input=False)


def simple_vertex_cycles(
    adjacency: Sequence[Iterable[int]],
    min_length: int = 3,
    budget: int = DEFAULT_CYCLE_BUDGET,
):
    """Yield each undirected simple cycle of the support graph once.

    Johnson's algorithm over directed arcs rooted at each start vertex in
    increasing order; the forward representative (second id < last id) of
    every cycle is kept, which visits each undirected cycle exactly once
    because the support is symmetric.
    """
    n = len(adjacency)
    found = 0
    for start in range(n):
        # restrict to vertices >= start so each cycle is rooted at its minimum
        allowed = [tuple(w for w in adjacency[v] if w >= start) for v in range(n)]
        blocked = {start}
        blist: dict[int, set[int]] = defaultdict(set)
        path = [start]
        closed = [False]
        stack = [iter(allowed[start])]
        while stack:
            advanced = False
            for w in stack[-1]:
                if w == start:
                    if len(path) >= min_length and path[1] < path[-1]:
                        found += 1
                        if found > budget:
                            raise CycleBudgetExceeded(
                                f"more than {budget} cycles; raise the budget to proceed"
                            )
                        yield tuple(path)
                    closed[-1] = True
                elif w > start and w not in blocked:
                    path.append(w)
                    blocked.add(w)
                    closed.append(False)
                    stack.append(iter(allowed[w]))
                    advanced = True
                    break
            if advanced:
                continue
            stack.pop()
            v = path.pop()
            if closed.pop():
                if closed:
                    closed[-1] = True
                unblock = {v}
                while unblock:
                    u = unblock.pop()
                    if u in blocked and u != start:
                        blocked.remove(u)
                        unblock.update(blist[u])
                        blist[u].clear()
            else:
                for w in allowed[v]:
                    blist[w].add(v)


def enumerate_cycles(
    net: TransitionNetwork,
    mode: str | None = None,
    budget: int = DEFAULT_CYCLE_BUDGET,
) -> list[CanonicalCycle]:
    """All simple cycles of the network as sorted canonical cycles.

    Collapsed mode: cycles of the collapsed support, length >= 3.
    Multigraph mode: additionally one cycle per combination of parallel
    channels along the way, plus 2-cycles through distinct channel pairs.
    Raises :class:`CycleBudgetExceeded` beyond ``budget`` cycles.
    """
    mode = net.mode if mode is None else mode
    if mode == COLLAPSED:
        out = [canonical_form(v) for v in simple_vertex_cycles(net.adjacency, 3, budget)]
        out.sort(key=lambda c: c.key)
        return out

    chans_by_pair: dict[tuple[int, int], list[int]] = defaultdict(list)
    for idx, ch in enumerate(net.channels):
        chans_by_pair[ch.pair].append(idx)

    out = []
    for (a, b), members in sorted(chans_by_pair.items()):
        for c1, c2 in combinations(sorted(members), 2):
            out.append(CanonicalCycle((a, b), (c1, c2)))
    count = len(out)
    for verts in simple_vertex_cycles(net.adjacency, 3, budget):
        options = []
        for i, v in enumerate(verts):
            w = verts[(i + 1) % len(verts)]
            options.append(sorted(chans_by_pair[(min(v, w), max(v, w))]))
        for combo in product(*options):
            count += 1
            if count > budget:
                raise CycleBudgetExceeded(
                    f"more than {budget} cycles; raise the budget to proceed"
                )
            out.append(canonical_form(verts, combo))
    out.sort(key=lambda c: c.key)
    return out


def directed_cycle_from_labels(
    net: TransitionNetwork, labels: Sequence[str]
) -> CanonicalCycle:
    """Canonical cycle for an explicit label walk, e.g. from a figure caption.

    The walk may or may not repeat the first label at the end.  The
    returned ``reversed_input`` flag tells whether the walk runs against
    the canonical forward orientation.
    """
    seq = list(labels)
    if len(seq) > 1 and seq[0] == seq[-1]:
        seq = seq[:-1]
    return canonical_form([net.state_index(s) for s in seq])
