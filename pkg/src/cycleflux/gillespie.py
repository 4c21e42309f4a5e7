"""Trajectory sampling and cycle-completion counting.

``simulate`` draws a continuous-time Markov chain realisation of the
network with numpy's PCG64 generator (bit-reproducible for a given seed).
``count_cycle_completions`` applies the visited-state stack rule: each
time the walker revisits a state on its stack, the enclosed loop is
popped and counted as one completion of its canonical cycle in the
traversed orientation.  Back-and-forth excursions (length-2 pops) are
discarded in collapsed mode and counted in multigraph mode only when the
two arcs used distinct channels.

The inner loops are compiled with numba when it is installed; the pure
Python fallbacks consume the random stream identically, so trajectories
do not depend on which path ran.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cycles import canonical_form
from .errors import AbsorbingState
from .network import COLLAPSED, MULTIGRAPH, TransitionNetwork

_BATCH = 1 << 16

# kernel exit codes
_EXHAUSTED, _FINISHED, _ABSORBED, _FULL = 0, 1, 2, 3


def _advance_py(
    states, dwell, fired, j, s, t, k,
    u_wait, u_pick, row_ptr, arc_target, arc_chan, arc_cum, exit_rate, total_time,
):
    limit = len(fired)
    nu = len(u_wait)
    while True:
        r = exit_rate[s]
        if r <= 0.0:
            return j, s, t, k, _ABSORBED
        if k >= nu:
            return j, s, t, k, _EXHAUSTED
        dt = u_wait[k] / r
        if t + dt >= total_time:
            dwell[j] = total_time - t
            return j, s, t, k + 1, _FINISHED
        if j >= limit:
            return j, s, t, k, _FULL
        lo = row_ptr[s]
        hi = row_ptr[s + 1]
        arc = lo + np.searchsorted(arc_cum[lo:hi], u_pick[k], side="right")
        if arc >= hi:
            arc = hi - 1
        k += 1
        dwell[j] = dt
        fired[j] = arc_chan[arc]
        s = arc_target[arc]
        t += dt
        j += 1
        states[j] = s


def _pop_loops_py(seq, chans, stack, entered, pos, out, collapsed, depth):
    """Emit popped loops into ``out`` as flattened (length, v, c, v, c, ...) rows.

    The visited-state stack (``stack``/``entered``/``pos`` and its
    ``depth``) persists across calls, so a long trajectory can be fed in
    chunks; ``seq[0]`` must be the state on top of the stack.  Returns the
    number of jumps processed (may stop early when ``out`` fills up), the
    number of ints written and the new stack depth.
    """
    written = 0
    n_out = len(out)
    for step in range(len(chans)):
        s = seq[step + 1]
        c = chans[step]
        i = pos[s]
        if i < 0:
            pos[s] = depth
            stack[depth] = s
            entered[depth] = c
            depth += 1
            continue
        length = depth - i
        keep = (length > 2) or (not collapsed and entered[i + 1] != c)
        if keep and written + 2 * length + 1 > n_out:
            return step, written, depth
        if keep:
            out[written] = length
            written += 1
            for d in range(i, depth):
                out[written] = stack[d]
                out[written + 1] = entered[d + 1] if d + 1 < depth else c
                written += 2
        for d in range(i + 1, depth):
            pos[stack[d]] = -1
        depth = i + 1
    return len(chans), written, depth


_advance = _advance_py
_pop_loops = _pop_loops_py
try:  # pragma: no cover - exercised when numba is installed
    from numba import njit

    _advance = njit(cache=True, nogil=True)(_advance_py)
    _pop_loops = njit(cache=True, nogil=True)(_pop_loops_py)
except ImportError:  # pragma: no cover
    pass


@dataclass(frozen=True)
class Trajectory:
    """A sampled path: visited states, dwell times and fired channels.

    ``states`` has one more entry than ``channels``; ``dwell[i]`` is the
    time spent in ``states[i]`` (the last dwell is truncated so the dwell
    times sum to ``total_time``).
    """

    states: np.ndarray
    dwell: np.ndarray
    channels: np.ndarray
    seed: int
    total_time: float

    @property
    def n_jumps(self) -> int:
        return len(self.channels)

    def occupancy(self, n_states: int) -> np.ndarray:
        """Fraction of the total time spent in each state."""
        out = np.bincount(self.states, weights=self.dwell, minlength=n_states)
        return out / self.total_time


def _flat_arcs(net: TransitionNetwork):
    n = net.n_states
    arcs: list[list[tuple[int, int, float]]] = [[] for _ in range(n)]
    for ci, ch in enumerate(net.channels):
        if ch.rate_forward > 0.0:
            arcs[ch.from_state].append((ch.to_state, ci, ch.rate_forward))
        if ch.rate_backward > 0.0:
            arcs[ch.to_state].append((ch.from_state, ci, ch.rate_backward))
    row_ptr = np.zeros(n + 1, dtype=np.int64)
    targets, chan_idx, cum = [], [], []
    exit_rate = np.zeros(n)
    for s in range(n):
        row_ptr[s + 1] = row_ptr[s] + len(arcs[s])
        rates = np.array([a[2] for a in arcs[s]], dtype=float)
        exit_rate[s] = rates.sum()
        targets.extend(a[0] for a in arcs[s])
        chan_idx.extend(a[1] for a in arcs[s])
        if exit_rate[s] > 0.0:
            cum.extend(np.cumsum(rates) / exit_rate[s])
        else:
            cum.extend(rates)
    return (
        row_ptr,
        np.array(targets, dtype=np.int64),
        np.array(chan_idx, dtype=np.int64),
        np.array(cum, dtype=float),
        exit_rate,
    )


def simulate(
    net: TransitionNetwork,
    total_time: float,
    seed: int,
    initial_state: int = 0,
) -> Trajectory:
    """Sample one trajectory of duration ``total_time`` from ``initial_state``.

    Raises :class:`AbsorbingState` when a state with zero total exit rate
    is reached.
    """
    if not (total_time > 0.0):
        raise ValueError("total_time must be positive")
    if not (0 <= initial_state < net.n_states):
        raise ValueError(f"initial state {initial_state} out of range")
    row_ptr, arc_target, arc_chan, arc_cum, exit_rate = _flat_arcs(net)

    rng = np.random.default_rng(seed)
    cap = max(1024, int(total_time * exit_rate.max() * 1.1) + 64)
    states = np.empty(cap + 1, dtype=np.int64)
    dwell = np.empty(cap + 1)
    fired = np.empty(cap, dtype=np.int64)

    s = initial_state
    states[0] = s
    t = 0.0
    j = 0
    u_wait = rng.exponential(size=_BATCH)
    u_pick = rng.random(size=_BATCH)
    k = 0
    while True:
        j, s, t, k, status = _advance(
            states, dwell, fired, j, s, t, k,
            u_wait, u_pick, row_ptr, arc_target, arc_chan, arc_cum,
            exit_rate, total_time,
        )
        if status == _FINISHED:
            break
        if status == _ABSORBED:
            raise AbsorbingState(
                f"state {s} ({net.states[s].label}) has no exit"
            )
        if status == _EXHAUSTED:
            u_wait = rng.exponential(size=_BATCH)
            u_pick = rng.random(size=_BATCH)
            k = 0
        elif status == _FULL:
            cap *= 2
            states = np.concatenate([states, np.empty(cap + 1 - len(states), dtype=np.int64)])
            dwell = np.concatenate([dwell, np.empty(cap + 1 - len(dwell))])
            fired = np.concatenate([fired, np.empty(cap - len(fired), dtype=np.int64)])
    return Trajectory(
        states=states[: j + 1].copy(),
        dwell=dwell[: j + 1].copy(),
        channels=fired[:j].copy(),
        seed=seed,
        total_time=total_time,
    )


@dataclass(frozen=True)
class CycleCountReport:
    """Completion counts per canonical cycle and orientation."""

    counts: dict[tuple, list[int]]  # cycle key -> [forward, backward]
    total_time: float
    mode: str

    def count(self, key: tuple, reverse: bool = False) -> int:
        pair = self.counts.get(key)
        if pair is None:
            return 0
        return pair[1] if reverse else pair[0]


class _LoopCounter:
    """Persistent Hill stack plus canonical completion tallies."""

    def __init__(self, n_states: int, first_state: int, collapsed: bool):
        self.collapsed = collapsed
        self.counts: dict[tuple, list[int]] = {}
        self.stack = np.empty(n_states + 1, dtype=np.int64)
        self.entered = np.empty(n_states + 1, dtype=np.int64)
        self.pos = np.full(n_states, -1, dtype=np.int64)
        self.stack[0] = first_state
        self.entered[0] = -1
        self.pos[first_state] = 0
        self.out = np.empty(1 << 20, dtype=np.int64)
        self.depth = 1
        self._canon_cache: dict[tuple, tuple[tuple, bool]] = {}

    def _digest(self, written: int) -> None:
        out = self.out
        i = 0
        while i < written:
            length = int(out[i])
            i += 1
            raw = tuple(int(v) for v in out[i : i + 2 * length])
            i += 2 * length
            hit = self._canon_cache.get(raw)
            if hit is None:
                verts = raw[0::2]
                cs = raw[1::2]
                if self.collapsed and length > 2:
                    canon = canonical_form(verts)
                else:
                    canon = canonical_form(verts, cs)
                hit = (canon.key, canon.reversed_input)
                self._canon_cache[raw] = hit
            key, reversed_input = hit
            pair = self.counts.setdefault(key, [0, 0])
            pair[1 if reversed_input else 0] += 1

    def feed(self, seq: np.ndarray, chans: np.ndarray) -> None:
        """Process jumps; ``seq[0]`` must be the current stack top."""
        done = 0
        while done < len(chans):
            processed, written, self.depth = _pop_loops(
                seq[done:], chans[done:], self.stack, self.entered, self.pos,
                self.out, self.collapsed, self.depth,
            )
            self._digest(written)
            if processed == 0 and written == 0:
                raise RuntimeError("loop buffer too small for a single loop")
            done += processed


def count_cycle_completions(
    trajectory: Trajectory,
    mode: str = COLLAPSED,
) -> CycleCountReport:
    """Hill-style loop counting over the trajectory's jump sequence."""
    seq = np.ascontiguousarray(trajectory.states, dtype=np.int64)
    chans = np.ascontiguousarray(trajectory.channels, dtype=np.int64)
    n_states = int(seq.max()) + 1 if len(seq) else 1
    counter = _LoopCounter(n_states, int(seq[0]), mode == COLLAPSED)
    counter.feed(seq, chans)
    return CycleCountReport(counter.counts, trajectory.total_time, mode)


def simulate_and_count(
    net: TransitionNetwork,
    total_time: float,
    seed: int,
    initial_state: int = 0,
    mode: str | None = None,
) -> tuple[CycleCountReport, np.ndarray, int]:
    """Streamed simulation with on-the-fly loop counting.

    Equivalent to ``count_cycle_completions(simulate(...), mode)`` but with
    memory independent of the trajectory length (the random stream and the
    resulting counts are identical).  Returns the count report, the
    dwell-time occupancy fractions and the number of jumps.
    """
    if not (total_time > 0.0):
        raise ValueError("total_time must be positive")
    if not (0 <= initial_state < net.n_states):
        raise ValueError(f"initial state {initial_state} out of range")
    mode = net.mode if mode is None else mode
    row_ptr, arc_target, arc_chan, arc_cum, exit_rate = _flat_arcs(net)

    rng = np.random.default_rng(seed)
    cap = 1 << 20
    states = np.empty(cap + 1, dtype=np.int64)
    dwell = np.empty(cap + 1)
    fired = np.empty(cap, dtype=np.int64)
    occupancy = np.zeros(net.n_states)
    counter = _LoopCounter(net.n_states, initial_state, mode == COLLAPSED)

    s = initial_state
    states[0] = s
    t = 0.0
    total_jumps = 0
    u_wait = rng.exponential(size=_BATCH)
    u_pick = rng.random(size=_BATCH)
    k = 0
    while True:
        j, s, t, k, status = _advance(
            states, dwell, fired, 0, s, t, k,
            u_wait, u_pick, row_ptr, arc_target, arc_chan, arc_cum,
            exit_rate, total_time,
        )
        if status == _ABSORBED:
            raise AbsorbingState(f"state {s} ({net.states[s].label}) has no exit")
        total_jumps += j
        counter.feed(states[: j + 1], fired[:j])
        if status == _FINISHED:
            occupancy += np.bincount(
                states[: j + 1], weights=dwell[: j + 1], minlength=net.n_states
            )
            break
        # the dwell of the chunk's final state is written by the next chunk
        occupancy += np.bincount(states[:j], weights=dwell[:j], minlength=net.n_states)
        states[0] = s
        if status == _EXHAUSTED:
            u_wait = rng.exponential(size=_BATCH)
            u_pick = rng.random(size=_BATCH)
            k = 0
    report = CycleCountReport(counter.counts, total_time, mode)
    return report, occupancy / total_time, total_jumps


@dataclass(frozen=True)
class EmpiricalFlux:
    """Completion-rate estimate of one cycle orientation pair."""

    key: tuple
    forward_count: int
    backward_count: int
    total_time: float

    @property
    def j_forward(self) -> float:
        return self.forward_count / self.total_time

    @property
    def j_backward(self) -> float:
        return self.backward_count / self.total_time

    def stderr(self, reverse: bool = False) -> float:
        c = self.backward_count if reverse else self.forward_count
        return math.sqrt(c) / self.total_time


def empirical_cycle_flux(report: CycleCountReport) -> dict[tuple, EmpiricalFlux]:
    """Per-cycle completion-rate estimates with Poisson standard errors."""
    return {
        key: EmpiricalFlux(key, fwd, bwd, report.total_time)
        for key, (fwd, bwd) in sorted(report.counts.items())
    }


@dataclass(frozen=True)
class FluxComparison:
    key: tuple
    orientation: str
    expected: float
    observed: float
    stderr: float

    @property
    def z(self) -> float:
        if self.stderr > 0.0:
            return (self.observed - self.expected) / self.stderr
        return 0.0 if self.observed == self.expected else math.inf


def compare_with_analytic(report: CycleCountReport, records) -> list[FluxComparison]:
    """Observed vs analytic one-directional fluxes for every analytic cycle."""
    out = []
    emp = empirical_cycle_flux(report)
    for rec in records:
        key = rec.cycle.key
        e = emp.get(key, EmpiricalFlux(key, 0, 0, report.total_time))
        base = 1.0 / report.total_time  # error floor for zero counts
        out.append(
            FluxComparison(key, "forward", rec.j_forward, e.j_forward, max(e.stderr(), base))
        )
        out.append(
            FluxComparison(key, "backward", rec.j_backward, e.j_backward, max(e.stderr(True), base))
        )
    return out
