"""Parameter sweeps, derived transport detectors and CSV emission.

All detectors (amplification factor, negative-differential intervals,
switch thresholds) are pure functions of swept current columns, so they
can be re-run offline on saved CSV data.  Sweep output is deterministic:
identical specs produce byte-identical CSV.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, fields, replace
from typing import Sequence

import numpy as np

from .cycles import CanonicalCycle, enumerate_cycles
from .errors import CycleFluxError
from .flux import CycleFluxRecord, all_cycle_records, decompose_all_edges, rank_cycles
from .models import (
    PumpParams,
    TransistorParams,
    build_pump,
    build_transistor,
)
from .network import COLLAPSED, TransitionNetwork, build_network
from .steady import CurrentReport, reservoir_currents, solve_steady_state

MODELS = {"pump": (PumpParams, build_pump), "transistor": (TransistorParams, build_transistor)}


def make_params(model: str, overrides: dict | None = None):
    """Parameter set of a named model with field overrides applied."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {sorted(MODELS)}")
    cls, _ = MODELS[model]
    overrides = overrides or {}
    names = {f.name for f in fields(cls)}
    unknown = set(overrides) - names
    if unknown:
        raise ValueError(f"unknown {model} parameters: {sorted(unknown)}")
    return cls(**{k: float(v) for k, v in overrides.items()})


def build_model(model: str, params) -> TransitionNetwork:
    return MODELS[model][1](params)


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional linear parameter sweep of a device model."""

    model: str
    parameter: str
    start: float
    stop: float
    count: int
    params: object | None = None  # base PumpParams/TransistorParams
    top_k: int = 5
    mode: str = COLLAPSED
    ranking_key: str = "traffic"

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("sweep needs at least 2 grid points")
        cls, _ = MODELS.get(self.model, (None, None))
        if cls is None:
            raise ValueError(f"unknown model {self.model!r}")
        if self.parameter not in {f.name for f in fields(cls)}:
            raise ValueError(
                f"{self.parameter!r} is not a parameter of model {self.model!r}"
            )
        if self.params is None:
            object.__setattr__(self, "params", cls())

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepPoint:
    value: float
    currents: CurrentReport
    p_min: float
    p_max: float
    top: list[CycleFluxRecord]
    decomposition_residual: float  # max relative residual across edges; nan if skipped


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    points: list[SweepPoint]
    tracked: list[CanonicalCycle]  # cycles ever ranked in the top-k, aligned columns
    labels: tuple[str, ...]
    reservoir_names: dict[int, str]

    def column(self, reservoir_id: int, quantity: str) -> np.ndarray:
        return np.array(
            [getattr(pt.currents, quantity)[reservoir_id] for pt in self.points]
        )

    @property
    def values(self) -> np.ndarray:
        return np.array([pt.value for pt in self.points])

    def cycle_column(self, cycle: CanonicalCycle, field: str = "j_net") -> np.ndarray:
        out = np.full(len(self.points), np.nan)
        for i, pt in enumerate(self.points):
            for rec in pt.top:
                if rec.cycle.key == cycle.key:
                    out[i] = getattr(rec, field)
                    break
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        res_ids = sorted(self.reservoir_names)
        head = [self.spec.parameter]
        for rid in res_ids:
            name = self.reservoir_names[rid]
            head += [f"heat:{name}", f"energy:{name}", f"particle:{name}", f"spin:{name}"]
        head += ["p_min", "p_max", "decomp_residual_rel"]
        cyc_strings = [c.format(self.labels) for c in self.tracked]
        for cs in cyc_strings:
            head += [f"jf:{cs}", f"jb:{cs}", f"jnet:{cs}"]
        buf.write(",".join(head) + "\n")
        for pt in self.points:
            row = [repr(pt.value)]
            for rid in res_ids:
                row += [
                    repr(pt.currents.heat[rid]),
                    repr(pt.currents.energy[rid]),
                    repr(pt.currents.particle[rid]),
                    repr(pt.currents.spin[rid]),
                ]
            row += [repr(pt.p_min), repr(pt.p_max), repr(pt.decomposition_residual)]
            by_key = {rec.cycle.key: rec for rec in pt.top}
            for c in self.tracked:
                rec = by_key.get(c.key)
                if rec is None:
                    row += ["nan", "nan", "nan"]
                else:
                    row += [repr(rec.j_forward), repr(rec.j_backward), repr(rec.j_net)]
            buf.write(",".join(row) + "\n")
        return buf.getvalue()


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate the sweep grid point by point.

    With ``top_k > 0`` every point also gets the full cycle-flux analysis
    (records for all cycles, ranking, and the maximum relative residual of
    the edge-flux decomposition); with ``top_k == 0`` only steady currents
    are computed, which is much faster on cycle-rich networks.
    """
    points: list[SweepPoint] = []
    cycles = None
    labels: tuple[str, ...] = ()
    reservoir_names: dict[int, str] = {}
    per_point_ranked: list[list[CycleFluxRecord]] = []

    for value in spec.grid:
        params = spec.params.replace(**{spec.parameter: float(value)})
        try:
            net = build_model(spec.model, params)
            net = replace(net, mode=spec.mode)
            p = solve_steady_state(net)
            currents = reservoir_currents(net, p)
        except CycleFluxError as exc:
            raise type(exc)(
                f"at {spec.parameter}={value!r}: {exc}"
            ) from exc
        labels = net.labels
        reservoir_names = {r.id: r.name for r in net.reservoirs}
        if spec.top_k > 0:
            if cycles is None:
                cycles = enumerate_cycles(net, mode=spec.mode)
            records = all_cycle_records(net, cycles)
            ranked = rank_cycles(net, spec.top_k, key=spec.ranking_key, records=records)
            resid = max(
                (d.residual_rel for d in decompose_all_edges(net, records, p)),
                default=0.0,
            )
        else:
            ranked = []
            resid = math.nan
        per_point_ranked.append(ranked)
        points.append(
            SweepPoint(
                value=float(value),
                currents=currents,
                p_min=float(p.min()),
                p_max=float(p.max()),
                top=ranked,
                decomposition_residual=resid,
            )
        )

    best_rank: dict[tuple, tuple] = {}
    by_key: dict[tuple, CanonicalCycle] = {}
    for ranked in per_point_ranked:
        for pos, rec in enumerate(ranked):
            key = rec.cycle.key
            by_key.setdefault(key, rec.cycle)
            if key not in best_rank or pos < best_rank[key][0]:
                best_rank[key] = (pos, key)
    tracked = [by_key[k] for _, k in sorted(best_rank.values())]
    return SweepResult(spec, points, tracked, labels, reservoir_names)


@dataclass(frozen=True)
class AmplificationResult:
    """Per-interval amplification factor along a gate-temperature grid.

    ``alpha[i] = |dJ_L / dJ_M|`` on the interval between grid points i and
    i+1 (reported at the interval midpoint).  A divergence marker sits at
    every midpoint whose neighbouring intervals carry opposite signs of
    dJ_M (the gate current passes an extremum there and the factor blows
    up).  Entries where dJ_M vanishes exactly are inf/nan-flagged.
    """

    t_grid: np.ndarray
    j_l: np.ndarray
    j_m: np.ndarray

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.t_grid[1:] + self.t_grid[:-1])

    @property
    def alpha(self) -> np.ndarray:
        dl = np.diff(self.j_l)
        dm = np.diff(self.j_m)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.abs(dl / dm)

    @property
    def divergence_markers(self) -> list[float]:
        dm = np.diff(self.j_m)
        mids = self.midpoints
        out = []
        for i in range(1, len(dm)):
            if dm[i - 1] * dm[i] < 0.0:
                out.append(float(0.5 * (mids[i - 1] + mids[i])))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("T_M,J_L,J_M\n")
        for t, jl, jm in zip(self.t_grid, self.j_l, self.j_m):
            buf.write(f"{t!r},{jl!r},{jm!r}\n")
        return buf.getvalue()


def _gate_currents(params: TransistorParams, t_grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    jl, jm = [], []
    for t in t_grid:
        net = build_transistor(params.replace(T_M=float(t)))
        p = solve_steady_state(net)
        rep = reservoir_currents(net, p)
        jl.append(rep.heat[0])
        jm.append(rep.heat[1])
    return np.array(jl), np.array(jm)


def amplification_factor(
    params: TransistorParams,
    t_grid: Sequence[float],
    refine: bool = True,
    refine_tol: float = 0.05,
    max_doublings: int = 4,
) -> AmplificationResult:
    """Amplification factor over a monotone gate-temperature grid.

    With ``refine=True`` the grid count is doubled until the median finite
    alpha (evaluated at the coarse midpoints by interpolation) moves by
    less than ``refine_tol`` relative, which is the documented resolution
    heuristic for trusting the finite differences.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) < 3 or np.any(np.diff(t) <= 0):
        raise ValueError("need a strictly increasing grid of at least 3 points")
    jl, jm = _gate_currents(params, t)
    result = AmplificationResult(t, jl, jm)
    if not refine:
        return result
    for _ in range(max_doublings):
        fine_t = np.linspace(t[0], t[-1], 2 * (len(t) - 1) + 1)
        fine = AmplificationResult(fine_t, *_gate_currents(params, fine_t))
        coarse_mid = result.midpoints
        a_old = result.alpha
        a_new = np.interp(coarse_mid, fine.midpoints, fine.alpha)
        ok = np.isfinite(a_old) & np.isfinite(a_new) & (a_old > 0)
        if ok.any():
            change = np.median(np.abs(a_new[ok] - a_old[ok]) / a_old[ok])
            if change < refine_tol:
                return fine
        t, result = fine_t, fine
    return result


def detect_ndtc(t_values: Sequence[float], j_m: Sequence[float]) -> list[tuple[float, float]]:
    """Maximal grid intervals where the heat flowing into the gate bath
    grows with the gate temperature, i.e. the finite-difference slope of
    (-J_M) is positive."""
    t = np.asarray(t_values, dtype=float)
    jm = np.asarray(j_m, dtype=float)
    neg_slope = np.diff(-jm) / np.diff(t) > 0.0
    out: list[tuple[float, float]] = []
    start = None
    for i, flag in enumerate(neg_slope):
        if flag and start is None:
            start = t[i]
        elif not flag and start is not None:
            out.append((float(start), float(t[i])))
            start = None
    if start is not None:
        out.append((float(start), float(t[-1])))
    return out


@dataclass(frozen=True)
class ThresholdRow:
    w_m: float
    threshold: float
    plateau: float


def switch_threshold(
    params: TransistorParams,
    w_m_values: Sequence[float],
    t_start: float = 0.005,
    t_stop: float | None = None,
    count: int = 240,
) -> list[ThresholdRow]:
    """Gate temperature at which J_L reaches half its large-gate plateau.

    The plateau is the maximum of J_L over the sweep (whose top defaults
    to max(3, 2 w_M) so the flat region is inside the grid); the crossing
    is located by linear interpolation between the bracketing grid points.
    """
    rows = []
    for w_m in w_m_values:
        top = t_stop if t_stop is not None else max(3.0, 2.0 * float(w_m))
        grid = np.linspace(t_start, top, count)
        jl, _ = _gate_currents(params.replace(w_M=float(w_m)), grid)
        plateau = float(jl.max())
        half = 0.5 * plateau
        above = np.nonzero(jl >= half)[0]
        k = int(above[0])
        if k == 0:
            threshold = float(grid[0])
        else:
            t0, t1 = grid[k - 1], grid[k]
            y0, y1 = jl[k - 1], jl[k]
            threshold = float(t0 + (half - y0) * (t1 - t0) / (y1 - y0))
        rows.append(ThresholdRow(float(w_m), threshold, plateau))
    return rows


def currents_csv(reports: list[tuple[float | str, CurrentReport]]) -> str:
    """Long-format CSV: sweep_value, reservoir_id, quantity, current."""
    buf = io.StringIO()
    buf.write("sweep_value,reservoir_id,quantity,current\n")
    for value, rep in reports:
        for sv, rid, quantity, cur in rep.rows(value):
            buf.write(f"{sv!r},{rid},{quantity},{cur!r}\n")
    return buf.getvalue()


def ranked_csv(records: list[CycleFluxRecord], labels, reservoir_names: dict[int, str]) -> str:
    """Ranked cycle table with per-reservoir energy/spin transport columns."""
    buf = io.StringIO()
    res_ids = sorted(reservoir_names)
    head = ["rank", "cycle_string", "j_forward", "j_backward", "j_net", "affinity"]
    for rid in res_ids:
        name = reservoir_names[rid]
        head += [f"energy:{name}", f"spin:{name}"]
    buf.write(",".join(head) + "\n")
    for rank, rec in enumerate(records, start=1):
        row = [
            str(rank),
            rec.cycle.format(labels),
            repr(rec.j_forward),
            repr(rec.j_backward),
            repr(rec.j_net),
            repr(rec.affinity),
        ]
        for rid in res_ids:
            t = rec.transport.get(rid, {})
            row += [repr(t.get("energy", 0.0)), repr(t.get("spin", 0.0))]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()
