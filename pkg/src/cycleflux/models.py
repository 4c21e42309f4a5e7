"""Device networks: thermal-drag spin pump and qutrit-qubit-qutrit transistor.

Rates follow golden-rule forms with flat (frequency-independent) coupling
prefactors and the occupation factor of the owning reservoir:

* fermionic channel adding one electron of energy quantum dE:
  in-rate Gamma f(dE), out-rate Gamma (1 - f(dE));
* bosonic channel across a gap |dE|: absorption gamma N(|dE|) uphill and
  emission gamma (N(|dE|) + 1) downhill.

Every channel so built obeys local detailed balance to machine precision.
Units: hbar = k_B = e = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from scipy.special import expit

from .errors import NonPositiveFrequency, ZeroGapChannel
from .network import (
    BOSON,
    COLLAPSED,
    FERMION,
    ReservoirSpec,
    StateNode,
    TransitionChannel,
    TransitionNetwork,
    _check_connected,
)


def fermi_occupation(w: float, T: float, mu: float = 0.0) -> float:
    """Fermi-Dirac occupation 1 / (exp((w - mu)/T) + 1)."""
    if not (T > 0.0):
        raise ValueError("temperature must be positive")
    return float(expit(-(w - mu) / T))


def bose_occupation(w: float, T: float) -> float:
    """Bose-Einstein occupation 1 / (exp(w/T) - 1) for w > 0."""
    if not (w > 0.0):
        raise NonPositiveFrequency(f"frequency must be positive, got {w!r}")
    if not (T > 0.0):
        raise ValueError("temperature must be positive")
    x = w / T
    if x > 745.0:  # exp overflows; occupation is indistinguishable from 0
        return 0.0
    return float(1.0 / math.expm1(x))


def fermion_rates(de: float, T: float, mu: float, coupling: float) -> tuple[float, float]:
    """(in, out) rates of a channel whose forward step adds one electron.

    Both occupations are evaluated directly (no 1 - f subtraction), so the
    rate ratio matches exp(-(de - mu)/T) to machine precision.
    """
    x = (de - mu) / T
    return coupling * float(expit(-x)), coupling * float(expit(x))


def boson_rates(de: float, T: float, coupling: float) -> tuple[float, float]:
    """(forward, backward) rates of a bosonic channel with energy change ``de``.

    The uphill direction absorbs a quantum, rate gamma N(|de|); the
    downhill direction emits, rate gamma (N(|de|) + 1), computed as
    -1/expm1(-x) to keep the ratio exact.  ``de = 0`` is rejected.
    """
    if de == 0.0:
        raise ZeroGapChannel("bosonic channel with zero gap")
    gap = abs(de)
    x = gap / T
    absorb = coupling * (0.0 if x > 745.0 else 1.0 / math.expm1(x))
    emit = coupling * (1.0 if x > 745.0 else -1.0 / math.expm1(-x))
    return (absorb, emit) if de > 0.0 else (emit, absorb)


@dataclass(frozen=True)
class PumpParams:
    """Parameters of the Coulomb-coupled double-dot spin pump.

    Defaults: lower-dot levels at -/+1, Coulomb energy 3, all baths at
    temperature 1, zero chemical potentials and flat couplings 0.01.
    The thermal drive enters through T1 - T2.
    """

    eps_U: float = 1.0
    eps_up: float = -1.0
    eps_dn: float = 1.0
    U: float = 3.0
    T1: float = 1.0
    T2: float = 1.0
    T3: float = 1.0
    T4: float = 1.0
    mu1: float = 0.0
    mu2: float = 0.0
    mu3: float = 0.0
    Gamma1: float = 0.01
    Gamma2: float = 0.01
    Gamma3: float = 0.01
    Gamma4: float = 0.01

    def replace(self, **kw) -> "PumpParams":
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.update(kw)
        return PumpParams(**data)


PUMP_LABELS = ("|00⟩", "|0↑⟩", "|0↓⟩", "|10⟩", "|1↑⟩", "|1↓⟩")
#: the five-step loop that carries one unit of spin per completion
PUMP_SPIN_CYCLE_LABELS = ("|00⟩", "|10⟩", "|1↑⟩", "|0↑⟩", "|0↓⟩")


def build_pump(p: PumpParams = PumpParams()) -> TransitionNetwork:
    """Six-state network of the double-dot pump.

    States |phi_U phi_L> with phi_U in {0,1} and phi_L in {0,up,down};
    energies eps_U n_U + eps_sigma n_sigma + U n_U n_L.  The upper-dot
    edges are driven by the two spinless electron reservoirs 1 and 2, the
    lower-dot edges by the spinful reservoir 3 (spin +-1/2 per electron),
    and the spin-flip edges by the magnon bath 4 (a flip up->down hands
    one unit of spin to the bath).
    """
    occ = [(0, None), (0, "up"), (0, "dn"), (1, None), (1, "up"), (1, "dn")]
    eps_l = {"up": p.eps_up, "dn": p.eps_dn}
    spin_z = {"up": 0.5, "dn": -0.5, None: 0.0}

    states = []
    for i, (n_u, sigma) in enumerate(occ):
        n_l = 0 if sigma is None else 1
        e = p.eps_U * n_u + (eps_l[sigma] if sigma else 0.0) + p.U * n_u * n_l
        states.append(
            StateNode(
                id=i,
                label=PUMP_LABELS[i],
                energy=e,
                quantum_numbers={"n_U": float(n_u), "n_L": float(n_l), "s_z": spin_z[sigma]},
            )
        )
    E = [s.energy for s in states]

    reservoirs = (
        ReservoirSpec(1, FERMION, p.T1, p.mu1, p.Gamma1, "1"),
        ReservoirSpec(2, FERMION, p.T2, p.mu2, p.Gamma2, "2"),
        ReservoirSpec(3, FERMION, p.T3, p.mu3, p.Gamma3, "3"),
        ReservoirSpec(4, BOSON, p.T4, 0.0, p.Gamma4, "4"),
    )

    channels = []
    upper = [(0, 3), (1, 4), (2, 5)]
    for lo, hi in upper:
        de = E[hi] - E[lo]
        for rid, T, mu, g in ((1, p.T1, p.mu1, p.Gamma1), (2, p.T2, p.mu2, p.Gamma2)):
            kin, kout = fermion_rates(de, T, mu, g)
            channels.append(
                TransitionChannel(
                    lo, hi, rid, kin, kout,
                    {"energy": de, "particle": 1.0, "spin": 0.0},
                )
            )
    for base in (0, 3):
        for tgt, s in ((base + 1, 0.5), (base + 2, -0.5)):
            de = E[tgt] - E[base]
            kin, kout = fermion_rates(de, p.T3, p.mu3, p.Gamma3)
            channels.append(
                TransitionChannel(
                    base, tgt, 3, kin, kout,
                    {"energy": de, "particle": 1.0, "spin": s},
                )
            )
    for up, dn in ((1, 2), (4, 5)):
        de = E[dn] - E[up]
        kf, kb = boson_rates(de, p.T4, p.Gamma4)
        channels.append(
            TransitionChannel(
                up, dn, 4, kf, kb,
                {"energy": de, "particle": 0.0, "spin": -1.0},
            )
        )

    net = TransitionNetwork(tuple(states), reservoirs, tuple(channels), COLLAPSED)
    _check_connected(net.n_states, net.adjacency)
    return net


@dataclass(frozen=True)
class TransistorParams:
    """Parameters of the qutrit-qubit-qutrit thermal transistor.

    Defaults: unit level splittings, strong longitudinal couplings 10 to
    the middle qubit, no direct left-right coupling, level offsets 3, hot
    left bath at 2.5, cold right bath at 0.2, gate bath at 1.0, flat
    couplings 0.01.
    """

    w_L: float = 1.0
    w_M: float = 1.0
    w_R: float = 1.0
    w_LM: float = 10.0
    w_MR: float = 10.0
    w_LR: float = 0.0
    w0_L: float = 3.0
    w0_R: float = 3.0
    T_L: float = 2.5
    T_M: float = 1.0
    T_R: float = 0.2
    gamma_L: float = 0.01
    gamma_M: float = 0.01
    gamma_R: float = 0.01

    def replace(self, **kw) -> "TransistorParams":
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.update(kw)
        return TransistorParams(**data)


_QUTRIT = ("+", "-", "G")
_QUBIT = ("↑", "↓")
_SZ = {"+": 1.0, "-": -1.0, "G": 0.0, "↑": 1.0, "↓": -1.0}
_D = {"+": 1.0, "-": 1.0, "G": 0.0}

TRANSISTOR_RESERVOIRS = {"L": 0, "M": 1, "R": 2}


def transistor_label(l: str, m: str, r: str) -> str:
    return f"|{l}{m}{r}⟩"


def build_transistor(p: TransistorParams = TransistorParams()) -> TransitionNetwork:
    """Eighteen-state network of the three-terminal thermal transistor.

    States |l m r> with l, r in {+,-,G} and m in {up,down}; the left and
    right baths flip their qutrit between G and +/- (the +<->- transition
    is not bath-driven), the middle bath flips the qubit.  All channels
    are bosonic; a zero-gap transition raises :class:`ZeroGapChannel`
    naming the offending edge.
    """

    def energy(l: str, m: str, r: str) -> float:
        return (
            0.5 * p.w_L * _SZ[l]
            + 0.5 * p.w_M * _SZ[m]
            + 0.5 * p.w_R * _SZ[r]
            + 0.5 * p.w_LM * _SZ[l] * _SZ[m]
            + 0.5 * p.w_MR * _SZ[r] * _SZ[m]
            + 0.5 * p.w_LR * _SZ[l] * _SZ[r]
            + p.w0_L * _D[l]
            + p.w0_R * _D[r]
        )

    triples = [(l, m, r) for l in _QUTRIT for m in _QUBIT for r in _QUTRIT]
    index = {t: i for i, t in enumerate(triples)}
    states = tuple(
        StateNode(
            id=i,
            label=transistor_label(*t),
            energy=energy(*t),
            quantum_numbers={
                "sz_L": _SZ[t[0]], "sz_M": _SZ[t[1]], "sz_R": _SZ[t[2]],
                "d_L": _D[t[0]], "d_R": _D[t[2]],
            },
        )
        for i, t in enumerate(triples)
    )
    E = [s.energy for s in states]

    reservoirs = (
        ReservoirSpec(0, BOSON, p.T_L, 0.0, p.gamma_L, "L"),
        ReservoirSpec(1, BOSON, p.T_M, 0.0, p.gamma_M, "M"),
        ReservoirSpec(2, BOSON, p.T_R, 0.0, p.gamma_R, "R"),
    )

    def bosonic(a: int, b: int, rid: int, T: float, g: float) -> TransitionChannel:
        de = E[b] - E[a]
        if de == 0.0:
            raise ZeroGapChannel(
                f"zero-gap transition {states[a].label} <-> {states[b].label}"
            )
        kf, kb = boson_rates(de, T, g)
        return TransitionChannel(
            a, b, rid, kf, kb, {"energy": de, "particle": 0.0, "spin": 0.0}
        )

    channels = []
    for m in _QUBIT:
        for r in _QUTRIT:
            for x in ("+", "-"):
                channels.append(
                    bosonic(index[("G", m, r)], index[(x, m, r)], 0, p.T_L, p.gamma_L)
                )
    for l in _QUTRIT:
        for r in _QUTRIT:
            channels.append(
                bosonic(index[(l, "↓", r)], index[(l, "↑", r)], 1, p.T_M, p.gamma_M)
            )
    for m in _QUBIT:
        for l in _QUTRIT:
            for x in ("+", "-"):
                channels.append(
                    bosonic(index[(l, m, "G")], index[(l, m, x)], 2, p.T_R, p.gamma_R)
                )

    net = TransitionNetwork(states, reservoirs, tuple(channels), COLLAPSED)
    _check_connected(net.n_states, net.adjacency)
    return net
