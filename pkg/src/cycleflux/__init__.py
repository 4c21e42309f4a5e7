"""Cycle-flux network analysis of dissipative state-transition networks.

Represents thermal devices as weighted directed graphs of quantum state
transitions, solves the stationary master equation, enumerates all simple
cycle trajectories and evaluates/ranks their fluxes via principal minors
of the graph Laplacian, with a Gillespie cycle-counting simulator as an
independent check.
"""

from .cycles import (
    CanonicalCycle,
    canonical_form,
    directed_cycle_from_labels,
    enumerate_cycles,
)
from .errors import (
    AbsorbingState,
    CycleBudgetExceeded,
    CycleFluxError,
    DanglingReference,
    DisconnectedGraph,
    DuplicateChannel,
    InvalidChannel,
    InvalidRate,
    InvalidReservoir,
    MissingAnnotation,
    NetworkValidationError,
    NonPositiveFrequency,
    NumericalUnderflow,
    SingularBeyondRankOne,
    ZeroGapChannel,
)
from .flux import (
    CycleFluxRecord,
    all_cycle_records,
    cycle_flux_pair,
    cycle_weight,
    decompose_all_edges,
    decompose_edge_flux,
    entropy_production,
    rank_cycles,
    rooted_minor,
)
from .gillespie import (
    CycleCountReport,
    Trajectory,
    compare_with_analytic,
    count_cycle_completions,
    empirical_cycle_flux,
    simulate,
    simulate_and_count,
)
from .models import (
    PumpParams,
    TransistorParams,
    bose_occupation,
    boson_rates,
    build_pump,
    build_transistor,
    fermi_occupation,
    fermion_rates,
    PUMP_SPIN_CYCLE_LABELS,
)
from .network import (
    COLLAPSED,
    MULTIGRAPH,
    ReservoirSpec,
    StateNode,
    TransitionChannel,
    TransitionNetwork,
    build_laplacian,
    build_network,
    load_network,
    network_to_json,
    save_network,
    validate_detailed_balance,
)
from .steady import (
    CurrentReport,
    EdgeFluxMap,
    edge_fluxes,
    principal_minors,
    reservoir_currents,
    solve_steady_state,
    steady_state_from_tree_theorem,
)
from .sweep import (
    AmplificationResult,
    SweepSpec,
    amplification_factor,
    build_model,
    detect_ndtc,
    make_params,
    run_sweep,
    switch_threshold,
)

__version__ = "0.1.0"
