"""Four-player potential-game search over parameterized quantum circuit architectures."""
from .dag import CircuitDag, GateKind, OpNode, Topology, depth, deserialize, lower, serialize, validate
from .game import GameContext, Player, actions, apply_move, best_response_gap, nash_residual
from .pauli import PauliSum
from .payoffs import PayoffVector, TaskSense, Weights, eff_dim, magic_m2, potential
from .problems import (
    Graph,
    Problem,
    builtin_topology,
    exact_ground_energy,
    load_pauli_file,
    maxcut_hamiltonian,
    tfim_hamiltonian,
)
from .search import (
    Cold,
    FromDagFile,
    GivensSeed,
    NashSearch,
    QaoaP1,
    SearchConfig,
    SimulatedAnnealingBaseline,
    baseline_sa,
    nash_search,
    pareto_front,
    weight_sweep,
)
from .simulator import gradient, pauli_spectrum, qfim, run

__version__ = "0.1.0"

__all__ = [
    "CircuitDag",
    "Cold",
    "FromDagFile",
    "GameContext",
    "GateKind",
    "GivensSeed",
    "Graph",
    "NashSearch",
    "OpNode",
    "PauliSum",
    "PayoffVector",
    "Player",
    "Problem",
    "QaoaP1",
    "SearchConfig",
    "SimulatedAnnealingBaseline",
    "TaskSense",
    "Topology",
    "Weights",
    "actions",
    "apply_move",
    "baseline_sa",
    "best_response_gap",
    "builtin_topology",
    "depth",
    "deserialize",
    "eff_dim",
    "exact_ground_energy",
    "gradient",
    "load_pauli_file",
    "lower",
    "magic_m2",
    "maxcut_hamiltonian",
    "nash_residual",
    "nash_search",
    "pareto_front",
    "pauli_spectrum",
    "potential",
    "qfim",
    "run",
    "serialize",
    "tfim_hamiltonian",
    "validate",
    "weight_sweep",
]
