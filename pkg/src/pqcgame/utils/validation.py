"""Input coercion and checks shared by the estimators and the CLI."""
from __future__ import annotations

import numbers
from collections.abc import Mapping, Sequence

import numpy as np

from ..dag import CircuitDag, GateKind, Topology, validate
from ..pauli import PauliSum
from ..payoffs import TaskSense, Weights


def check_weights(w) -> Weights:
    """Accept a :class:`Weights`, a 4-sequence or a mapping with keys w1..w4."""
    if isinstance(w, Weights):
        return w
    if isinstance(w, Mapping):
        return Weights(**{k: float(v) for k, v in w.items()})
    if isinstance(w, Sequence) or isinstance(w, np.ndarray):
        if len(w) != 4:
            raise ValueError(f"weights need four entries, got {len(w)}")
        return Weights(*(float(x) for x in w))
    raise TypeError(f"cannot interpret {w!r} as weights")


def check_topology(topology, n_qubits: int | None = None) -> Topology:
    from ..problems import builtin_topology

    if topology is None:
        if n_qubits is None:
            raise ValueError("topology is required")
        return Topology.all_to_all(n_qubits)
    if isinstance(topology, Topology):
        topo = topology
    elif isinstance(topology, str):
        topo = builtin_topology(topology, n_qubits)
    elif isinstance(topology, Mapping):
        topo = Topology.from_edges(int(topology["n_qubits"]), topology["edges"])
    else:
        if n_qubits is None:
            raise ValueError("an edge list needs n_qubits")
        topo = Topology.from_edges(n_qubits, topology)
    if n_qubits is not None and topo.n_qubits != n_qubits:
        raise ValueError(f"topology has {topo.n_qubits} qubits, problem has {n_qubits}")
    return topo


def check_problem(problem, sense=None):
    from ..problems import Problem

    if isinstance(problem, Problem):
        return problem
    if isinstance(problem, PauliSum):
        return Problem(problem, TaskSense(sense or TaskSense.MINIMIZE))
    raise TypeError(f"expected a Problem or PauliSum, got {type(problem).__name__}")


def check_gate_set(gate_set):
    from ..dag import DEFAULT_GATE_SET

    if gate_set is None:
        return DEFAULT_GATE_SET
    return frozenset(GateKind(k) for k in gate_set)


def check_theta(dag: CircuitDag, theta) -> np.ndarray:
    theta = np.asarray(theta if theta is not None else np.zeros(dag.param_count), dtype=float).reshape(-1)
    if theta.shape[0] != dag.param_count:
        raise ValueError(f"theta has {theta.shape[0]} entries, circuit has {dag.param_count} parameters")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta contains non-finite values")
    return theta


def check_dag(dag: CircuitDag, topology: Topology):
    diags = validate(dag, topology)
    if diags:
        raise ValueError("invalid circuit: " + "; ".join(diags))
    return dag


def check_positive(name, value, *, integer=False, allow_zero=False):
    kind = numbers.Integral if integer else numbers.Real
    if not isinstance(value, kind) or isinstance(value, bool):
        raise TypeError(f"{name} must be {'an integer' if integer else 'a number'}, got {value!r}")
    if value < 0 or (value == 0 and not allow_zero):
        raise ValueError(f"{name} must be {'non-negative' if allow_zero else 'positive'}, got {value}")
    return value
