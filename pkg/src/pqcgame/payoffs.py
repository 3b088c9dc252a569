"""Player payoffs and the weighted potential."""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass
from enum import Enum

import numpy as np

from .dag import CircuitDag
from .pauli import PauliSum
from .simulator import n_qubits_of, pauli_spectrum, qfim, run


class TaskSense(str, Enum):
    MAXIMIZE = "maximize_expectation"
    MINIMIZE = "minimize_expectation"


@dataclass(frozen=True)
class Weights:
    w1: float = 1.0
    w2: float = 0.0
    w3: float = 1.0
    w4: float = 0.0

    def __post_init__(self):
        for name, value in zip("w1 w2 w3 w4".split(), astuple(self)):
            if not (value >= 0 and math.isfinite(value)):
                raise ValueError(f"weight {name} must be a finite non-negative number, got {value}")

    def as_tuple(self):
        return astuple(self)


@dataclass(frozen=True)
class PayoffVector:
    f1: float  # effective dimension
    f2: float  # M2 / n
    f3: float  # sign-adjusted task value
    f4: float  # hardware cost

    def __add__(self, other):
        return PayoffVector(*(a + b for a, b in zip(astuple(self), astuple(other))))

    def as_tuple(self):
        return astuple(self)


def eff_dim(dag: CircuitDag, theta, tol: float = 1e-6) -> float:
    """Numerical rank of the QFIM with a relative threshold."""
    if dag.param_count == 0:
        return 0.0
    evals = np.linalg.eigvalsh(qfim(dag, theta))
    cutoff = tol * max(1.0, float(evals[-1]))
    return float(np.count_nonzero(evals > cutoff))


def magic_m2(state: np.ndarray) -> float:
    """Stabilizer Renyi-2 entropy ``-log2(2**-n * sum_P <P>**4)``."""
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"state is not normalised (norm {norm:.12g})")
    n = n_qubits_of(state)
    spec = pauli_spectrum(state)
    sq = spec * spec
    m2 = -math.log2(float(np.dot(sq, sq)) / 2**n)
    # sum_P <P>**4 <= 2**n analytically; rounding can push stabilizer states below 0
    return max(m2, 0.0)


def task_payoff(state: np.ndarray, h: PauliSum, sense: TaskSense) -> float:
    if n_qubits_of(state) != h.n_qubits:
        raise ValueError(f"state has {n_qubits_of(state)} qubits, Hamiltonian has {h.n_qubits}")
    value = h.expectation(state)
    return value if TaskSense(sense) is TaskSense.MAXIMIZE else -value


def hardware_cost(dag: CircuitDag, two_qubit_weight: float = 1.0) -> float:
    single = sum(1 for op in dag.ops if len(op.qubits) == 1)
    multi = len(dag.ops) - single
    return single + two_qubit_weight * multi


def potential(p: PayoffVector, w: Weights) -> float:
    return w.w1 * p.f1 + w.w2 * p.f2 + w.w3 * p.f3 - w.w4 * p.f4


def evaluate_payoffs(
    dag: CircuitDag,
    theta,
    h: PauliSum,
    sense: TaskSense,
    tol: float = 1e-6,
    two_qubit_weight: float = 1.0,
) -> PayoffVector:
    state = run(dag, theta)
    return PayoffVector(
        eff_dim(dag, theta, tol),
        magic_m2(state) / dag.n_qubits,
        task_payoff(state, h, sense),
        hardware_cost(dag, two_qubit_weight),
    )
