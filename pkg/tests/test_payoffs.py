import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqcgame.dag import CircuitDag
from pqcgame.pauli import PauliSum
from pqcgame.payoffs import (
    PayoffVector,
    TaskSense,
    Weights,
    eff_dim,
    evaluate_payoffs,
    hardware_cost,
    magic_m2,
    potential,
    task_payoff,
)
from pqcgame.simulator import apply_matrix, gate_matrix, run

from .conftest import CLIFFORD_1Q, random_dag

CLIFFORD = CLIFFORD_1Q + ("cnot", "cz")


def random_state(rng, n):
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return psi / np.linalg.norm(psi)


def test_m2_examples():
    assert magic_m2(run(CircuitDag(3))) == 0.0
    tplus = run(CircuitDag.from_gates(1, [("h", 0), ("t", 0)]))
    assert magic_m2(tplus) == pytest.approx(math.log2(4 / 3), abs=1e-12)


def test_m2_additive_on_products():
    tt = run(CircuitDag.from_gates(2, [("h", 0), ("t", 0), ("h", 1), ("t", 1)]))
    assert magic_m2(tt) == pytest.approx(2 * math.log2(4 / 3), abs=1e-12)


def test_m2_rejects_unnormalised():
    with pytest.raises(ValueError, match="normalised"):
        magic_m2(np.array([1.0, 1.0]))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_m2_vanishes_on_clifford_circuits(rng, n):
    kinds = CLIFFORD if n > 1 else CLIFFORD_1Q
    for _ in range(8):
        dag = random_dag(rng, n, 4 * n, kinds=kinds)
        assert magic_m2(run(dag)) <= 1e-9


def test_m2_clifford_invariance(rng):
    for _ in range(20):
        n = int(rng.integers(1, 5))
        psi = random_state(rng, n)
        before = magic_m2(psi)
        kind = CLIFFORD[rng.integers(len(CLIFFORD) if n > 1 else len(CLIFFORD_1Q))]
        qubits = tuple(int(q) for q in rng.permutation(n)[: 2 if kind in ("cnot", "cz") else 1])
        after = magic_m2(apply_matrix(psi, gate_matrix(kind), qubits, n))
        assert after == pytest.approx(before, abs=1e-9)


def test_m2_bounded_by_random_states(rng):
    for n in (1, 2, 3):
        m2 = magic_m2(random_state(rng, n))
        assert 0 <= m2 <= math.log2(2**n + 1) - 1 + 1e-12


def test_eff_dim_examples():
    assert eff_dim(CircuitDag.from_gates(2, [("h", 0)]), []) == 0
    assert eff_dim(CircuitDag.from_gates(1, [("rx", 0)]), [0.4]) == 1
    assert eff_dim(CircuitDag.from_gates(1, [("h", 0), ("rz", 0), ("rz", 0)]), [0.1, 0.2]) == 1


def test_eff_dim_bounded_and_relabel_invariant(rng):
    for _ in range(15):
        n = int(rng.integers(1, 4))
        dag = random_dag(rng, n, 10)
        theta = rng.normal(size=dag.param_count)
        d = eff_dim(dag, theta)
        assert 0 <= d <= dag.param_count
        # reversing the op list of commuting z-rotations changes slot order but not the state family
    diag = CircuitDag.from_gates(3, [("h", 0), ("h", 1), ("h", 2), ("rz", 0), ("rzz", (0, 1)), ("rz", 2)])
    rev = CircuitDag.from_gates(3, [("h", 0), ("h", 1), ("h", 2), ("rz", 2), ("rzz", (0, 1)), ("rz", 0)])
    theta = np.array([0.3, -0.2, 0.9])
    assert eff_dim(diag, theta) == eff_dim(rev, theta[::-1])


def test_task_payoff_signs(rng):
    z = PauliSum(1, ((1.0, "Z"),))
    one = run(CircuitDag.from_gates(1, [("x", 0)]))
    assert task_payoff(one, z, TaskSense.MINIMIZE) == pytest.approx(1.0)
    assert task_payoff(one, PauliSum.zero(1), TaskSense.MAXIMIZE) == 0.0
    psi = random_state(rng, 2)
    h = PauliSum(2, ((0.7, "XZ"), (-0.2, "YY")))
    assert task_payoff(psi, h, "maximize_expectation") + task_payoff(psi, h, "minimize_expectation") == 0


def test_task_payoff_size_mismatch():
    with pytest.raises(ValueError):
        task_payoff(run(CircuitDag(1)), PauliSum(2, ((1.0, "ZZ"),)), TaskSense.MAXIMIZE)


def test_hardware_cost():
    assert hardware_cost(CircuitDag(2)) == 0
    dag = CircuitDag.from_gates(2, [("h", 0), ("cnot", (0, 1)), ("rx", 1)])
    assert hardware_cost(dag) == 3
    assert hardware_cost(dag, two_qubit_weight=2.5) == 4.5


def test_potential_examples():
    assert potential(PayoffVector(2, 0.5, 4.0, 6), Weights(1, 0.3, 1, 0.01)) == pytest.approx(6.09, abs=1e-12)
    assert potential(PayoffVector(2, 0.5, 4.0, 6), Weights(0, 0, 0, 0)) == 0
    assert potential(PayoffVector(2, 0.5, -1.25, 6), Weights(0, 0, 1, 0)) == -1.25


@settings(max_examples=50, deadline=None)
@given(
    p=st.tuples(*[st.floats(-100, 100)] * 4),
    q=st.tuples(*[st.floats(-100, 100)] * 4),
    w=st.tuples(*[st.floats(0, 10)] * 4),
)
def test_potential_linear(p, q, w):
    p, q, w = PayoffVector(*p), PayoffVector(*q), Weights(*w)
    assert potential(p, w) + potential(q, w) == pytest.approx(potential(p + q, w), abs=1e-9)


@pytest.mark.parametrize("bad", [(-1, 0, 0, 0), (0, float("nan"), 0, 0), (0, 0, float("inf"), 0)])
def test_weights_validated(bad):
    with pytest.raises(ValueError):
        Weights(*bad)


def test_evaluate_payoffs_clifford_cut():
    # x on qubits 1 and 3 gives the partition {0,2}|{1,3}
    from pqcgame.problems import Graph, maxcut_hamiltonian

    prob = maxcut_hamiltonian(Graph.complete(4))
    dag = CircuitDag.from_gates(4, [("x", 1), ("x", 3)])
    p = evaluate_payoffs(dag, [], prob.hamiltonian, prob.sense)
    assert p == PayoffVector(0.0, 0.0, pytest.approx(4.0), 2.0)
