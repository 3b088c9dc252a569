import itertools
import math

import numpy as np
import pytest

from pqcgame.dag import CircuitDag, GateKind
from pqcgame.pauli import PauliSum, pauli_matrix
from pqcgame.simulator import (
    CapabilityError,
    gate_matrix,
    generator,
    gradient,
    pauli_index,
    pauli_spectrum,
    qfim,
    run,
    value_and_gradient,
)
from pqcgame.payoffs import magic_m2

from .conftest import random_dag

SQ2 = 1 / math.sqrt(2)


def dense_unitary(dag, theta):
    """Reference: full 2^n x 2^n matrix product built from Kronecker embeddings."""
    n = dag.n_qubits
    dim = 2**n
    total = np.eye(dim, dtype=complex)
    for op in dag.ops:
        mat = gate_matrix(op.kind, None if op.param_slot is None else theta[op.param_slot])
        k = len(op.qubits)
        full = np.zeros((dim, dim), dtype=complex)
        for col in range(dim):
            local_in = sum(((col >> q) & 1) << (k - 1 - i) for i, q in enumerate(op.qubits))
            rest = col
            for q in op.qubits:
                rest &= ~(1 << q)
            for local_out in range(2**k):
                row = rest
                for i, q in enumerate(op.qubits):
                    row |= ((local_out >> (k - 1 - i)) & 1) << q
                full[row, col] = mat[local_out, local_in]
        total = full @ total
    return total


def central_diff(dag, theta, h, step=1e-5):
    out = np.zeros(dag.param_count)
    for k in range(dag.param_count):
        e = np.zeros(dag.param_count)
        e[k] = step
        out[k] = (h.expectation(run(dag, theta + e)) - h.expectation(run(dag, theta - e))) / (2 * step)
    return out


def random_pauli_sum(rng, n, n_terms=4):
    words = ["".join(rng.choice(list("IXYZ"), size=n)) for _ in range(n_terms)]
    return PauliSum(n, tuple((float(rng.normal()), w) for w in words))


def test_run_examples():
    np.testing.assert_allclose(run(CircuitDag(2)), [1, 0, 0, 0])
    np.testing.assert_allclose(run(CircuitDag.from_gates(1, [("h", 0)])), [SQ2, SQ2])
    bell = run(CircuitDag.from_gates(2, [("h", 0), ("cnot", (0, 1))]))
    np.testing.assert_allclose(bell, [SQ2, 0, 0, SQ2], atol=1e-15)


def test_little_endian():
    # x on qubit 1 of two qubits -> basis index 2
    np.testing.assert_allclose(run(CircuitDag.from_gates(2, [("x", 1)])), [0, 0, 1, 0])


def test_cnot_control_is_first_qubit():
    psi = run(CircuitDag.from_gates(2, [("x", 1), ("cnot", (1, 0))]))
    np.testing.assert_allclose(psi, [0, 0, 0, 1])


def test_param_length_mismatch():
    with pytest.raises(ValueError):
        run(CircuitDag.from_gates(1, [("rx", 0)]), [])


@pytest.mark.parametrize("kind", [k for k in GateKind if k.parameterized])
def test_generators_match_unitaries(kind):
    from scipy.linalg import expm

    for theta in (0.0, 0.37, -2.1):
        np.testing.assert_allclose(gate_matrix(kind, theta), expm(-1j * theta * generator(kind)), atol=1e-12)


def test_double_excitation_convention():
    u = gate_matrix(GateKind.DOUBLE_EXCITATION, 0.8)
    c, s = math.cos(0.4), math.sin(0.4)
    assert u[0b0011, 0b0011] == pytest.approx(c)
    assert u[0b1100, 0b0011] == pytest.approx(s)
    assert u[0b0011, 0b1100] == pytest.approx(-s)
    np.testing.assert_allclose(np.delete(np.delete(u, [3, 12], 0), [3, 12], 1), np.eye(14))


def test_fixed_gate_conventions():
    np.testing.assert_allclose(gate_matrix(GateKind.S), np.diag([1, 1j]))
    np.testing.assert_allclose(gate_matrix(GateKind.T) @ gate_matrix(GateKind.TDG), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(gate_matrix(GateKind.RZZ, 0.3), np.diag(np.exp(-0.15j * np.array([1, -1, -1, 1]))))


def test_run_matches_dense_reference(rng):
    for _ in range(20):
        n = int(rng.integers(1, 5))
        kinds = ("h", "s", "t", "rx", "ry", "rz", "y") + (("cnot", "cz", "rzz") if n > 1 else ())
        dag = random_dag(rng, n, 10, kinds=kinds)
        theta = rng.uniform(-np.pi, np.pi, dag.param_count)
        ref = dense_unitary(dag, theta)[:, 0]
        np.testing.assert_allclose(run(dag, theta), ref, atol=1e-12)


def test_double_excitation_matches_dense_reference(rng):
    dag = CircuitDag.from_gates(5, [("h", 0), ("ry", 3), ("double_excitation", (4, 0, 3, 1)), ("cnot", (2, 4))])
    theta = rng.normal(size=2)
    np.testing.assert_allclose(run(dag, theta), dense_unitary(dag, theta)[:, 0], atol=1e-12)


def test_expectation_examples():
    z = PauliSum(1, ((1.0, "Z"),))
    x = PauliSum(1, ((1.0, "X"),))
    assert z.expectation(run(CircuitDag(1))) == pytest.approx(1.0)
    assert x.expectation(run(CircuitDag.from_gates(1, [("h", 0)]))) == pytest.approx(1.0)
    bell = run(CircuitDag.from_gates(2, [("h", 0), ("cnot", (0, 1))]))
    assert PauliSum(2, ((1.0, "ZZ"),)).expectation(bell) == pytest.approx(1.0)


def test_expectation_matches_dense_matrix(rng):
    for n in (1, 2, 3):
        h = random_pauli_sum(rng, n, 6)
        psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        psi /= np.linalg.norm(psi)
        dense = sum(c * pauli_matrix(w) for c, w in h.terms)
        assert h.expectation(psi) == pytest.approx(np.vdot(psi, dense @ psi).real, abs=1e-12)
        np.testing.assert_allclose(h.matrix(), dense, atol=1e-14)
        np.testing.assert_allclose(h.apply(psi), dense @ psi, atol=1e-14)


def test_pauli_spectrum_examples():
    spec = pauli_spectrum(run(CircuitDag(1)))
    np.testing.assert_allclose(spec, [1, 0, 0, 1], atol=1e-15)
    tplus = run(CircuitDag.from_gates(1, [("h", 0), ("t", 0)]))
    np.testing.assert_allclose(pauli_spectrum(tplus), [1, SQ2, SQ2, 0], atol=1e-15)


def test_pauli_spectrum_indexing_and_purity(rng):
    n = 4
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    psi /= np.linalg.norm(psi)
    spec = pauli_spectrum(psi)
    words = ["".join(w) for w in itertools.product("IXYZ", repeat=n)]
    for w in rng.choice(words, size=100):
        expected = PauliSum(n, ((1.0, w),)).expectation(psi)
        assert spec[pauli_index(w)] == pytest.approx(expected, abs=1e-9)
    assert np.sum(spec**2) == pytest.approx(2**n, abs=1e-8)


def test_pauli_spectrum_capability_bound():
    with pytest.raises(CapabilityError, match="10"):
        pauli_spectrum(np.eye(2**11, 1, dtype=complex).ravel())


def test_gradient_examples():
    dag = CircuitDag.from_gates(1, [("rx", 0)])
    z = PauliSum(1, ((1.0, "Z"),))
    assert gradient(dag, [np.pi / 2], z) == pytest.approx([-1.0])
    assert gradient(dag, [0.0], z) == pytest.approx([0.0], abs=1e-15)
    assert gradient(CircuitDag.from_gates(1, [("h", 0)]), [], z).shape == (0,)


def test_double_excitation_four_term_rule(rng):
    dag = CircuitDag.from_gates(4, [("h", 0), ("ry", 1), ("x", 2), ("double_excitation", (0, 1, 2, 3)), ("rx", 3)])
    h = random_pauli_sum(rng, 4, 6)
    for _ in range(5):
        theta = rng.uniform(-np.pi, np.pi, dag.param_count)
        np.testing.assert_allclose(gradient(dag, theta, h), central_diff(dag, theta, h), atol=1e-6)


def test_shift_and_adjoint_agree(rng):
    for _ in range(10):
        n = int(rng.integers(1, 5))
        dag = random_dag(rng, n, 12)
        theta = rng.normal(size=dag.param_count)
        h = random_pauli_sum(rng, n)
        value, g = value_and_gradient(dag, theta, h)
        assert value == pytest.approx(h.expectation(run(dag, theta)), abs=1e-12)
        np.testing.assert_allclose(g, gradient(dag, theta, h), atol=1e-10)


def test_qfim_examples(rng):
    dag = CircuitDag.from_gates(1, [("rx", 0)])
    for theta in rng.uniform(-np.pi, np.pi, 10):
        np.testing.assert_allclose(qfim(dag, [theta]), [[1.0]], atol=1e-9)
    assert qfim(CircuitDag.from_gates(1, [("h", 0)]), []).shape == (0, 0)
    dup = CircuitDag.from_gates(1, [("h", 0), ("rz", 0), ("rz", 0)])
    f = qfim(dup, [0.3, -0.7])
    assert np.linalg.matrix_rank(f, tol=1e-9) == 1
    np.testing.assert_allclose(f, np.ones((2, 2)), atol=1e-12)


def test_qfim_matches_finite_difference_states(rng):
    dag = random_dag(rng, 3, 10)
    theta = rng.normal(size=dag.param_count)
    psi = run(dag, theta)
    step = 1e-5
    derivs = []
    for k in range(dag.param_count):
        e = np.zeros_like(theta)
        e[k] = step
        derivs.append((run(dag, theta + e) - run(dag, theta - e)) / (2 * step))
    derivs = np.array(derivs)
    ref = 4 * (derivs.conj() @ derivs.T - np.outer(derivs.conj() @ psi, psi.conj() @ derivs.T)).real
    np.testing.assert_allclose(qfim(dag, theta), ref, atol=1e-7)


def test_qfim_unchanged_by_trailing_identity_pair(rng):
    dag = random_dag(rng, 3, 10)
    theta = rng.normal(size=dag.param_count)
    padded = CircuitDag.from_gates(3, [(op.kind, op.qubits) for op in dag.ops] + [("x", 1), ("x", 1)])
    np.testing.assert_allclose(qfim(padded, theta), qfim(dag, theta), atol=1e-9)


def test_magic_of_t_state():
    tplus = run(CircuitDag.from_gates(1, [("h", 0), ("t", 0)]))
    assert magic_m2(tplus) == pytest.approx(math.log2(4 / 3), abs=1e-9)
