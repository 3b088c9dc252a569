"""Dense statevector simulation of circuit DAGs.

States are complex vectors of length ``2**n`` in little-endian order
(qubit 0 is the least significant bit). Multi-qubit gate matrices are
written in the basis of their listed qubits with the first listed qubit as
the most significant bit, so ``cnot`` on ``(c, t)`` has the textbook matrix.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .dag import CircuitDag, GateKind
from .pauli import PauliSum

MAX_SPECTRUM_QUBITS = 10


class CapabilityError(RuntimeError):
    """Raised when a request exceeds what dense simulation supports."""


_SQ2 = 1 / math.sqrt(2)
_FIXED = {
    GateKind.H: np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.S: np.array([[1, 0], [0, 1j]], dtype=complex),
    GateKind.T: np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
    GateKind.TDG: np.array([[1, 0], [0, np.exp(-1j * np.pi / 4)]], dtype=complex),
    GateKind.CNOT: np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
}

# Generators G with U(theta) = exp(-i theta G).
_DE_LO, _DE_HI = 0b0011, 0b1100
_GENERATORS = {
    GateKind.RX: 0.5 * _FIXED[GateKind.X],
    GateKind.RY: 0.5 * _FIXED[GateKind.Y],
    GateKind.RZ: 0.5 * _FIXED[GateKind.Z],
    GateKind.RZZ: 0.5 * np.diag([1, -1, -1, 1]).astype(complex),
}
_g = np.zeros((16, 16), dtype=complex)
_g[_DE_LO, _DE_HI] = -0.5j
_g[_DE_HI, _DE_LO] = 0.5j
_GENERATORS[GateKind.DOUBLE_EXCITATION] = _g
del _g


def gate_matrix(kind: GateKind, theta: float | None = None) -> np.ndarray:
    """Unitary of ``kind`` in the basis of its listed qubits."""
    kind = GateKind(kind)
    if not kind.parameterized:
        return _FIXED[kind].copy()
    if theta is None:
        raise ValueError(f"{kind.value} needs an angle")
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if kind is GateKind.RX:
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind is GateKind.RY:
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind is GateKind.RZ:
        return np.diag([c - 1j * s, c + 1j * s])
    if kind is GateKind.RZZ:
        a, b = c - 1j * s, c + 1j * s
        return np.diag([a, b, b, a])
    u = np.eye(16, dtype=complex)
    u[_DE_LO, _DE_LO] = c
    u[_DE_HI, _DE_HI] = c
    u[_DE_HI, _DE_LO] = s
    u[_DE_LO, _DE_HI] = -s
    return u


def generator(kind: GateKind) -> np.ndarray:
    return _GENERATORS[kind]


def zero_state(n_qubits: int) -> np.ndarray:
    psi = np.zeros(2**n_qubits, dtype=complex)
    psi[0] = 1.0
    return psi


def apply_matrix(psi: np.ndarray, mat: np.ndarray, qubits, n_qubits: int) -> np.ndarray:
    """Apply ``mat`` to ``qubits`` of ``psi``; returns a new array."""
    k = len(qubits)
    if k == 1:
        q = qubits[0]
        view = psi.reshape(2 ** (n_qubits - 1 - q), 2, 2**q)
        return np.matmul(mat, view).reshape(-1)
    if k == 2:
        rows, base, offsets = _two_qubit_tables(n_qubits, qubits[0], qubits[1])
        out = np.zeros_like(psi, dtype=complex)
        for c in range(4):
            col = mat[:, c]
            if col.any():
                out += col[rows] * psi[base | offsets[c]]
        return out
    tensor = psi.reshape((2,) * n_qubits)
    axes = [n_qubits - 1 - q for q in qubits]
    out = np.tensordot(mat.reshape((2,) * (2 * k)), tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes).reshape(-1)


@lru_cache(maxsize=512)
def _two_qubit_tables(n: int, q0: int, q1: int):
    # gather tables: local row index of every amplitude, the amplitude index
    # with both target bits cleared, and the bit pattern of each local column
    idx = np.arange(2**n, dtype=np.int64)
    rows = 2 * ((idx >> q0) & 1) + ((idx >> q1) & 1)
    base = idx & ~((1 << q0) | (1 << q1))
    offsets = [((c >> 1) << q0) | ((c & 1) << q1) for c in range(4)]
    return rows, base, offsets


def _check_theta(dag: CircuitDag, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape[0] != dag.param_count:
        raise ValueError(
            f"parameter vector has length {theta.shape[0]}, circuit has {dag.param_count} parameters"
        )
    return theta


def _op_matrix(op, theta):
    return gate_matrix(op.kind, None if op.param_slot is None else theta[op.param_slot])


_DIAGONAL = frozenset(
    {GateKind.Z, GateKind.S, GateKind.T, GateKind.TDG, GateKind.RZ, GateKind.RZZ, GateKind.CZ}
)


def _compile(op, theta):
    """Cheapest representation of one gate: ``(tag, payload, qubits)``."""
    if op.kind is GateKind.CNOT:
        return ("perm", None, op.qubits)
    mat = _op_matrix(op, theta)
    if op.kind in _DIAGONAL:
        return ("diag", np.diag(mat).copy(), op.qubits)
    return ("dense", mat, op.qubits)


@lru_cache(maxsize=512)
def _cnot_perm(n: int, c: int, t: int) -> np.ndarray:
    idx = np.arange(2**n, dtype=np.int64)
    return idx ^ (((idx >> c) & 1) << t)


def _apply(psi, compiled, n, adjoint=False):
    tag, payload, qubits = compiled
    if tag == "perm":
        return psi[_cnot_perm(n, qubits[0], qubits[1])]
    if tag == "diag":
        d = payload.conj() if adjoint else payload
        if len(qubits) == 1:
            q = qubits[0]
            return (psi.reshape(2 ** (n - 1 - q), 2, 2**q) * d[:, None]).reshape(-1)
        return psi * d[_two_qubit_tables(n, qubits[0], qubits[1])[0]]
    return apply_matrix(psi, payload.conj().T if adjoint else payload, qubits, n)


def run(dag: CircuitDag, theta=(), initial: np.ndarray | None = None) -> np.ndarray:
    """Statevector produced by ``dag`` acting on ``|0...0>`` (or ``initial``)."""
    theta = _check_theta(dag, theta)
    n = dag.n_qubits
    psi = zero_state(n) if initial is None else np.asarray(initial, dtype=complex)
    for op in dag.ops:
        psi = _apply(psi, _compile(op, theta), n)
    return psi


def n_qubits_of(state: np.ndarray) -> int:
    n = int(round(math.log2(state.shape[0])))
    if 2**n != state.shape[0]:
        raise ValueError(f"state length {state.shape[0]} is not a power of two")
    return n


def expectation(state: np.ndarray, h: PauliSum) -> float:
    if n_qubits_of(state) != h.n_qubits:
        raise ValueError(f"state has {n_qubits_of(state)} qubits, operator has {h.n_qubits}")
    return h.expectation(state)


@lru_cache(maxsize=None)
def _pauli_transfer():
    # (rho00, rho01, rho10, rho11) -> (Tr rho I, Tr rho X, Tr rho Y, Tr rho Z)
    return np.array(
        [[1, 0, 0, 1], [0, 1, 1, 0], [0, 1j, -1j, 0], [1, 0, 0, -1]], dtype=complex
    )


def pauli_spectrum(state: np.ndarray) -> np.ndarray:
    """All ``4**n`` Pauli expectations of a pure state.

    Entry ``sum_q p_q * 4**q`` holds ``<P>`` where ``p_q`` in 0..3 indexes
    I, X, Y, Z on qubit ``q`` (see :func:`pauli_index`).
    """
    n = n_qubits_of(state)
    if n > MAX_SPECTRUM_QUBITS:
        raise CapabilityError(
            f"pauli_spectrum supports at most {MAX_SPECTRUM_QUBITS} qubits, got {n}"
        )
    rho = np.outer(state, state.conj()).reshape((2,) * (2 * n))
    # interleave row/column bit of each qubit, most significant qubit first
    order = [ax for q in range(n) for ax in (q, n + q)]
    t = rho.transpose(order).reshape(4**n)
    m = _pauli_transfer()
    for q in range(n):
        # axis for qubit q has stride 4**q
        view = t.reshape(4 ** (n - 1 - q), 4, 4**q)
        t = np.matmul(m, view).reshape(-1)
    return t.real.copy()


def pauli_index(word: str) -> int:
    return sum("IXYZ".index(c) * 4**q for q, c in enumerate(word))


def gradient(dag: CircuitDag, theta, h: PauliSum, method: str = "shift") -> np.ndarray:
    """d<h>/d theta for every parameter slot.

    ``method="shift"`` uses parameter-shift rules (two-term for rotations,
    four-term for double excitations); ``"adjoint"`` uses reverse-mode
    generator insertion, which is exact and costs one forward and one
    backward sweep.
    """
    theta = _check_theta(dag, theta)
    if h.n_qubits != dag.n_qubits:
        raise ValueError(f"operator has {h.n_qubits} qubits, circuit has {dag.n_qubits}")
    if method == "adjoint":
        return _adjoint_gradient(dag, theta, h)
    if method != "shift":
        raise ValueError(f"unknown gradient method {method!r}")
    grad = np.zeros(dag.param_count)
    f = lambda th: h.expectation(run(dag, th))  # noqa: E731
    for op in dag.ops:
        if op.param_slot is None:
            continue
        k = op.param_slot

        def shifted(delta):
            th = theta.copy()
            th[k] += delta
            return f(th)

        if op.kind is GateKind.DOUBLE_EXCITATION:
            a = (math.sqrt(2) + 1) / (4 * math.sqrt(2))
            b = (math.sqrt(2) - 1) / (4 * math.sqrt(2))
            half, three = math.pi / 2, 3 * math.pi / 2
            grad[k] = a * (shifted(half) - shifted(-half)) - b * (shifted(three) - shifted(-three))
        else:
            grad[k] = 0.5 * (shifted(math.pi / 2) - shifted(-math.pi / 2))
    return grad


def _adjoint_gradient(dag, theta, h):
    return value_and_gradient(dag, theta, h)[1]


def value_and_gradient(dag: CircuitDag, theta, h: PauliSum) -> tuple[float, np.ndarray]:
    """``<h>`` and its adjoint-mode gradient from a single forward/backward sweep."""
    theta = _check_theta(dag, theta)
    n = dag.n_qubits
    phi = run(dag, theta)
    lam = h.apply(phi)
    value = float(np.vdot(phi, lam).real)
    grad = np.zeros(dag.param_count)
    for op in reversed(dag.ops):
        if op.param_slot is not None:
            g_phi = apply_matrix(phi, generator(op.kind), op.qubits, n)
            grad[op.param_slot] = 2.0 * np.vdot(lam, g_phi).imag
        compiled = _compile(op, theta)
        phi = _apply(phi, compiled, n, adjoint=True)
        lam = _apply(lam, compiled, n, adjoint=True)
    return value, grad


def derivative_states(dag: CircuitDag, theta) -> tuple[np.ndarray, np.ndarray]:
    """Output state and its partial derivatives, one row per parameter slot."""
    theta = _check_theta(dag, theta)
    n = dag.n_qubits
    ops = dag.ops
    derivs = np.zeros((dag.param_count, 2**n), dtype=complex)
    psi = zero_state(n)
    compiled = [_compile(op, theta) for op in ops]
    for i, op in enumerate(ops):
        psi = _apply(psi, compiled[i], n)
        if op.param_slot is None:
            continue
        d = -1j * apply_matrix(psi, generator(op.kind), op.qubits, n)
        for j in range(i + 1, len(ops)):
            d = _apply(d, compiled[j], n)
        derivs[op.param_slot] = d
    return psi, derivs


def qfim(dag: CircuitDag, theta) -> np.ndarray:
    """Pure-state quantum Fisher information matrix, ``P x P`` and symmetric."""
    psi, derivs = derivative_states(dag, theta)
    if derivs.shape[0] == 0:
        return np.zeros((0, 0))
    overlaps = derivs.conj() @ derivs.T
    berry = derivs.conj() @ psi
    f = 4.0 * (overlaps - np.outer(berry, berry.conj())).real
    return 0.5 * (f + f.T)
