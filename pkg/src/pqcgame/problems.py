"""Benchmark problems, built-in topologies and the dense ground-state oracle."""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dag import Topology
from .pauli import PauliSum, parse_pauli_text
from .payoffs import TaskSense
from .simulator import MAX_SPECTRUM_QUBITS, CapabilityError

MAX_DENSE_QUBITS = MAX_SPECTRUM_QUBITS


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: frozenset

    def __post_init__(self):
        clean = set()
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on vertex {a}")
            if not (0 <= a < self.n_vertices and 0 <= b < self.n_vertices):
                raise ValueError(f"edge ({a}, {b}) out of range")
            clean.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(clean))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, frozenset(itertools.combinations(range(n), 2)))

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        return cls(n, frozenset(tuple(e) for e in edges))


@dataclass(frozen=True)
class Problem:
    hamiltonian: PauliSum
    sense: TaskSense
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "sense", TaskSense(self.sense))

    @property
    def n_qubits(self) -> int:
        return self.hamiltonian.n_qubits


def _word(n, ops: dict) -> str:
    return "".join(ops.get(q, "I") for q in range(n))


def maxcut_hamiltonian(g: Graph) -> Problem:
    """Cut-size operator ``sum_(i,j) (1 - Z_i Z_j) / 2`` (to be maximised)."""
    n = g.n_vertices
    edges = sorted(g.edges)
    terms = []
    if edges:
        terms.append((len(edges) / 2, "I" * n))
    terms += [(-0.5, _word(n, {i: "Z", j: "Z"})) for i, j in edges]
    return Problem(PauliSum(n, tuple(terms)), TaskSense.MAXIMIZE, f"maxcut(n={n}, |E|={len(edges)})")


def tfim_hamiltonian(n: int, g: float = 1.0) -> Problem:
    """Periodic transverse-field Ising chain ``-sum Z_i Z_{i+1} - g sum X_i``."""
    if n < 2:
        raise ValueError("TFIM needs at least two sites")
    bonds = sorted({(min(i, (i + 1) % n), max(i, (i + 1) % n)) for i in range(n)})
    terms = [(-1.0, _word(n, {i: "Z", j: "Z"})) for i, j in bonds]
    terms += [(-float(g), _word(n, {i: "X"})) for i in range(n)]
    return Problem(PauliSum(n, tuple(terms)), TaskSense.MINIMIZE, f"tfim(n={n}, g={g:g})")


def parse_pauli_file(text: str) -> PauliSum:
    return parse_pauli_text(text)


def load_pauli_file(path) -> PauliSum:
    return parse_pauli_text(Path(path).read_text())


def exact_ground_energy(h: PauliSum) -> tuple[float, np.ndarray]:
    """Minimum eigenvalue and a normalised ground state from dense diagonalisation."""
    if h.n_qubits > MAX_DENSE_QUBITS:
        raise CapabilityError(
            f"dense diagonalisation supports at most {MAX_DENSE_QUBITS} qubits, got {h.n_qubits}"
        )
    mat = h.matrix()
    resid = np.abs(mat - mat.conj().T).max(initial=0.0)
    if resid > 1e-10:
        raise ValueError(f"operator is not Hermitian (residual {resid:.3g})")
    evals, evecs = np.linalg.eigh(mat)
    return float(evals[0]), evecs[:, 0]


_ALL_TO_ALL = re.compile(r"^all_to_all\((\d+)\)$|^all_to_all(\d+)$")


def builtin_topology(name: str, n_qubits: int | None = None) -> Topology:
    """``heavy_hex4`` (path), ``grid2x2`` (4-cycle) or ``all_to_all(n)``."""
    if name == "heavy_hex4":
        return Topology.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    if name == "grid2x2":
        return Topology.from_edges(4, [(0, 1), (1, 3), (3, 2), (2, 0)])
    m = _ALL_TO_ALL.match(name)
    if m:
        return Topology.all_to_all(int(m.group(1) or m.group(2)))
    if name == "all_to_all" and n_qubits is not None:
        return Topology.all_to_all(n_qubits)
    raise ValueError(f"unknown topology {name!r}")


def ring_topology(n: int) -> Topology:
    return Topology.from_edges(n, {(min(i, (i + 1) % n), max(i, (i + 1) % n)) for i in range(n)})
