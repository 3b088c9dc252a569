"""Circuit intermediate representation.

A circuit is stored as a flat, temporally ordered list of gate nodes. The
wire-precedence DAG is implicit: two nodes that share a qubit are ordered by
their list position, so the list itself is always a topological order.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np


class GateKind(str, Enum):
    H = "h"
    X = "x"
    Y = "y"
    Z = "z"
    S = "s"
    T = "t"
    TDG = "tdg"
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    RZZ = "rzz"
    CNOT = "cnot"
    CZ = "cz"
    DOUBLE_EXCITATION = "double_excitation"

    @property
    def arity(self) -> int:
        if self in _TWO_QUBIT:
            return 2
        if self is GateKind.DOUBLE_EXCITATION:
            return 4
        return 1

    @property
    def parameterized(self) -> bool:
        return self in PARAMETERIZED_KINDS

    @property
    def clifford(self) -> bool:
        return self in CLIFFORD_KINDS

    @classmethod
    def parse(cls, name: str) -> "GateKind":
        try:
            return cls(name)
        except ValueError:
            raise UnknownGateError(name) from None


_TWO_QUBIT = frozenset({GateKind.RZZ, GateKind.CNOT, GateKind.CZ})
PARAMETERIZED_KINDS = frozenset(
    {GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.RZZ, GateKind.DOUBLE_EXCITATION}
)
CLIFFORD_KINDS = frozenset(
    {GateKind.H, GateKind.X, GateKind.Y, GateKind.Z, GateKind.S, GateKind.CNOT, GateKind.CZ}
)
#: The native set used in the hardware benchmarks (no chemistry primitive).
DEFAULT_GATE_SET = frozenset(GateKind) - {GateKind.DOUBLE_EXCITATION}


class DagError(ValueError):
    """Raised for malformed circuits or circuit files."""


class UnknownGateError(DagError):
    def __init__(self, name):
        super().__init__(f"unknown gate name {name!r}")
        self.name = name


@dataclass(frozen=True)
class OpNode:
    id: int
    kind: GateKind
    qubits: tuple[int, ...]
    param_slot: int | None = None

    def key(self):
        return (self.kind, self.qubits, self.param_slot)


@dataclass(frozen=True)
class Topology:
    """Hardware connectivity graph; edges are stored as sorted pairs."""

    n_qubits: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise DagError("topology needs at least one qubit")
        clean = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise DagError(f"self-loop on qubit {a}")
            if not (0 <= a < self.n_qubits and 0 <= b < self.n_qubits):
                raise DagError(f"edge ({a}, {b}) out of range for {self.n_qubits} qubits")
            clean.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(clean))

    @classmethod
    def from_edges(cls, n_qubits: int, edges: Iterable[Sequence[int]]) -> "Topology":
        return cls(n_qubits, frozenset(tuple(e) for e in edges))

    @classmethod
    def all_to_all(cls, n_qubits: int) -> "Topology":
        return cls(n_qubits, frozenset(itertools.combinations(range(n_qubits), 2)))

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def allows(self, qubits: Sequence[int]) -> bool:
        """True when every pair of ``qubits`` is coupled (vacuous for one qubit)."""
        return all(self.has_edge(a, b) for a, b in itertools.combinations(qubits, 2))


class CircuitDag:
    """Immutable ordered list of gate nodes on ``n_qubits`` wires.

    Equality and hashing are structural: node ids are ignored, so two
    circuits with the same gates in the same order compare equal.
    """

    __slots__ = ("n_qubits", "ops", "next_id")

    def __init__(self, n_qubits: int, ops: Iterable[OpNode] = (), next_id: int | None = None):
        if n_qubits < 1:
            raise DagError("a circuit needs at least one qubit")
        ops = tuple(ops)
        if next_id is None:
            next_id = max((op.id for op in ops), default=-1) + 1
        object.__setattr__(self, "n_qubits", int(n_qubits))
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "next_id", int(next_id))

    def __setattr__(self, name, value):
        raise AttributeError("CircuitDag is immutable")

    @classmethod
    def from_gates(cls, n_qubits: int, gates: Iterable[tuple]) -> "CircuitDag":
        """Build from ``(kind, qubits)`` pairs; parameter slots are assigned in order."""
        ops = []
        slot = 0
        for i, (kind, qubits) in enumerate(gates):
            kind = GateKind.parse(kind) if isinstance(kind, str) else kind
            qubits = (qubits,) if isinstance(qubits, (int, np.integer)) else tuple(int(q) for q in qubits)
            ps = None
            if kind.parameterized:
                ps = slot
                slot += 1
            ops.append(OpNode(i, kind, qubits, ps))
        return cls(n_qubits, ops)

    @property
    def param_count(self) -> int:
        return sum(1 for op in self.ops if op.param_slot is not None)

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def index_of(self, node_id: int) -> int | None:
        for i, op in enumerate(self.ops):
            if op.id == node_id:
                return i
        return None

    def structure(self):
        return (self.n_qubits, tuple(op.key() for op in self.ops))

    def __eq__(self, other):
        if not isinstance(other, CircuitDag):
            return NotImplemented
        return self.structure() == other.structure()

    def __hash__(self):
        return hash(self.structure())

    def __repr__(self):
        body = ", ".join(f"{op.kind.value}@{','.join(map(str, op.qubits))}" for op in self.ops)
        return f"CircuitDag(n_qubits={self.n_qubits}, ops=[{body}])"

    def with_ops(self, ops: Iterable[OpNode], next_id: int | None = None) -> "CircuitDag":
        """Return a new circuit with ``ops``, renumbering parameter slots densely."""
        renumbered = []
        slot = 0
        for op in ops:
            ps = None
            if op.kind.parameterized:
                ps = slot
                slot += 1
            renumbered.append(op if op.param_slot == ps else OpNode(op.id, op.kind, op.qubits, ps))
        return CircuitDag(self.n_qubits, renumbered, self.next_id if next_id is None else next_id)


def validate(dag: CircuitDag, topo: Topology | None = None) -> list[str]:
    """List every structural violation of ``dag``; empty means valid.

    Without a topology only wire-level invariants are checked.
    """
    if topo is not None and topo.n_qubits != dag.n_qubits:
        raise ValueError(
            f"circuit has {dag.n_qubits} qubits but topology has {topo.n_qubits}"
        )
    problems = []
    expected_slot = 0
    seen_ids = set()
    for pos, op in enumerate(dag.ops):
        where = f"op {pos} ({op.kind.value})"
        if op.id in seen_ids:
            problems.append(f"{where}: duplicate node id {op.id}")
        seen_ids.add(op.id)
        if len(op.qubits) != op.kind.arity:
            problems.append(f"{where}: expected {op.kind.arity} qubits, got {len(op.qubits)}")
        bad = [q for q in op.qubits if not 0 <= q < dag.n_qubits]
        if bad:
            problems.append(f"{where}: qubit(s) {bad} outside [0, {dag.n_qubits})")
        if len(set(op.qubits)) != len(op.qubits):
            problems.append(f"{where}: repeated qubit in {list(op.qubits)}")
        if topo is not None and len(op.qubits) > 1 and not bad:
            for a, b in itertools.combinations(op.qubits, 2):
                if a != b and not topo.has_edge(a, b):
                    problems.append(f"{where}: qubits ({a}, {b}) are not a topology edge")
        if op.kind.parameterized:
            if op.param_slot != expected_slot:
                problems.append(
                    f"{where}: parameter slot {op.param_slot}, expected {expected_slot}"
                )
            expected_slot += 1
        elif op.param_slot is not None:
            problems.append(f"{where}: non-parameterized gate carries slot {op.param_slot}")
    return problems


def lower(dag: CircuitDag) -> list[tuple[GateKind, tuple[int, ...], int | None]]:
    """Gate sequence in execution order as ``(kind, qubits, param_slot)`` triples."""
    return [(op.kind, op.qubits, op.param_slot) for op in dag.ops]


def depth(dag: CircuitDag) -> int:
    """Greedy ASAP layer count."""
    level = [0] * dag.n_qubits
    for op in dag.ops:
        layer = max(level[q] for q in op.qubits) + 1
        for q in op.qubits:
            level[q] = layer
    return max(level, default=0)


_OP_FIELDS = {"kind", "qubits", "theta"}
_TOP_FIELDS = {"n_qubits", "ops"}


def serialize(dag: CircuitDag, theta: Sequence[float] | None = None, indent: int | None = 2) -> str:
    """JSON text for ``dag``; ``theta`` values are written inline when given."""
    if theta is not None and len(theta) != dag.param_count:
        raise ValueError(f"theta has {len(theta)} values, circuit has {dag.param_count} parameters")
    ops = []
    for op in dag.ops:
        rec = {"kind": op.kind.value, "qubits": list(op.qubits)}
        if theta is not None and op.param_slot is not None:
            rec["theta"] = float(theta[op.param_slot])
        ops.append(rec)
    return json.dumps({"n_qubits": dag.n_qubits, "ops": ops}, indent=indent)


def to_record(dag: CircuitDag, theta: Sequence[float] | None = None) -> dict:
    return json.loads(serialize(dag, theta, indent=None))


def from_record(doc) -> tuple[CircuitDag, np.ndarray]:
    if not isinstance(doc, dict):
        raise DagError("circuit document must be an object")
    extra = set(doc) - _TOP_FIELDS
    if extra:
        raise DagError(f"unknown field(s) {sorted(extra)} at top level")
    for name in ("n_qubits", "ops"):
        if name not in doc:
            raise DagError(f"missing field {name!r}")
    n = doc["n_qubits"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise DagError(f"field 'n_qubits': expected a positive integer, got {n!r}")
    if not isinstance(doc["ops"], list):
        raise DagError("field 'ops': expected an array")
    gates, theta = [], []
    for i, rec in enumerate(doc["ops"]):
        where = f"ops[{i}]"
        if not isinstance(rec, dict):
            raise DagError(f"{where}: expected an object")
        extra = set(rec) - _OP_FIELDS
        if extra:
            raise DagError(f"{where}: unknown field(s) {sorted(extra)}")
        if "kind" not in rec or "qubits" not in rec:
            raise DagError(f"{where}: 'kind' and 'qubits' are required")
        if not isinstance(rec["kind"], str):
            raise DagError(f"{where}.kind: expected a string")
        try:
            kind = GateKind.parse(rec["kind"])
        except UnknownGateError as exc:
            raise UnknownGateError(rec["kind"]) from exc
        qubits = rec["qubits"]
        if not isinstance(qubits, list) or not all(
            isinstance(q, int) and not isinstance(q, bool) for q in qubits
        ):
            raise DagError(f"{where}.qubits: expected an array of integers")
        if "theta" in rec:
            if not kind.parameterized:
                raise DagError(f"{where}.theta: gate {kind.value!r} takes no parameter")
            if not isinstance(rec["theta"], (int, float)) or isinstance(rec["theta"], bool):
                raise DagError(f"{where}.theta: expected a number")
        if kind.parameterized:
            theta.append(float(rec.get("theta", 0.0)))
        gates.append((kind, qubits))
    dag = CircuitDag.from_gates(n, gates)
    diags = validate(dag)
    if diags:
        raise DagError("; ".join(diags))
    return dag, np.asarray(theta, dtype=float)


def deserialize_with_params(text: str) -> tuple[CircuitDag, np.ndarray]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DagError(f"malformed circuit file at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return from_record(doc)


def deserialize(text: str) -> CircuitDag:
    return deserialize_with_params(text)[0]
