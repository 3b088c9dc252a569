"""Players, restricted action sets and the epsilon-Nash residual."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Union

import numpy as np

from .dag import DEFAULT_GATE_SET, CircuitDag, GateKind, OpNode, Topology
from .pauli import PauliSum
from .payoffs import TaskSense, Weights, eff_dim, hardware_cost, magic_m2, task_payoff
from .simulator import run


class Player(str, Enum):
    TRAINABILITY = "trainability"
    MAGIC = "magic"
    TASK = "task"
    HARDWARE = "hardware"


PLAYERS = (Player.TRAINABILITY, Player.MAGIC, Player.TASK, Player.HARDWARE)


class StaleMoveError(LookupError):
    """The move refers to a node that is not in the circuit."""


@dataclass(frozen=True)
class Append:
    kind: GateKind
    qubits: tuple[int, ...]

    def describe(self):
        return f"append {self.kind.value}@{','.join(map(str, self.qubits))}"


@dataclass(frozen=True)
class Remove:
    node_id: int

    def describe(self):
        return f"remove #{self.node_id}"


@dataclass(frozen=True)
class Retype:
    node_id: int
    new_kind: GateKind

    def describe(self):
        return f"retype #{self.node_id} -> {self.new_kind.value}"


@dataclass(frozen=True)
class Rewire:
    node_id: int
    new_qubits: tuple[int, ...]

    def describe(self):
        return f"rewire #{self.node_id} -> {','.join(map(str, self.new_qubits))}"


Move = Union[Append, Remove, Retype, Rewire]

_TRAIN_1Q = (GateKind.RX, GateKind.RY, GateKind.RZ)
_MAGIC_1Q = (GateKind.T, GateKind.TDG, GateKind.RX, GateKind.RY, GateKind.RZ)
_MAGIC_APPEND = (GateKind.T, GateKind.TDG)


@dataclass(frozen=True)
class GameContext:
    """Everything a player needs to score a circuit."""

    hamiltonian: PauliSum
    sense: TaskSense
    topology: Topology
    weights: Weights = field(default_factory=Weights)
    gate_set: frozenset = DEFAULT_GATE_SET
    tol: float = 1e-6
    two_qubit_weight: float = 1.0
    delta_weighted: bool = False

    def __post_init__(self):
        if self.hamiltonian.n_qubits != self.topology.n_qubits:
            raise ValueError(
                f"Hamiltonian acts on {self.hamiltonian.n_qubits} qubits, "
                f"topology has {self.topology.n_qubits}"
            )
        object.__setattr__(self, "sense", TaskSense(self.sense))
        gate_set = DEFAULT_GATE_SET if self.gate_set is None else self.gate_set
        object.__setattr__(self, "gate_set", frozenset(GateKind(k) for k in gate_set))

    @property
    def n_qubits(self):
        return self.topology.n_qubits


def _legal_placements(kind: GateKind, topo: Topology) -> list[tuple[int, ...]]:
    n = topo.n_qubits
    if kind.arity == 1:
        return [(q,) for q in range(n)]
    if kind.arity == 2:
        edges = topo.sorted_edges()
        if kind is GateKind.CNOT:
            return edges + [(b, a) for a, b in edges]
        return edges
    # double excitation: swapping qubits inside a pair is a no-op and swapping
    # the pairs flips the sign of theta, so (a<b, c<d, a<c) covers every gate
    out = []
    for quad in itertools.combinations(range(n), 4):
        if not topo.allows(quad):
            continue
        a = quad[0]
        for b in quad[1:]:
            c, d = [q for q in quad if q not in (a, b)]
            out.append((a, b, c, d))
    return out


def actions(player: Player, dag: CircuitDag, ctx: GameContext) -> list[Move]:
    """Restricted action set of ``player`` in deterministic order."""
    player = Player(player)
    allowed = ctx.gate_set
    topo = ctx.topology
    moves: list[Move] = []
    if player is Player.HARDWARE:
        return [Remove(op.id) for op in dag.ops]
    if player is Player.TASK:
        edges = topo.sorted_edges()
        for op in dag.ops:
            if len(op.qubits) != 2:
                continue
            current = (min(op.qubits), max(op.qubits))
            moves.extend(Rewire(op.id, e) for e in edges if e != current)
        return moves
    if player is Player.TRAINABILITY:
        one_q = [k for k in _TRAIN_1Q if k in allowed]
        two_q = [GateKind.RZZ] if GateKind.RZZ in allowed else []
        appendable = [k for k in PARAM_APPEND_ORDER if k in allowed]
    else:
        one_q = [k for k in _MAGIC_1Q if k in allowed]
        two_q = [GateKind.RZZ] if GateKind.RZZ in allowed else []
        appendable = [k for k in _MAGIC_APPEND if k in allowed]
    for op in dag.ops:
        targets = one_q if op.kind.arity == 1 else two_q if op.kind.arity == 2 else []
        moves.extend(Retype(op.id, k) for k in targets if k is not op.kind)
    for kind in appendable:
        moves.extend(Append(kind, qs) for qs in _legal_placements(kind, topo))
    return moves


PARAM_APPEND_ORDER = (
    GateKind.RX,
    GateKind.RY,
    GateKind.RZ,
    GateKind.RZZ,
    GateKind.DOUBLE_EXCITATION,
)


def all_actions(dag: CircuitDag, ctx: GameContext) -> list[Move]:
    """Union of the four action sets, de-duplicated, first occurrence wins."""
    seen = {}
    for player in PLAYERS:
        for m in actions(player, dag, ctx):
            seen.setdefault(m, None)
    return list(seen)


def apply_move(dag: CircuitDag, theta, move: Move) -> tuple[CircuitDag, np.ndarray]:
    """Apply a structural edit; surviving parameters keep their values, new ones start at 0."""
    theta = np.asarray(theta, dtype=float)
    if isinstance(move, Append):
        new_op = OpNode(dag.next_id, move.kind, tuple(move.qubits))
        new = dag.with_ops(dag.ops + (new_op,), next_id=dag.next_id + 1)
        return new, _carry_params(dag, theta, new)
    pos = dag.index_of(move.node_id)
    if pos is None:
        raise StaleMoveError(f"node #{move.node_id} is not in the circuit")
    ops = list(dag.ops)
    old = ops[pos]
    if isinstance(move, Remove):
        del ops[pos]
    elif isinstance(move, Retype):
        if move.new_kind.arity != old.kind.arity:
            raise ValueError(f"cannot retype {old.kind.value} into {move.new_kind.value}: arity differs")
        ops[pos] = OpNode(old.id, move.new_kind, old.qubits)
    elif isinstance(move, Rewire):
        if len(move.new_qubits) != len(old.qubits):
            raise ValueError("rewire must keep the gate arity")
        ops[pos] = OpNode(old.id, old.kind, tuple(move.new_qubits), old.param_slot)
    else:
        raise TypeError(f"not a move: {move!r}")
    new = dag.with_ops(ops)
    return new, _carry_params(dag, theta, new)


def _carry_params(old: CircuitDag, theta: np.ndarray, new: CircuitDag) -> np.ndarray:
    by_id = {op.id: theta[op.param_slot] for op in old.ops if op.param_slot is not None}
    out = np.zeros(new.param_count)
    for op in new.ops:
        if op.param_slot is not None:
            out[op.param_slot] = by_id.get(op.id, 0.0)
    return out


def utility(player: Player, dag: CircuitDag, theta, ctx: GameContext, state=None) -> float:
    """Unweighted, sign-aligned payoff of ``player`` (hardware cost counts negatively)."""
    player = Player(player)
    if player is Player.HARDWARE:
        return -hardware_cost(dag, ctx.two_qubit_weight)
    if player is Player.TRAINABILITY:
        return eff_dim(dag, theta, ctx.tol)
    if state is None:
        state = run(dag, theta)
    if player is Player.MAGIC:
        return magic_m2(state) / dag.n_qubits
    return task_payoff(state, ctx.hamiltonian, ctx.sense)


def _player_weight(player: Player, ctx: GameContext) -> float:
    if not ctx.delta_weighted:
        return 1.0
    w = ctx.weights
    return {Player.TRAINABILITY: w.w1, Player.MAGIC: w.w2, Player.TASK: w.w3, Player.HARDWARE: w.w4}[
        player
    ]


def best_response_gap(
    player: Player,
    dag: CircuitDag,
    theta,
    ctx: GameContext,
    moves: Sequence[Move] | None = None,
) -> float:
    """Largest unilateral gain available to ``player`` at fixed theta, clamped at 0.

    ``moves`` restricts the search to a subset of the action set.
    """
    player = Player(player)
    if moves is None:
        moves = actions(player, dag, ctx)
    if not moves:
        return 0.0
    scale = _player_weight(player, ctx)
    base = utility(player, dag, theta, ctx)
    best = 0.0
    for move in moves:
        new_dag, new_theta = apply_move(dag, theta, move)
        gain = scale * (utility(player, new_dag, new_theta, ctx) - base)
        if gain > best:
            best = gain
    return best


def nash_residual(dag: CircuitDag, theta, ctx: GameContext) -> tuple[float, dict]:
    """``(max_i delta_i, {player: delta_i})``."""
    per = {p: best_response_gap(p, dag, theta, ctx) for p in PLAYERS}
    return max(per.values()), per


def is_epsilon_nash(delta: float, epsilon: float) -> bool:
    return delta <= epsilon

