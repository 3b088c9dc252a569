"""Nash search, the potential-only annealing baseline, seeding and weight sweeps.

Both searches share one annealing chain. Each outer iteration proposes a
handful of structural moves, polishes every candidate with gradient ascent
on the continuous parameters, and Metropolis-accepts the best candidate on
the potential. Nash search draws proposals from one player's restricted
action set at a time (round-robin) and stops as soon as the Nash residual
falls below ``epsilon``; the baseline draws from the union of all action
sets and only stops when the budget runs out.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .dag import CircuitDag, GateKind, Topology, deserialize_with_params, to_record
from .game import PLAYERS, GameContext, Player, actions, all_actions, apply_move, nash_residual
from .payoffs import PayoffVector, TaskSense, Weights, evaluate_payoffs, potential
from .problems import Problem
from .simulator import run, value_and_gradient
from .utils.validation import (
    check_dag,
    check_gate_set,
    check_positive,
    check_problem,
    check_theta,
    check_topology,
    check_weights,
)

CONVERGED = "converged_epsilon_nash"
EXHAUSTED = "budget_exhausted"
INNER_OBJECTIVES = ("task_only", "full_potential_fd")


@dataclass(frozen=True)
class SearchConfig:
    weights: Weights = field(default_factory=Weights)
    epsilon: float = 0.05
    outer_iters: int = 15
    inner_steps: int = 100
    inner_rate: float = 0.05
    t0: float = 1.0
    cooling: float = 0.95
    proposals_per_iter: int = 8
    rng_seed: int = 0
    inner_objective: str = "task_only"
    delta_weighted: bool = False
    gate_set: frozenset | None = None
    eff_dim_tol: float = 1e-6
    two_qubit_weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "weights", check_weights(self.weights))
        object.__setattr__(self, "gate_set", check_gate_set(self.gate_set))
        check_positive("epsilon", self.epsilon, allow_zero=True)
        check_positive("outer_iters", self.outer_iters, integer=True, allow_zero=True)
        check_positive("inner_steps", self.inner_steps, integer=True, allow_zero=True)
        check_positive("inner_rate", self.inner_rate)
        check_positive("t0", self.t0)
        check_positive("proposals_per_iter", self.proposals_per_iter, integer=True)
        check_positive("two_qubit_weight", self.two_qubit_weight, allow_zero=True)
        if not 0 < self.cooling <= 1:
            raise ValueError(f"cooling must lie in (0, 1], got {self.cooling}")
        if self.inner_objective not in INNER_OBJECTIVES:
            raise ValueError(f"inner_objective must be one of {INNER_OBJECTIVES}")

    def replace(self, **changes) -> "SearchConfig":
        return dataclasses.replace(self, **changes)

    def context(self, problem: Problem, topology: Topology) -> GameContext:
        return GameContext(
            problem.hamiltonian,
            problem.sense,
            topology,
            self.weights,
            self.gate_set,
            self.eff_dim_tol,
            self.two_qubit_weight,
            self.delta_weighted,
        )

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["weights"] = list(self.weights.as_tuple())
        d["gate_set"] = sorted(k.value for k in self.gate_set)
        return d


# -- seeds ---------------------------------------------------------------


@dataclass(frozen=True)
class Cold:
    pass


@dataclass(frozen=True)
class QaoaP1:
    init: float = 0.01


@dataclass(frozen=True)
class FromDagFile:
    path: str


@dataclass(frozen=True)
class GivensSeed:
    occupied: tuple[int, ...]
    quadruples: tuple[tuple[int, int, int, int], ...]


SeedStrategy = Union[Cold, QaoaP1, FromDagFile, GivensSeed]


def _zz_bonds(problem: Problem) -> list[tuple[int, int]]:
    bonds = []
    for _, word in problem.hamiltonian.terms:
        zs = [q for q, c in enumerate(word) if c == "Z"]
        if len(zs) == 2 and all(c in "IZ" for c in word):
            bonds.append(tuple(zs))
    return bonds


def make_seed(strategy: SeedStrategy, problem: Problem, topology: Topology):
    """Initial ``(dag, theta)`` for a search."""
    n = problem.n_qubits
    if topology.n_qubits != n:
        raise ValueError(f"topology has {topology.n_qubits} qubits, problem has {n}")
    if isinstance(strategy, Cold):
        return CircuitDag.from_gates(n, [("h", q) for q in range(n)]), np.zeros(0)
    if isinstance(strategy, QaoaP1):
        gates = [("h", q) for q in range(n)]
        gates += [("rzz", b) for b in _zz_bonds(problem) if topology.has_edge(*b)]
        gates += [("rx", q) for q in range(n)]
        dag = CircuitDag.from_gates(n, gates)
        return dag, np.full(dag.param_count, float(strategy.init))
    if isinstance(strategy, GivensSeed):
        gates = []
        for q in strategy.occupied:
            if not 0 <= q < n:
                raise ValueError(f"occupied qubit {q} out of range")
            gates.append(("x", q))
        for quad in strategy.quadruples:
            quad = tuple(int(q) for q in quad)
            if len(quad) != 4 or len(set(quad)) != 4:
                raise ValueError(f"excitation {quad} must name four distinct qubits")
            gates.append((GateKind.DOUBLE_EXCITATION, quad))
        dag = CircuitDag.from_gates(n, gates)
        check_dag(dag, topology)
        return dag, np.zeros(dag.param_count)
    if isinstance(strategy, FromDagFile):
        dag, theta = deserialize_with_params(Path(strategy.path).read_text())
        if dag.n_qubits != n:
            raise ValueError(f"seed circuit has {dag.n_qubits} qubits, problem has {n}")
        check_dag(dag, topology)
        return dag, theta
    raise TypeError(f"unknown seed strategy {strategy!r}")


def parse_seed(spec) -> SeedStrategy:
    """Seed strategy from a config value: ``"cold"``, ``"qaoa_p1"`` or a mapping."""
    if isinstance(spec, (Cold, QaoaP1, FromDagFile, GivensSeed)):
        return spec
    if isinstance(spec, str):
        spec = {"kind": spec}
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError(f"invalid seed specification {spec!r}")
    kind = spec["kind"]
    if kind == "cold":
        return Cold()
    if kind == "qaoa_p1":
        return QaoaP1(float(spec.get("init", 0.01)))
    if kind == "dag_file":
        return FromDagFile(str(spec["path"]))
    if kind == "givens":
        return GivensSeed(
            tuple(int(q) for q in spec["occupied"]),
            tuple(tuple(int(q) for q in quad) for quad in spec["quadruples"]),
        )
    raise ValueError(f"unknown seed kind {kind!r}")


def seed_to_dict(seed: SeedStrategy) -> dict:
    if isinstance(seed, Cold):
        return {"kind": "cold"}
    if isinstance(seed, QaoaP1):
        return {"kind": "qaoa_p1", "init": seed.init}
    if isinstance(seed, FromDagFile):
        return {"kind": "dag_file", "path": seed.path}
    return {
        "kind": "givens",
        "occupied": list(seed.occupied),
        "quadruples": [list(q) for q in seed.quadruples],
    }


# -- inner loop ----------------------------------------------------------


def _phi(dag, theta, problem, cfg) -> tuple[float, PayoffVector]:
    p = evaluate_payoffs(
        dag, theta, problem.hamiltonian, problem.sense, cfg.eff_dim_tol, cfg.two_qubit_weight
    )
    return potential(p, cfg.weights), p


def inner_gd(dag: CircuitDag, theta0, problem: Problem, cfg: SearchConfig) -> np.ndarray:
    """Fixed-step gradient ascent on the continuous parameters; returns the best point seen."""
    theta = np.array(theta0, dtype=float)
    if dag.param_count == 0 or cfg.inner_steps == 0:
        return theta
    if cfg.inner_objective == "full_potential_fd":
        return _inner_fd(dag, theta, problem, cfg)
    w3 = cfg.weights.w3
    if w3 == 0:
        return theta
    sign = 1.0 if problem.sense is TaskSense.MAXIMIZE else -1.0
    h = problem.hamiltonian
    scale = sign * w3
    best_theta, best_val = theta, -math.inf
    for _ in range(cfg.inner_steps):
        val, grad = value_and_gradient(dag, theta, h)
        if scale * val > best_val:
            best_theta, best_val = theta, scale * val
        theta = theta + cfg.inner_rate * scale * grad
    if scale * h.expectation(run(dag, theta)) > best_val:
        best_theta = theta
    return best_theta.copy()


def _inner_fd(dag, theta, problem, cfg, step=1e-4):
    best_theta, best_val = theta.copy(), _phi(dag, theta, problem, cfg)[0]
    for _ in range(cfg.inner_steps):
        grad = np.zeros_like(theta)
        for k in range(theta.size):
            e = np.zeros_like(theta)
            e[k] = step
            grad[k] = (_phi(dag, theta + e, problem, cfg)[0] - _phi(dag, theta - e, problem, cfg)[0]) / (
                2 * step
            )
        theta = theta + cfg.inner_rate * grad
        val = _phi(dag, theta, problem, cfg)[0]
        if val > best_val:
            best_theta, best_val = theta.copy(), val
    return best_theta


# -- trace ---------------------------------------------------------------


@dataclass
class IterationRecord:
    iter: int
    temperature: float | None
    phi_current: float
    phi_best: float
    payoffs: PayoffVector
    delta: float
    delta_per_player: dict
    proposals: int
    move: str | None
    accepted: bool
    snapshot: int

    def to_dict(self):
        return {
            "iter": self.iter,
            "temperature": self.temperature,
            "phi_current": self.phi_current,
            "phi_best": self.phi_best,
            "payoffs": dict(zip(("f1", "f2", "f3", "f4"), self.payoffs.as_tuple())),
            "delta": self.delta,
            "delta_per_player": {p.value: v for p, v in self.delta_per_player.items()},
            "proposals": self.proposals,
            "move": self.move,
            "accepted": self.accepted,
            "snapshot": self.snapshot,
        }


@dataclass
class SearchTrace:
    method: str
    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)  # (dag, theta) per accepted state
    dag: CircuitDag | None = None
    theta: np.ndarray | None = None
    payoffs: PayoffVector | None = None
    phi: float = float("nan")
    delta: float = float("nan")
    delta_per_player: dict = field(default_factory=dict)
    status: str = EXHAUSTED

    @property
    def phi_series(self):
        return [r.phi_current for r in self.records]

    @property
    def phi_best_series(self):
        return [r.phi_best for r in self.records]

    @property
    def delta_series(self):
        return [r.delta for r in self.records]

    def to_dict(self, snapshots: bool = False) -> dict:
        out = {
            "method": self.method,
            "status": self.status,
            "phi": self.phi,
            "payoffs": dict(zip(("f1", "f2", "f3", "f4"), self.payoffs.as_tuple())),
            "delta": self.delta,
            "delta_per_player": {p.value: v for p, v in self.delta_per_player.items()},
            "circuit": to_record(self.dag, self.theta),
            "n_ops": len(self.dag),
            "records": [r.to_dict() for r in self.records],
        }
        if snapshots:
            out["snapshots"] = [to_record(d, t) for d, t in self.snapshots]
        return out


def _candidate_key(item):
    phi, dag, _, idx = item[0], item[1], item[2], item[3]
    return (-phi, len(dag), sum(op.id for op in dag.ops), idx)


def _anneal(problem: Problem, topology: Topology, cfg: SearchConfig, seed, mode: str) -> SearchTrace:
    problem = check_problem(problem)
    topology = check_topology(topology, problem.n_qubits)
    ctx = cfg.context(problem, topology)
    dag, theta = make_seed(parse_seed(seed), problem, topology)
    theta = check_theta(dag, theta)
    check_dag(dag, topology)
    rng = np.random.default_rng(cfg.rng_seed)

    phi, pay = _phi(dag, theta, problem, cfg)
    delta, per = nash_residual(dag, theta, ctx)
    trace = SearchTrace(method=mode, snapshots=[(dag, theta)])
    trace.records.append(IterationRecord(0, None, phi, phi, pay, delta, per, 0, None, True, 0))
    best = (phi, dag, theta, pay, delta, per)
    converged = mode == "nash" and delta <= cfg.epsilon

    for k in range(cfg.outer_iters):
        if converged:
            break
        temp = cfg.t0 * cfg.cooling**k
        if mode == "nash":
            pool = actions(PLAYERS[k % len(PLAYERS)], dag, ctx)
        else:
            pool = all_actions(dag, ctx)
        if len(pool) > cfg.proposals_per_iter:
            picks = rng.choice(len(pool), size=cfg.proposals_per_iter, replace=False)
            proposals = [pool[i] for i in picks]
        else:
            proposals = list(pool)
        candidates = []
        for idx, move in enumerate(proposals):
            new_dag, new_theta = apply_move(dag, theta, move)
            new_theta = inner_gd(new_dag, new_theta, problem, cfg)
            cphi, cpay = _phi(new_dag, new_theta, problem, cfg)
            candidates.append((cphi, new_dag, new_theta, idx, cpay, move))
        u = rng.random()
        accepted, move_desc = False, None
        if candidates:
            cphi, new_dag, new_theta, _, cpay, move = min(candidates, key=_candidate_key)
            move_desc = move.describe()
            gain = cphi - phi
            if gain >= 0 or u < math.exp(gain / temp):
                accepted = True
                dag, theta, phi, pay = new_dag, new_theta, cphi, cpay
                trace.snapshots.append((dag, theta))
                delta, per = nash_residual(dag, theta, ctx)
        if phi > best[0]:
            best = (phi, dag, theta, pay, delta, per)
        trace.records.append(
            IterationRecord(
                k + 1, temp, phi, best[0], pay, delta, per, len(proposals), move_desc, accepted,
                len(trace.snapshots) - 1,
            )
        )
        converged = mode == "nash" and delta <= cfg.epsilon

    if converged:
        trace.status = CONVERGED
        final = (phi, dag, theta, pay, delta, per)
    else:
        final = best
    trace.phi, trace.dag, trace.theta, trace.payoffs, trace.delta, trace.delta_per_player = final
    return trace


def nash_search(problem, topology, cfg: SearchConfig, seed: SeedStrategy = Cold()) -> SearchTrace:
    return _anneal(problem, topology, cfg, seed, "nash")


def baseline_sa(problem, topology, cfg: SearchConfig, seed: SeedStrategy = Cold()) -> SearchTrace:
    return _anneal(problem, topology, cfg, seed, "baseline")


# -- estimators ----------------------------------------------------------


class NashSearch(BaseEstimator):
    """Four-player Nash architecture search as a scikit-learn style estimator.

    ``fit`` takes a :class:`~pqcgame.problems.Problem` and leaves the chosen
    circuit in ``dag_``/``theta_`` together with the full ``trace_``.

    Parameters
    ----------
    topology : Topology, str or None
        Hardware connectivity; ``None`` means all-to-all.
    weights : Weights or sequence of 4 floats
        Potential weights ``(w1, w2, w3, w4)``.
    seed : str, dict or seed strategy
        ``"cold"``, ``"qaoa_p1"``, ``{"kind": "givens", ...}`` or
        ``{"kind": "dag_file", "path": ...}``.
    random_state : int
        Seed of the annealing chain.

    The remaining parameters mirror :class:`SearchConfig`.
    """

    _mode = "nash"

    def __init__(
        self,
        topology=None,
        weights=(1.0, 0.0, 1.0, 0.0),
        epsilon=0.05,
        outer_iters=15,
        inner_steps=100,
        inner_rate=0.05,
        t0=1.0,
        cooling=0.95,
        proposals_per_iter=8,
        inner_objective="task_only",
        delta_weighted=False,
        seed="cold",
        gate_set=None,
        eff_dim_tol=1e-6,
        two_qubit_weight=1.0,
        random_state=0,
    ):
        self.topology = topology
        self.weights = weights
        self.epsilon = epsilon
        self.outer_iters = outer_iters
        self.inner_steps = inner_steps
        self.inner_rate = inner_rate
        self.t0 = t0
        self.cooling = cooling
        self.proposals_per_iter = proposals_per_iter
        self.inner_objective = inner_objective
        self.delta_weighted = delta_weighted
        self.seed = seed
        self.gate_set = gate_set
        self.eff_dim_tol = eff_dim_tol
        self.two_qubit_weight = two_qubit_weight
        self.random_state = random_state

    def _config(self) -> SearchConfig:
        return SearchConfig(
            weights=self.weights,
            epsilon=self.epsilon,
            outer_iters=self.outer_iters,
            inner_steps=self.inner_steps,
            inner_rate=self.inner_rate,
            t0=self.t0,
            cooling=self.cooling,
            proposals_per_iter=self.proposals_per_iter,
            rng_seed=int(self.random_state),
            inner_objective=self.inner_objective,
            delta_weighted=self.delta_weighted,
            gate_set=self.gate_set,
            eff_dim_tol=self.eff_dim_tol,
            two_qubit_weight=self.two_qubit_weight,
        )

    def fit(self, problem, y=None):
        problem = check_problem(problem)
        self.config_ = self._config()
        self.topology_ = check_topology(self.topology, problem.n_qubits)
        self.trace_ = _anneal(problem, self.topology_, self.config_, self.seed, self._mode)
        self.dag_ = self.trace_.dag
        self.theta_ = self.trace_.theta
        self.payoffs_ = self.trace_.payoffs
        self.phi_ = self.trace_.phi
        self.delta_ = self.trace_.delta
        self.status_ = self.trace_.status
        return self

    @property
    def converged_(self) -> bool:
        return self.status_ == CONVERGED

    def predict(self, problem=None) -> np.ndarray:
        """Output statevector of the fitted circuit."""
        check_is_fitted(self, "dag_")
        return run(self.dag_, self.theta_)

    def score(self, problem, y=None) -> float:
        """Potential of the fitted circuit on ``problem``."""
        check_is_fitted(self, "dag_")
        problem = check_problem(problem)
        return _phi(self.dag_, self.theta_, problem, self.config_)[0]


class SimulatedAnnealingBaseline(NashSearch):
    """Same chain as :class:`NashSearch` but proposals come from the union of
    all action sets and the Nash residual never stops the run."""

    _mode = "baseline"


# -- weight sweep and Pareto filtering -------------------------------------


@dataclass(frozen=True)
class FrontierPoint:
    weights: Weights
    m2_per_n: float
    task_value: float
    phi: float
    rng_seed: int
    dag: CircuitDag = field(compare=False)
    theta: tuple = field(compare=False)

    def coords(self):
        return (self.m2_per_n, self.task_value)


def weight_sweep(
    problem,
    topology,
    corners: Sequence,
    cfg: SearchConfig,
    seeds: Sequence[int] = (0,),
    seed_strategy: SeedStrategy = Cold(),
) -> list[FrontierPoint]:
    """One Nash search per corner and rng seed; keeps the highest-potential run per corner.

    ``task_value`` is the raw expectation ``<H>``.
    """
    if not corners:
        raise ValueError("need at least one weight corner")
    problem = check_problem(problem)
    points = []
    for corner in corners:
        w = check_weights(corner)
        best = None
        for s in seeds:
            tr = nash_search(problem, topology, cfg.replace(weights=w, rng_seed=int(s)), seed_strategy)
            if best is None or tr.phi > best[0].phi:
                best = (tr, s)
        tr, s = best
        value = tr.payoffs.f3 if problem.sense is TaskSense.MAXIMIZE else -tr.payoffs.f3
        points.append(FrontierPoint(w, tr.payoffs.f2, value, tr.phi, int(s), tr.dag, tuple(tr.theta)))
    return points


def dominates(p, q, senses=("max", "max")) -> bool:
    """True when ``p`` is at least as good as ``q`` everywhere and strictly better somewhere."""
    better = False
    for a, b, sense in zip(p, q, senses):
        if sense == "min":
            a, b = -a, -b
        if a < b:
            return False
        if a > b:
            better = True
    return better


def pareto_front(points, senses=("max", "max")):
    """Non-dominated subset in input order.

    ``points`` may be :class:`FrontierPoint` objects or coordinate tuples.
    """
    coords = [p.coords() if isinstance(p, FrontierPoint) else tuple(p) for p in points]
    return [
        p
        for i, p in enumerate(points)
        if not any(dominates(coords[j], coords[i], senses) for j in range(len(points)) if j != i)
    ]
