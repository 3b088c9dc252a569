"""Experiment configuration and the commands behind the command-line driver.

Every command takes an :class:`ExperimentConfig` and returns a plain,
JSON-ready ``dict``. Nothing here touches the filesystem except to read
inputs named in the config, so results can be checked in memory and the
CLI is left with argument parsing and atomic output.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from . import stats
from .dag import Topology, deserialize_with_params, to_record
from .pauli import parse_pauli_text
from .payoffs import TaskSense
from .problems import (
    Graph,
    Problem,
    builtin_topology,
    exact_ground_energy,
    load_pauli_file,
    maxcut_hamiltonian,
    ring_topology,
    tfim_hamiltonian,
)
from .search import (
    SearchConfig,
    baseline_sa,
    make_seed,
    nash_search,
    pareto_front,
    parse_seed,
    seed_to_dict,
    weight_sweep,
)
from .simulator import MAX_SPECTRUM_QUBITS, CapabilityError, run
from .utils.validation import check_dag, check_theta

SCHEMA_VERSION = "1.0"
METHODS = ("nash", "baseline")
BUILTIN_TOPOLOGIES = ("heavy_hex4", "grid2x2", "all_to_all(4)")


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    """Everything one CLI invocation needs.

    ``problem`` and ``topology`` keep their config-file form (string
    shorthand or mapping) so the echo in the result file is exactly what
    was asked for. ``base_dir`` resolves relative file paths.
    """

    problem: object = None
    topology: object = "all_to_all"
    topologies: list = field(default_factory=lambda: list(BUILTIN_TOPOLOGIES))
    search: dict = field(default_factory=dict)
    seed_strategy: object = "cold"
    seeds: list = field(default_factory=lambda: [0])
    method: str = "nash"
    methods: list = field(default_factory=lambda: list(METHODS))
    corners: list = field(default_factory=list)
    ceiling: float | None = None
    bootstrap: dict = field(default_factory=lambda: {"level": 0.95, "resamples": 10000, "rng_seed": 0})
    dag: str | None = None
    dump_state: bool = False
    output: str | None = None
    base_dir: str = "."

    def echo(self) -> dict:
        # where the result goes is not part of the experiment
        d = dataclasses.asdict(self)
        d.pop("base_dir")
        d.pop("output")
        return d


_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}
_SEARCH_FIELDS = {f.name for f in dataclasses.fields(SearchConfig)} - {"rng_seed"}


def config_from_dict(data: dict | None, base_dir=".") -> ExperimentConfig:
    data = dict(data or {})
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
    cfg = ExperimentConfig(**data)
    cfg.base_dir = str(base_dir)
    return cfg


def load_config(path) -> ExperimentConfig:
    """Read a YAML or JSON config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    cfg = config_from_dict(data, path.parent)
    if cfg.output is not None:
        cfg.output = str(_resolve_path(cfg, cfg.output))
    return cfg


def set_field(cfg: ExperimentConfig, key: str, value) -> None:
    """Assign ``value`` to a dotted config path such as ``search.outer_iters``."""
    head, _, rest = key.partition(".")
    if head not in _FIELDS or head == "base_dir":
        raise ConfigError(f"unknown config field {head!r}")
    if not rest:
        setattr(cfg, head, value)
        return
    target = getattr(cfg, head)
    if not isinstance(target, dict):
        target = {}
        setattr(cfg, head, target)
    target[rest] = value


# -- resolution -----------------------------------------------------------


def _resolve_path(cfg: ExperimentConfig, path) -> Path:
    p = Path(path)
    return p if p.is_absolute() else Path(cfg.base_dir) / p


def _shorthand_problem(text: str) -> dict:
    kind, *args = text.split(":")
    if kind == "maxcut":
        return {"kind": "maxcut", "n": int(args[0]) if args else 4}
    if kind == "tfim":
        return {"kind": "tfim", "n": int(args[0]), "g": float(args[1]) if len(args) > 1 else 1.0}
    if kind == "h2":
        return {"kind": "h2"}
    if kind == "pauli" and args:
        spec = {"kind": "pauli_file", "path": args[0]}
        if len(args) > 1:
            spec["sense"] = args[1]
        return spec
    raise ConfigError(f"cannot parse problem {text!r}")


def _parse_sense(text) -> TaskSense:
    aliases = {"minimize": TaskSense.MINIMIZE, "maximize": TaskSense.MAXIMIZE}
    try:
        return aliases.get(text) or TaskSense(text)
    except ValueError:
        raise ConfigError(f"sense must be 'minimize' or 'maximize', got {text!r}") from None


def resolve_problem(cfg: ExperimentConfig) -> Problem:
    spec = cfg.problem
    if spec is None:
        raise ConfigError("config needs a 'problem'")
    if isinstance(spec, str):
        spec = _shorthand_problem(spec)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"invalid problem specification {spec!r}")
    kind = spec["kind"]
    try:
        if kind == "maxcut":
            n = int(spec.get("n", 4))
            g = Graph.from_edges(n, spec["edges"]) if "edges" in spec else Graph.complete(n)
            return maxcut_hamiltonian(g)
        if kind == "tfim":
            return tfim_hamiltonian(int(spec["n"]), float(spec.get("g", 1.0)))
        if kind == "h2":
            text = resources.files("pqcgame").joinpath("data/h2.txt").read_text()
            return Problem(parse_pauli_text(text), TaskSense.MINIMIZE, "h2")
        if kind == "pauli_file":
            path = _resolve_path(cfg, spec["path"])
            if not path.is_file():
                raise ConfigError(f"Hamiltonian file not found: {path}")
            return Problem(load_pauli_file(path), _parse_sense(spec.get("sense", "minimize")), path.name)
    except KeyError as exc:
        raise ConfigError(f"problem of kind {kind!r} is missing {exc.args[0]!r}") from None
    raise ConfigError(f"unknown problem kind {kind!r}")


def resolve_topology(spec, n_qubits: int) -> Topology:
    try:
        if isinstance(spec, Topology):
            topo = spec
        elif spec is None or spec == "all_to_all":
            topo = Topology.all_to_all(n_qubits)
        elif spec == "ring":
            topo = ring_topology(n_qubits)
        elif isinstance(spec, str):
            topo = builtin_topology(spec, n_qubits)
        elif isinstance(spec, dict):
            topo = Topology.from_edges(int(spec.get("n_qubits", n_qubits)), spec["edges"])
        else:
            topo = Topology.from_edges(n_qubits, spec)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid topology {spec!r}: {exc}") from None
    if topo.n_qubits != n_qubits:
        raise ConfigError(f"topology {spec!r} has {topo.n_qubits} qubits, problem has {n_qubits}")
    return topo


def topology_name(spec) -> str:
    return spec if isinstance(spec, str) else "custom"


def resolve_search(cfg: ExperimentConfig) -> SearchConfig:
    unknown = sorted(set(cfg.search) - _SEARCH_FIELDS)
    if unknown:
        raise ConfigError(f"unknown search field(s): {', '.join(unknown)}")
    try:
        return SearchConfig(**cfg.search)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid search settings: {exc}") from None


def resolve_seed(cfg: ExperimentConfig):
    spec = cfg.seed_strategy
    if isinstance(spec, dict) and spec.get("kind") == "dag_file":
        spec = dict(spec, path=str(_resolve_path(cfg, spec["path"])))
        if not Path(spec["path"]).is_file():
            raise ConfigError(f"seed circuit file not found: {spec['path']}")
    try:
        return parse_seed(spec)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid seed strategy: {exc}") from None


def resolve_seeds(cfg: ExperimentConfig) -> list[int]:
    seeds = cfg.seeds
    if isinstance(seeds, int):
        seeds = [seeds]
    try:
        seeds = [int(s) for s in seeds]
    except (TypeError, ValueError):
        raise ConfigError(f"seeds must be a list of integers, got {cfg.seeds!r}") from None
    if not seeds:
        raise ConfigError("need at least one rng seed")
    if len(set(seeds)) != len(seeds):
        raise ConfigError("rng seeds must be distinct")
    return seeds


def _search_fn(method: str):
    if method == "nash":
        return nash_search
    if method == "baseline":
        return baseline_sa
    raise ConfigError(f"unknown method {method!r}; expected one of {METHODS}")


def _problem_record(problem: Problem) -> dict:
    out = {"label": problem.label, "n_qubits": problem.n_qubits, "sense": problem.sense.value}
    out["ground_energy"] = (
        exact_ground_energy(problem.hamiltonian)[0] if problem.n_qubits <= MAX_SPECTRUM_QUBITS else None
    )
    return out


def _check_size(problem: Problem):
    # the magic payoff needs the full Pauli spectrum
    if problem.n_qubits > MAX_SPECTRUM_QUBITS:
        raise CapabilityError(
            f"searches support at most {MAX_SPECTRUM_QUBITS} qubits, problem has {problem.n_qubits}"
        )


def _task_value(problem: Problem, f3: float) -> float:
    return f3 if problem.sense is TaskSense.MAXIMIZE else -f3


def _run_record(problem, seed, trace) -> dict:
    rec = {"rng_seed": seed}
    rec.update(trace.to_dict())
    rec["initial_circuit"] = to_record(*trace.snapshots[0])
    rec["task_value"] = _task_value(problem, trace.payoffs.f3)
    return rec


def _summary(values) -> dict:
    s = stats.summarize(values)
    return dataclasses.asdict(s)


# -- commands ---------------------------------------------------------------


def cmd_run(cfg: ExperimentConfig) -> dict:
    problem = resolve_problem(cfg)
    _check_size(problem)
    topo = resolve_topology(cfg.topology, problem.n_qubits)
    search = resolve_search(cfg)
    seed = resolve_seed(cfg)
    seeds = resolve_seeds(cfg)
    fn = _search_fn(cfg.method)
    make_seed(seed, problem, topo)  # fail early on an unusable seed circuit
    runs = [_run_record(problem, s, fn(problem, topo, search.replace(rng_seed=s), seed)) for s in seeds]
    out = {
        "problem": _problem_record(problem),
        "method": cfg.method,
        "runs": runs,
    }
    out["aggregate"] = aggregate_runs(runs, cfg.bootstrap)
    return out


def aggregate_runs(runs: list, bootstrap: dict) -> dict:
    phis = [r["phi"] for r in runs]
    agg = {
        "n_runs": len(runs),
        "phi": _summary(phis),
        "task_value": _summary([r["task_value"] for r in runs]),
        "converged": sum(r["status"] == "converged_epsilon_nash" for r in runs),
    }
    agg["phi_ci"] = list(_ci(phis, bootstrap)) if len(phis) > 1 else None
    return agg


def _ci(xs, bootstrap: dict):
    return stats.bootstrap_ci(
        xs,
        level=float(bootstrap.get("level", 0.95)),
        resamples=int(bootstrap.get("resamples", 10000)),
        rng_seed=int(bootstrap.get("rng_seed", 0)),
    )


def paired_comparison(a, b, bootstrap: dict, ceiling=None) -> dict:
    """Table columns for paired samples ``a`` (first method) and ``b`` (second)."""
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    if len(a) != len(b):
        raise ValueError("paired samples must have equal length")
    diffs = [x - y for x, y in zip(a, b)]
    row = {
        "a": {"mean": stats.summarize(a).mean, "sd": stats.summarize(a).sd},
        "b": {"mean": stats.summarize(b).mean, "sd": stats.summarize(b).sd},
        "delta_phi": stats.summarize(diffs).mean,
        "ci": None,
        "wilcoxon_p": None,
        "d_z": None,
        "ceiling_hits": None,
        "flags": [],
    }
    if ceiling is not None:
        row["ceiling_hits"] = {"a": sum(x >= ceiling for x in a), "b": sum(x >= ceiling for x in b)}
    if len(a) < 2:
        row["flags"].append("single_seed: CI, Wilcoxon and d_z need at least two paired seeds")
        return row
    row["ci"] = list(_ci(diffs, bootstrap))
    if all(d == 0 for d in diffs):
        row["flags"].append("all_zero_differences: Wilcoxon and d_z undefined")
        return row
    row["wilcoxon_p"] = stats.wilcoxon_paired_onesided(a, b)
    try:
        row["d_z"] = stats.cohens_dz(a, b)
    except ValueError:
        row["flags"].append("constant_differences: d_z undefined")
    return row


def cmd_bench(cfg: ExperimentConfig) -> dict:
    problem = resolve_problem(cfg)
    _check_size(problem)
    search = resolve_search(cfg)
    seed = resolve_seed(cfg)
    seeds = resolve_seeds(cfg)
    if len(cfg.methods) != 2:
        raise ConfigError("bench compares exactly two methods")
    fns = [_search_fn(m) for m in cfg.methods]
    if not cfg.topologies:
        raise ConfigError("bench needs at least one topology")
    topologies = [(t, resolve_topology(t, problem.n_qubits)) for t in cfg.topologies]
    ceiling = None if cfg.ceiling is None else float(cfg.ceiling)

    rows = []
    for spec, topo in topologies:
        seed_dag, seed_theta = make_seed(seed, problem, topo)
        runs = {m: [] for m in ("a", "b")}
        for s in seeds:
            sc = search.replace(rng_seed=s)
            for key, fn in zip(("a", "b"), fns):
                runs[key].append(_run_record(problem, s, fn(problem, topo, sc, seed)))
        row = {"topology": topology_name(spec), "edges": [list(e) for e in topo.sorted_edges()]}
        row.update(
            paired_comparison(
                [r["phi"] for r in runs["a"]], [r["phi"] for r in runs["b"]], cfg.bootstrap, ceiling
            )
        )
        row["runs"] = {"a": runs["a"], "b": runs["b"]}
        row["seed_circuit"] = to_record(seed_dag, seed_theta)
        rows.append(row)
    return {
        "problem": _problem_record(problem),
        "methods": {"a": cfg.methods[0], "b": cfg.methods[1]},
        "pairing": {
            "rng_seeds": seeds,
            "seed_strategy": seed_to_dict(seed),
            "identical_rng_seeds": all(
                [r["rng_seed"] for r in row["runs"]["a"]] == [r["rng_seed"] for r in row["runs"]["b"]]
                for row in rows
            ),
            "identical_seed_circuits": all(
                ra["initial_circuit"] == rb["initial_circuit"] == row["seed_circuit"]
                for row in rows
                for ra, rb in zip(row["runs"]["a"], row["runs"]["b"])
            ),
        },
        "ceiling": ceiling,
        "rows": rows,
    }


def cmd_sweep(cfg: ExperimentConfig) -> dict:
    problem = resolve_problem(cfg)
    _check_size(problem)
    topo = resolve_topology(cfg.topology, problem.n_qubits)
    search = resolve_search(cfg)
    seed = resolve_seed(cfg)
    seeds = resolve_seeds(cfg)
    if not cfg.corners:
        raise ConfigError("sweep needs a non-empty 'corners' list")
    try:
        points = weight_sweep(problem, topo, cfg.corners, search, seeds, seed)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid corner list: {exc}") from None
    front = pareto_front(points)
    front_ids = {id(p) for p in front}
    rows = []
    for p in points:
        rows.append(
            {
                "weights": list(p.weights.as_tuple()),
                "m2_per_n": p.m2_per_n,
                "task_value": p.task_value,
                "phi": p.phi,
                "rng_seed": p.rng_seed,
                "on_frontier": id(p) in front_ids,
                "circuit": to_record(p.dag, p.theta),
            }
        )
    return {
        "problem": _problem_record(problem),
        "topology": topology_name(cfg.topology),
        "points": rows,
        "frontier": [i for i, p in enumerate(points) if id(p) in front_ids],
    }


def cmd_oracle(cfg: ExperimentConfig) -> dict:
    problem = resolve_problem(cfg)
    energy, state = exact_ground_energy(problem.hamiltonian)
    out = {"problem": _problem_record(problem), "energy": energy}
    if cfg.dag is not None:
        path = _resolve_path(cfg, cfg.dag)
        if not path.is_file():
            raise ConfigError(f"circuit file not found: {path}")
        dag, theta = deserialize_with_params(path.read_text())
        if dag.n_qubits != problem.n_qubits:
            raise ConfigError(f"circuit has {dag.n_qubits} qubits, problem has {problem.n_qubits}")
        check_dag(dag, Topology.all_to_all(dag.n_qubits))
        theta = check_theta(dag, theta)
        value = problem.hamiltonian.expectation(run(dag, theta))
        out["circuit_energy"] = value
        out["gap"] = value - energy
    if cfg.dump_state:
        out["state"] = {"real": state.real.tolist(), "imag": state.imag.tolist()}
    return out


def cmd_stats(result: dict, bootstrap: dict | None = None) -> dict:
    """Recompute aggregates of an existing ``run`` or ``bench`` result."""
    bootstrap = bootstrap or (result.get("config") or {}).get("bootstrap") or {}
    command = result.get("command")
    body = result.get("result") or {}
    if command == "run":
        return {"source_command": "run", "aggregate": aggregate_runs(body["runs"], bootstrap)}
    if command == "bench":
        ceiling = body.get("ceiling")
        rows = []
        for row in body["rows"]:
            new = {"topology": row["topology"]}
            new.update(
                paired_comparison(
                    [r["phi"] for r in row["runs"]["a"]],
                    [r["phi"] for r in row["runs"]["b"]],
                    bootstrap,
                    ceiling,
                )
            )
            rows.append(new)
        return {"source_command": "bench", "rows": rows}
    raise ConfigError(f"cannot recompute statistics for a {command!r} result")


COMMANDS = {"run": cmd_run, "bench": cmd_bench, "sweep": cmd_sweep, "oracle": cmd_oracle}


def jsonable(obj):
    """Deep copy with numpy scalars/arrays turned into plain Python values."""
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    raise TypeError(f"cannot serialise {type(obj).__name__}")
