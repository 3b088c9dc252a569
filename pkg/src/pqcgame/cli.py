"""Command-line driver: ``run``, ``bench``, ``sweep``, ``oracle`` and ``stats``.

Exit codes are 0 on success, 1 for usage or configuration errors and 2 when
a request exceeds what the dense simulator supports. Result files are
written atomically, so a failed command never leaves partial output.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
import tempfile
from pathlib import Path

import yaml

from . import __version__
from .dag import DagError
from .experiment import (
    COMMANDS,
    SCHEMA_VERSION,
    ConfigError,
    ExperimentConfig,
    cmd_stats,
    jsonable,
    load_config,
    set_field,
)
from .pauli import PauliParseError
from .simulator import CapabilityError

EXIT_OK, EXIT_USAGE, EXIT_CAPABILITY = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _yaml_value(text):
    return yaml.safe_load(text)


def _common(p):
    p.add_argument("-c", "--config", help="YAML or JSON experiment config")
    p.add_argument("-o", "--output", help="result file (JSON)")
    p.add_argument("--problem", help="maxcut:N, tfim:N[:g], h2 or pauli:PATH[:sense]")
    p.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any config field, e.g. search.inner_rate=0.1 (repeatable)",
    )


def _search_flags(p):
    p.add_argument("--topology", help="heavy_hex4, grid2x2, all_to_all(N), all_to_all or ring")
    p.add_argument("--seeds", type=_int_list, help="comma-separated rng seeds")
    p.add_argument("--weights", type=_float_list, help="w1,w2,w3,w4")
    p.add_argument("--outer-iters", type=int)
    p.add_argument("--inner-steps", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta-weighted", action="store_true", default=None)
    p.add_argument("--seed-strategy", type=_yaml_value, help="cold, qaoa_p1 or a YAML mapping")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pqcgame", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="single-method searches over a list of rng seeds")
    _common(p)
    _search_flags(p)
    p.add_argument("--method", choices=("nash", "baseline"))

    p = sub.add_parser("bench", help="paired comparison of two methods on several topologies")
    _common(p)
    _search_flags(p)
    p.add_argument("--topologies", type=lambda s: s.split(","), help="comma-separated topology names")
    p.add_argument("--ceiling", type=float, help="potential threshold counted as a ceiling hit")

    p = sub.add_parser("sweep", help="weight-corner sweep with Pareto filtering")
    _common(p)
    _search_flags(p)
    p.add_argument("--corners", type=_yaml_value, help="YAML list of [w1,w2,w3,w4] corners")

    p = sub.add_parser("oracle", help="exact ground energy by dense diagonalisation")
    _common(p)
    p.add_argument("--dag", help="circuit file; reports its energy and the gap to the ground state")
    p.add_argument("--dump-state", action="store_true", default=None)

    p = sub.add_parser("stats", help="recompute aggregates of an existing run or bench result")
    p.add_argument("result", help="result file written by run or bench")
    p.add_argument("-o", "--output", help="write the recomputed statistics here")
    return parser


_SEARCH_FLAGS = {
    "weights": "weights",
    "outer_iters": "outer_iters",
    "inner_steps": "inner_steps",
    "epsilon": "epsilon",
    "delta_weighted": "delta_weighted",
}
_TOP_FLAGS = (
    "output",
    "problem",
    "topology",
    "topologies",
    "seeds",
    "seed_strategy",
    "method",
    "ceiling",
    "corners",
    "dag",
    "dump_state",
)


def config_from_args(args) -> ExperimentConfig:
    """Config file first, then ``--set`` overrides, then dedicated flags."""
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    for item in args.overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        set_field(cfg, key.strip(), yaml.safe_load(value))
    for name in _TOP_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    for flag, key in _SEARCH_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            cfg.search[key] = value
    return cfg


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def envelope(command: str, config: dict | None, result: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "created_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "version": __version__,
        "config": config,
        "result": result,
    }


def dumps(doc: dict) -> str:
    return json.dumps(jsonable(doc), indent=2, allow_nan=False) + "\n"


def _summary_line(command: str, result: dict) -> str:
    if command == "oracle":
        line = f"ground energy: {result['energy']:.10f}"
        if "gap" in result:
            line += f"\ncircuit energy: {result['circuit_energy']:.10f} (gap {result['gap']:.3e})"
        return line
    if command == "run":
        agg = result["aggregate"]
        return (
            f"{agg['n_runs']} run(s): phi mean {agg['phi']['mean']:.6f}, "
            f"task mean {agg['task_value']['mean']:.6f}, converged {agg['converged']}"
        )
    if command == "bench":
        lines = []
        for row in result["rows"]:
            p = row["wilcoxon_p"]
            lines.append(
                f"{row['topology']}: dPhi {row['delta_phi']:+.4f}, "
                f"p {'n/a' if p is None else f'{p:.4f}'}"
            )
        return "\n".join(lines)
    if command == "sweep":
        return f"{len(result['points'])} point(s), {len(result['frontier'])} on the frontier"
    return ""


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "stats":
            try:
                source = json.loads(Path(args.result).read_text())
            except OSError as exc:
                raise ConfigError(f"cannot read {args.result}: {exc.strerror or exc}") from None
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{args.result} is not valid JSON: {exc}") from None
            result = cmd_stats(source)
            doc = envelope("stats", {"source": str(args.result)}, result)
            output = args.output
        else:
            cfg = config_from_args(args)
            result = COMMANDS[args.command](cfg)
            doc = envelope(args.command, cfg.echo(), result)
            output = cfg.output
            summary = _summary_line(args.command, result)
            if summary:
                print(summary)
        text = dumps(doc)
        if output:
            write_atomic(output, text)
        elif args.command == "stats":
            sys.stdout.write(text)
    except CapabilityError as exc:
        print(f"pqcgame: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (ConfigError, DagError, PauliParseError, ValueError, KeyError) as exc:
        print(f"pqcgame: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
