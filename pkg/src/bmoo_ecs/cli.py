"""Command-line interface: ``run``, ``resume``, ``plot`` and ``eval``.

Exit codes: 0 success, 2 invalid input (config, design vector, run directory),
3 I/O failure.  ``BMOO_ECS_LOG`` (error, info or debug) sets the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .ecs.model import evaluate
from .ecs.parameters import DesignVector
from .ecs.table2 import table2_point
from .evaluation_log import CorruptLog
from .optimizer import ConfigError, OptimizationResult, RunConfig, load_run, resume, run
from .plot import plot_log

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 2, 3

AXIS_LABELS = {"mass_kg": "Mass (kg)", "entropy_w_per_k": "Entropy generation rate (W/K)"}

_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _configure_logging():
    name = os.environ.get("BMOO_ECS_LOG", "error").lower()
    logging.basicConfig(level=_LEVELS.get(name, logging.ERROR), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if name not in _LEVELS:
        logging.getLogger(__name__).error("BMOO_ECS_LOG=%r not in %s", name, sorted(_LEVELS))


def _fail(code, message):
    print(f"error: {message}", file=sys.stderr)
    return code


def _summary(result: OptimizationResult, out_dir):
    c = result.counters()
    print(f"{c['n_evaluations']} evaluations, {c['n_feasible']} feasible, "
          f"{c['n_pareto']} Pareto-optimal; failures doe={c['n_failures_doe']} "
          f"bo={c['n_failures_bo']}; first feasible: {c['first_feasible_eval_id']}")
    if out_dir is not None:
        print(f"results in {out_dir}")


def cmd_run(args) -> int:
    try:
        data = json.loads(Path(args.config).read_text())
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        return _fail(EXIT_INVALID, f"config is not valid JSON: {exc}")
    try:
        config = RunConfig.from_dict(data)
        config = config.with_overrides(seed=args.seed, budget=args.budget, out_dir=args.out)
        if config.out_dir is None:
            raise ConfigError("out_dir: required (in the config or via --out)")
        problem = config.make_problem()
    except (ConfigError, ValueError) as exc:
        return _fail(EXIT_INVALID, f"invalid config: {exc}")
    try:
        result = run(config, problem)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    _summary(result, config.out_dir)
    return EXIT_OK


def cmd_resume(args) -> int:
    try:
        result = resume(args.run, budget=args.budget)
    except (ConfigError, CorruptLog) as exc:
        return _fail(EXIT_INVALID, f"cannot resume {args.run}: {exc}")
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    _summary(result, args.run)
    return EXIT_OK


def cmd_plot(args) -> int:
    try:
        _, _, log_ = load_run(args.run)
    except (ConfigError, CorruptLog) as exc:
        return _fail(EXIT_INVALID, f"corrupt run {args.run}: {exc}")
    except OSError as exc:
        return _fail(EXIT_INVALID, f"missing run {args.run}: {exc}")
    names = log_.objective_names
    try:
        counts = plot_log(log_, args.out, x_label=AXIS_LABELS.get(names[0], names[0]),
                          y_label=AXIS_LABELS.get(names[1], names[1]))
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    print(json.dumps(counts))
    return EXIT_OK


def _load_design(text) -> DesignVector:
    path = Path(text)
    if not text.lstrip().startswith("{") and path.is_file():
        text = path.read_text()
    data = json.loads(text)
    if not isinstance(data, dict):
        raise ValueError("expected a JSON object of named variables")
    for key, value in data.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"{key}: expected a number")
    return DesignVector.from_mapping(data)


def cmd_eval(args) -> int:
    try:
        if args.table2_point is not None:
            x = table2_point(args.table2_point)
        else:
            x = _load_design(args.x)
    except (ValueError, KeyError, TypeError) as exc:
        return _fail(EXIT_INVALID, f"malformed design vector: {exc}")
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    out = evaluate(x).to_dict()
    out["design"] = x.to_dict()
    print(json.dumps(out, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bmoo-ecs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an optimization")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--budget", type=int, help="override the evaluation budget")
    p.add_argument("--out", help="override the output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("resume", help="continue an interrupted run")
    p.add_argument("--run", required=True, help="run directory")
    p.add_argument("--budget", type=int, help="new (larger) evaluation budget")
    p.set_defaults(func=cmd_resume)

    p = sub.add_parser("plot", help="SVG scatter of a run")
    p.add_argument("--run", required=True, help="run directory")
    p.add_argument("--out", required=True, help="output .svg file")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("eval", help="evaluate one design")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--x", help="JSON object (or file) with the 18 named variables")
    group.add_argument("--table2-point", type=int, choices=range(1, 8), metavar="K",
                       help="built-in reference design K (1-7)")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
