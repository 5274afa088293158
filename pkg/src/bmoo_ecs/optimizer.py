"""The sequential optimization loop.

An initial space-filling design is evaluated, then every iteration refits the
surrogates on the successful evaluations, refits the observability classifier
on all of them, refreshes the reference set, moves the particle population and
evaluates the best particle.  Simulator failures are recorded, never raised.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .acquisition import Criterion, McReferenceSet, ObservabilityModel, ObservedFront, refresh_box
from .doe import DoeConfig, maximin_design, sample_domain
from .ecs.parameters import DEFAULT_PARAMS, FixedParameters
from .evaluation_log import CorruptLog, CsvAppender, EvaluationLog, EvaluationRecord
from .problems import Problem, make_problem
from .smc import SMCConfig, TargetDensity, criterion_floor, initialize, propose_next, step
from .surrogate import GPConfig, fit_surrogates

log = logging.getLogger(__name__)

# substreams of the master seed; each is further keyed by eval_id
STREAMS = {"doe": 0, "gp": 1, "smc": 2, "refs": 3}

EVALUATIONS_CSV = "evaluations.csv"
CONFIG_JSON = "config.json"
RESULT_JSON = "result.json"
PARETO_CSV = "pareto.csv"


class ConfigError(ValueError):
    pass


def substream(seed, stream, key=0) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(STREAMS[stream], int(key)))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class AcquisitionConfig:
    n_refs: int = 4096
    k_neighbors: int = 5
    box_pad: float = 0.2
    violation_percentile: float = 95.0
    violation_floor: float = 1.0

    def __post_init__(self):
        if self.n_refs < 1000:
            raise ValueError("n_refs must be >= 1000")
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")


_SUBCONFIGS = {"gp": GPConfig, "smc": SMCConfig, "acquisition": AcquisitionConfig}


def _build_subconfig(name, cls, values):
    if isinstance(values, cls):
        return values
    if not isinstance(values, dict):
        raise ConfigError(f"{name}: expected an object")
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in values.items():
        if key not in known:
            raise ConfigError(f"unknown key {name}.{key}")
        default = getattr(cls(), key)
        if isinstance(default, tuple):
            if not isinstance(value, (list, tuple)) or len(value) != len(default):
                raise ConfigError(f"{name}.{key}: expected a list of {len(default)} numbers")
            value = tuple(value)
        elif isinstance(default, int) and not isinstance(default, bool):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{name}.{key}: expected an integer")
        elif isinstance(default, float):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{name}.{key}: expected a number")
            value = float(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from None


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run.

    ``params`` holds overrides of the fixed ECS parameters.  Hyperparameters
    are re-optimized at every iteration while there are at most
    ``full_refit_until`` successful observations, then every ``refit_period``
    evaluations; in between the GPs are reconditioned with frozen values.
    """

    problem: str = "ecs"
    budget: int = 500
    n_init: int = 90
    seed: int = 0
    out_dir: str | None = None
    params: dict = field(default_factory=dict)
    gp: GPConfig = GPConfig()
    smc: SMCConfig = SMCConfig()
    acquisition: AcquisitionConfig = AcquisitionConfig()
    doe_oversample: int = 50
    full_refit_until: int = 150
    refit_period: int = 5
    record_wall_time: bool = False

    def __post_init__(self):
        if self.budget < 1:
            raise ConfigError("budget must be >= 1")
        if self.n_init < 1:
            raise ConfigError("n_init must be >= 1")
        if self.n_init > self.budget:
            raise ConfigError("n_init must not exceed budget")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64):
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.refit_period < 1:
            raise ConfigError("refit_period must be >= 1")

    def fixed_parameters(self) -> FixedParameters:
        if not self.params:
            return DEFAULT_PARAMS
        merged = DEFAULT_PARAMS.to_dict()
        merged.pop("rho_air", None)
        merged.update(self.params)
        try:
            return FixedParameters.from_dict(merged)
        except KeyError as exc:
            raise ConfigError(f"unknown key params.{exc.args[0]}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"params: {exc}") from None

    def make_problem(self) -> Problem:
        try:
            return make_problem(self.problem, self.fixed_parameters())
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            out[f.name] = dataclasses.asdict(value) if f.name in _SUBCONFIGS else value
        for name in _SUBCONFIGS:
            out[name] = {k: list(v) if isinstance(v, tuple) else v for k, v in out[name].items()}
        out["params"] = dict(self.params)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in data.items():
            if key not in known:
                raise ConfigError(f"unknown key {key}")
            if key in _SUBCONFIGS:
                value = _build_subconfig(key, _SUBCONFIGS[key], value)
            elif key in ("budget", "n_init", "seed", "doe_oversample", "full_refit_until",
                         "refit_period"):
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ConfigError(f"{key}: expected an integer")
            elif key == "problem" and not isinstance(value, str):
                raise ConfigError("problem: expected a string")
            elif key == "out_dir" and value is not None and not isinstance(value, str):
                raise ConfigError("out_dir: expected a path string")
            elif key == "params" and not isinstance(value, dict):
                raise ConfigError("params: expected an object")
            elif key == "record_wall_time" and not isinstance(value, bool):
                raise ConfigError("record_wall_time: expected true or false")
            kwargs[key] = value
        config = cls(**kwargs)
        config.fixed_parameters()  # type-check overrides early
        return config

    def with_overrides(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


@dataclass
class OptimizationResult:
    log: EvaluationLog
    pareto_ids: list
    n_failures_doe: int
    n_failures_bo: int
    first_feasible_eval_id: int | None
    n_feasible: int
    config: RunConfig | None = None

    @classmethod
    def from_log(cls, log_: EvaluationLog, config=None) -> "OptimizationResult":
        n_feasible = sum(1 for r in log_ if r.feasible)
        return cls(log_, log_.pareto_ids(), log_.n_failures("doe"), log_.n_failures("bo"),
                   log_.first_feasible_eval_id(), n_feasible, config)

    @property
    def n_evaluations(self) -> int:
        return len(self.log)

    @property
    def pareto_records(self):
        ids = set(self.pareto_ids)
        return [r for r in self.log if r.eval_id in ids]

    def counters(self) -> dict:
        return {
            "n_evaluations": self.n_evaluations,
            "n_failures_doe": self.n_failures_doe,
            "n_failures_bo": self.n_failures_bo,
            "n_feasible": self.n_feasible,
            "first_feasible_eval_id": self.first_feasible_eval_id,
            "n_pareto": len(self.pareto_ids),
        }

    def to_dict(self) -> dict:
        return {
            "counters": self.counters(),
            "pareto_eval_ids": list(self.pareto_ids),
            "config": self.config.to_dict() if self.config is not None else None,
            "versions": {
                "bmoo_ecs": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": platform.python_version(),
            },
        }


@dataclass
class LoopState:
    """In-memory state carried between iterations (not persisted)."""

    surrogates: object = None
    particles: object = None


@dataclass(frozen=True)
class IterationModel:
    """The criterion and its ingredients for one iteration."""

    criterion: Criterion
    density: TargetDensity
    surrogates: object
    refs: McReferenceSet


def _needs_full_refit(config: RunConfig, previous, n_success, eval_id) -> bool:
    if previous is None or n_success <= config.full_refit_until:
        return True
    floor = math.log(config.gp.variance_bounds[0])
    if any(m.log_variance < floor for m in previous.models):
        return True  # a previously constant output has started to vary
    return eval_id % config.refit_period == 0


def build_iteration_model(problem: Problem, log_: EvaluationLog, config: RunConfig,
                          eval_id: int, previous_surrogates=None) -> IterationModel | None:
    """Criterion for choosing evaluation ``eval_id`` given the log so far.

    Returns None when fewer than two distinct successes are available.
    """
    X, F, C, _ = log_.successes()
    if np.unique(X, axis=0).shape[0] < 2:
        return None
    p = problem.n_objectives
    Y = np.hstack([F, C])
    full = _needs_full_refit(config, previous_surrogates, X.shape[0], eval_id)
    surrogates = fit_surrogates(
        X, Y, config.gp, bounds=(problem.domain.lower, problem.domain.upper),
        rng=substream(config.seed, "gp", eval_id), previous=previous_surrogates,
        optimize_hyperparameters=full)
    acq = config.acquisition
    observability = ObservabilityModel(log_.X, log_.success_mask, problem.domain.lower,
                                       problem.domain.upper, k=acq.k_neighbors)
    box = refresh_box(F, C, p, pad=acq.box_pad, percentile=acq.violation_percentile,
                      floor=acq.violation_floor)
    front = ObservedFront.from_observations(F, C, box)
    refs = McReferenceSet.sample(box, front, substream(config.seed, "refs", eval_id),
                                 n_points=acq.n_refs)
    criterion = Criterion(surrogates, refs, p, observability)
    density = TargetDensity(criterion, problem.domain, criterion_floor(refs))
    return IterationModel(criterion, density, surrogates, refs)


def _evaluate(problem, x, eval_id, phase, record_wall_time) -> EvaluationRecord:
    t0 = time.perf_counter()
    out = problem.evaluate(x)
    wall = (time.perf_counter() - t0) * 1e3 if record_wall_time else None
    return EvaluationRecord(eval_id, phase, np.asarray(x, dtype=float).copy(), out.success,
                            out.objectives, out.constraints, out.failure_reason, wall)


def _propose(problem, log_, config, state: LoopState, eval_id):
    smc_rng = substream(config.seed, "smc", eval_id)
    model = build_iteration_model(problem, log_, config, eval_id, state.surrogates)
    if model is None:
        log.info("eval %d: fewer than two successes, sampling uniformly", eval_id)
        return sample_domain(problem.domain, 1, smc_rng)[0]
    state.surrogates = model.surrogates
    if state.particles is None:
        state.particles = initialize(problem.domain, None, smc_rng, config.smc)
    state.particles = step(state.particles, model.density, problem.domain, smc_rng, config.smc)
    x = propose_next(state.particles)
    log.debug("eval %d: criterion max %.3g, acceptance %.2f, refs %d", eval_id,
              float(np.max(state.particles.ei * state.particles.p_obs)),
              state.particles.acceptance, model.refs.size)
    return x


def _write_json(path: Path, data):
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    tmp.replace(path)


def _finalize(out_dir, result: OptimizationResult):
    if out_dir is None:
        return
    out_dir = Path(out_dir)
    _write_json(out_dir / RESULT_JSON, result.to_dict())
    (out_dir / PARETO_CSV).write_text(result.log.to_csv(result.pareto_records))


def _loop(config: RunConfig, problem: Problem, log_: EvaluationLog, appender, stop_after):
    limit = config.budget if stop_after is None else min(config.budget, stop_after)
    n_doe = min(config.n_init, config.budget)
    if len(log_) < n_doe:
        design = maximin_design(DoeConfig(n_doe, config.doe_oversample, config.seed),
                                problem.domain, rng=substream(config.seed, "doe", 0))
        for x in design[len(log_):min(n_doe, limit)]:
            record = _evaluate(problem, x, len(log_) + 1, "doe", config.record_wall_time)
            log_.append(record)
            if appender is not None:
                appender.write(record)
        log.info("design of experiments: %d evaluations, %d failures",
                 len(log_), log_.n_failures("doe"))
    state = LoopState()
    while len(log_) < limit:
        eval_id = len(log_) + 1
        x = _propose(problem, log_, config, state, eval_id)
        record = _evaluate(problem, x, eval_id, "bo", config.record_wall_time)
        log_.append(record)
        if appender is not None:
            appender.write(record)
        log.info("eval %d: %s%s", eval_id, record.status,
                 " (feasible)" if record.feasible else "")
    result = OptimizationResult.from_log(log_, config)
    if len(log_) >= config.budget:
        _finalize(config.out_dir, result)
    return result


def run(config: RunConfig, problem: Problem | None = None, stop_after=None) -> OptimizationResult:
    """Run an optimization from scratch.

    ``stop_after`` ends the run early after that many evaluations (as an
    interruption would); :func:`resume` can continue it.
    """
    problem = config.make_problem() if problem is None else problem
    log_ = EvaluationLog.for_problem(problem)
    if config.out_dir is None:
        return _loop(config, problem, log_, None, stop_after)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / CONFIG_JSON, config.to_dict())
    for stale in (RESULT_JSON, PARETO_CSV):
        (out_dir / stale).unlink(missing_ok=True)
    with CsvAppender(out_dir / EVALUATIONS_CSV, log_, fresh=True) as appender:
        return _loop(config, problem, log_, appender, stop_after)


def load_run(log_dir, problem: Problem | None = None):
    """``(config, problem, log)`` of a run directory."""
    log_dir = Path(log_dir)
    try:
        data = json.loads((log_dir / CONFIG_JSON).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{CONFIG_JSON}: {exc}") from None
    config = RunConfig.from_dict(data)
    problem = config.make_problem() if problem is None else problem
    log_ = EvaluationLog.read_csv(log_dir / EVALUATIONS_CSV, problem.variable_names,
                                  problem.objective_names, problem.constraint_names)
    return config, problem, log_


def resume(log_dir, budget=None, problem: Problem | None = None,
           stop_after=None) -> OptimizationResult:
    """Continue an interrupted run (optionally to a larger budget).

    Raises :class:`CorruptLog` when the evaluation log cannot be parsed.
    """
    log_dir = Path(log_dir)
    config, problem, log_ = load_run(log_dir, problem)
    config = dataclasses.replace(config, out_dir=str(log_dir))
    if budget is not None and budget != config.budget:
        config = dataclasses.replace(config, budget=budget)
        _write_json(log_dir / CONFIG_JSON, config.to_dict())
    if len(log_) > config.budget:
        raise ConfigError(f"log holds {len(log_)} records, more than the budget {config.budget}")
    if len(log_) == config.budget and (log_dir / RESULT_JSON).exists():
        return OptimizationResult.from_log(log_, config)
    with CsvAppender(log_dir / EVALUATIONS_CSV, log_, fresh=False) as appender:
        return _loop(config, problem, log_, appender, stop_after)


__all__ = [
    "AcquisitionConfig", "ConfigError", "CorruptLog", "IterationModel", "OptimizationResult",
    "RunConfig", "build_iteration_model", "load_run", "resume", "run", "substream",
]
