"""Append-only record of simulator calls and its CSV form.

Floats are written with 17 significant digits so that a parsed log holds
bit-identical values.  Every record ends with a newline; a final line without
one is treated as truncated.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass

import numpy as np

from .pareto import feasibility, pareto_front_arrays

PHASES = ("doe", "bo")
STATUSES = ("success", "failure")


class CorruptLog(ValueError):
    """A log line that cannot be parsed; ``line`` is 1-based (header is line 1)."""

    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


def format_float(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return format(float(value), ".17g")


def _parse_float(text):
    return float("nan") if text == "" else float(text)


@dataclass(frozen=True)
class EvaluationRecord:
    eval_id: int
    phase: str
    x: np.ndarray
    success: bool
    objectives: np.ndarray | None = None
    constraints: np.ndarray | None = None
    failure_reason: str = ""
    wall_ms: float | None = None

    @property
    def status(self) -> str:
        return "success" if self.success else "failure"

    @property
    def feasible(self) -> bool:
        return self.success and bool(np.all(self.constraints <= 0))


def csv_header(variable_names, objective_names, constraint_names):
    return (["eval_id", "phase", *variable_names, "status", "failure_reason",
             *objective_names, *constraint_names, "wall_ms"])


class EvaluationLog:
    """Ordered evaluation records with dense ids starting at 1."""

    def __init__(self, variable_names, objective_names, constraint_names, records=()):
        self.variable_names = tuple(variable_names)
        self.objective_names = tuple(objective_names)
        self.constraint_names = tuple(constraint_names)
        self.records: list[EvaluationRecord] = []
        for r in records:
            self.append(r)

    @classmethod
    def for_problem(cls, problem):
        return cls(problem.variable_names, problem.objective_names, problem.constraint_names)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def header(self):
        return csv_header(self.variable_names, self.objective_names, self.constraint_names)

    def append(self, record: EvaluationRecord):
        if record.eval_id != len(self.records) + 1:
            raise ValueError(f"eval_id {record.eval_id} breaks the dense sequence "
                             f"(expected {len(self.records) + 1})")
        if record.phase not in PHASES:
            raise ValueError(f"unknown phase {record.phase!r}")
        self.records.append(record)

    # --- array views -------------------------------------------------
    @property
    def X(self):
        return np.array([r.x for r in self.records]).reshape(-1, len(self.variable_names))

    @property
    def success_mask(self):
        return np.array([r.success for r in self.records], dtype=bool)

    def successes(self):
        """``(X, objectives, constraints, eval_ids)`` of the successful records."""
        ok = [r for r in self.records if r.success]
        p, q = len(self.objective_names), len(self.constraint_names)
        X = np.array([r.x for r in ok]).reshape(-1, len(self.variable_names))
        F = np.array([r.objectives for r in ok]).reshape(len(ok), p)
        C = np.array([r.constraints for r in ok]).reshape(len(ok), q)
        ids = np.array([r.eval_id for r in ok], dtype=int)
        return X, F, C, ids

    def pareto_ids(self):
        """Eval ids of the feasible successes not dominated by another one."""
        _, F, C, ids = self.successes()
        return [int(i) for i in ids[pareto_front_arrays(F, C)]]

    def first_feasible_eval_id(self):
        _, _, C, ids = self.successes()
        feas = feasibility(C)
        return int(ids[feas][0]) if np.any(feas) else None

    def n_failures(self, phase):
        return sum(1 for r in self.records if r.phase == phase and not r.success)

    # --- CSV ---------------------------------------------------------
    def format_record(self, r: EvaluationRecord) -> str:
        p, q = len(self.objective_names), len(self.constraint_names)
        objectives = r.objectives if r.success else [None] * p
        constraints = r.constraints if r.success else [None] * q
        row = [str(r.eval_id), r.phase, *map(format_float, r.x), r.status, r.failure_reason,
               *map(format_float, objectives), *map(format_float, constraints),
               format_float(r.wall_ms)]
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerow(row)
        return buf.getvalue()

    def format_header(self) -> str:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerow(self.header)
        return buf.getvalue()

    def to_csv(self, records=None) -> str:
        records = self.records if records is None else records
        return self.format_header() + "".join(self.format_record(r) for r in records)

    def parse_row(self, fields, line) -> EvaluationRecord:
        d, p, q = len(self.variable_names), len(self.objective_names), len(self.constraint_names)
        if len(fields) != len(self.header):
            raise CorruptLog(line, f"expected {len(self.header)} fields, found {len(fields)}")
        try:
            eval_id = int(fields[0])
            phase = fields[1]
            x = np.array([float(v) for v in fields[2:2 + d]])
            status = fields[2 + d]
            reason = fields[3 + d]
            outputs = [_parse_float(v) for v in fields[4 + d:4 + d + p + q]]
            wall = _parse_float(fields[-1])
        except ValueError as exc:
            raise CorruptLog(line, str(exc)) from None
        if phase not in PHASES:
            raise CorruptLog(line, f"unknown phase {phase!r}")
        if status not in STATUSES:
            raise CorruptLog(line, f"unknown status {status!r}")
        success = status == "success"
        if success:
            if any(math.isnan(v) for v in outputs):
                raise CorruptLog(line, "successful record with missing outputs")
            objectives, constraints = np.array(outputs[:p]), np.array(outputs[p:])
        else:
            objectives = constraints = None
        return EvaluationRecord(eval_id, phase, x, success, objectives, constraints, reason,
                                None if math.isnan(wall) else wall)

    @classmethod
    def read_csv(cls, path, variable_names, objective_names, constraint_names):
        log = cls(variable_names, objective_names, constraint_names)
        with open(path, newline="") as fh:
            text = fh.read()
        lines = text.splitlines(keepends=True)
        if not lines:
            raise CorruptLog(1, "empty file")
        for number, raw in enumerate(lines, start=1):
            if not raw.endswith("\n"):
                raise CorruptLog(number, "truncated record (no line terminator)")
            fields = next(csv.reader([raw.rstrip("\r\n")]))
            if number == 1:
                if fields != log.header:
                    raise CorruptLog(1, "header does not match the problem")
                continue
            record = log.parse_row(fields, number)
            try:
                log.append(record)
            except ValueError as exc:
                raise CorruptLog(number, str(exc)) from None
        return log


class CsvAppender:
    """Writes records as they arrive, flushing after each one."""

    def __init__(self, path, log: EvaluationLog, fresh: bool):
        self.path = path
        self.log = log
        mode = "w" if fresh else "a"
        self._fh = open(path, mode, newline="")
        if fresh:
            self._fh.write(log.format_header())
            self._fh.flush()

    def write(self, record: EvaluationRecord):
        self._fh.write(self.log.format_record(record))
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
