"""Problems the optimizer can run on: the ECS simulator and small synthetic tests.

A problem exposes its design box, a vectorized domain test, output names and
an ``evaluate`` method returning an :class:`Evaluation`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .doe import TruncatedDomain, ecs_domain
from .ecs.model import CONSTRAINT_NAMES, OBJECTIVE_NAMES, evaluate
from .ecs.parameters import DEFAULT_PARAMS, DESIGN_NAMES, FixedParameters


@dataclass(frozen=True)
class Evaluation:
    success: bool
    objectives: np.ndarray | None = None
    constraints: np.ndarray | None = None
    failure_reason: str = ""


class Problem:
    name = "problem"
    variable_names: tuple = ()
    objective_names: tuple = ()
    constraint_names: tuple = ()
    domain: TruncatedDomain

    @property
    def n_objectives(self) -> int:
        return len(self.objective_names)

    @property
    def n_constraints(self) -> int:
        return len(self.constraint_names)

    @property
    def dim(self) -> int:
        return len(self.variable_names)

    def evaluate(self, x) -> Evaluation:
        raise NotImplementedError


class EcsProblem(Problem):
    """Mass and entropy generation rate of the ECS under 15 constraints."""

    name = "ecs"
    variable_names = DESIGN_NAMES
    objective_names = OBJECTIVE_NAMES
    constraint_names = CONSTRAINT_NAMES

    def __init__(self, params: FixedParameters = DEFAULT_PARAMS):
        self.params = params
        self.domain = ecs_domain(params)

    def evaluate(self, x) -> Evaluation:
        out = evaluate(np.asarray(x, dtype=float), self.params)
        if not out.success:
            return Evaluation(False, failure_reason=str(out.reason))
        return Evaluation(True, out.objectives.copy(), out.constraints.copy())


class QuadraticPair(Problem):
    """``f1 = |x|^2``, ``f2 = |x - 1|^2`` on the unit square, unconstrained.

    The Pareto set is the diagonal segment from (0, 0) to (1, 1).
    """

    name = "synthetic:quadratic"
    variable_names = ("x1", "x2")
    objective_names = ("f1", "f2")
    constraint_names = ()

    def __init__(self):
        self.domain = TruncatedDomain(np.zeros(2), np.ones(2))

    @staticmethod
    def objectives(X):
        X = np.atleast_2d(X)
        return np.column_stack([np.sum(X ** 2, axis=1), np.sum((X - 1.0) ** 2, axis=1)])

    def evaluate(self, x) -> Evaluation:
        return Evaluation(True, self.objectives(x)[0], np.zeros(0))


class HiddenConstraintPair(Problem):
    """Quadratic pair with one constraint and a hidden failure region.

    Designs with ``x1 > 0.7`` and ``x2 < 0.3`` fail; the constraint
    ``0.5 - x1 - x2 <= 0`` cuts off the lower-left corner.  The domain excludes
    the disc of radius 0.1 around (0.5, 0.9).
    """

    name = "synthetic:hidden"
    variable_names = ("x1", "x2")
    objective_names = ("f1", "f2")
    constraint_names = ("c1",)

    def __init__(self):
        def mask(X):
            return np.sum((X - np.array([0.5, 0.9])) ** 2, axis=1) > 0.01
        self.domain = TruncatedDomain(np.zeros(2), np.ones(2), mask)

    @staticmethod
    def fails(X):
        X = np.atleast_2d(X)
        return (X[:, 0] > 0.7) & (X[:, 1] < 0.3)

    def evaluate(self, x) -> Evaluation:
        x = np.asarray(x, dtype=float)
        if not self.domain.contains(x)[0]:
            return Evaluation(False, failure_reason="DomainViolation")
        if self.fails(x)[0]:
            return Evaluation(False, failure_reason="HiddenFailure")
        f = QuadraticPair.objectives(x)[0]
        return Evaluation(True, f, np.array([0.5 - x[0] - x[1]]))


SYNTHETIC = {
    "quadratic": QuadraticPair,
    "hidden": HiddenConstraintPair,
}


def make_problem(selector: str, params: FixedParameters = DEFAULT_PARAMS) -> Problem:
    """``"ecs"`` or ``"synthetic:<name>"``."""
    if selector == "ecs":
        return EcsProblem(params)
    if selector.startswith("synthetic:"):
        name = selector.split(":", 1)[1]
        if name in SYNTHETIC:
            return SYNTHETIC[name]()
    known = ", ".join(["ecs"] + [f"synthetic:{k}" for k in SYNTHETIC])
    raise ValueError(f"unknown problem {selector!r} (known: {known})")
