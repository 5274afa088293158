"""Pareto domination, feasibility and the extended (objective + violation)
domination used by the acquisition criterion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OutcomePoint:
    objectives: np.ndarray
    constraints: np.ndarray

    @property
    def feasible(self) -> bool:
        return bool(np.all(self.constraints <= 0))


@dataclass(frozen=True)
class ExtendedBox:
    """Bounding box of the extended space.

    The constraint block lives in the positive-part image, so its lower
    bound is zero.
    """

    obj_lower: np.ndarray
    obj_upper: np.ndarray
    constraint_upper: np.ndarray

    def __post_init__(self):
        for name in ("obj_lower", "obj_upper", "constraint_upper"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if np.any(self.obj_lower >= self.obj_upper):
            raise ValueError("obj_lower must be < obj_upper componentwise")
        if np.any(self.constraint_upper <= 0):
            raise ValueError("constraint_upper must be positive")

    @property
    def objective_volume(self) -> float:
        return float(np.prod(self.obj_upper - self.obj_lower))

    @property
    def violation_volume(self) -> float:
        return float(np.prod(self.constraint_upper))


def dominates(y, y2) -> bool:
    """Pareto domination for minimization: ``y <= y2`` and ``y != y2``."""
    y, y2 = np.asarray(y, dtype=float), np.asarray(y2, dtype=float)
    if y.shape != y2.shape:
        raise ValueError(f"length mismatch: {y.shape} vs {y2.shape}")
    return bool(np.all(y <= y2) and np.any(y < y2))


def feasibility(constraints) -> np.ndarray:
    """Row-wise feasibility of a ``(n, q)`` constraint array."""
    constraints = np.asarray(constraints, dtype=float)
    if constraints.ndim == 1:
        constraints = constraints[:, None] if constraints.size else constraints.reshape(0, 0)
    if constraints.shape[1] == 0:
        return np.ones(constraints.shape[0], dtype=bool)
    return np.all(constraints <= 0, axis=1)


def psi_map(point: OutcomePoint, box: ExtendedBox) -> np.ndarray:
    """Image of a point in the extended space.

    Feasible points keep their objectives and map to a zero violation;
    infeasible points saturate the objective block at ``obj_upper``.
    """
    violation = np.minimum(np.maximum(point.constraints, 0.0), box.constraint_upper)
    objectives = point.objectives if point.feasible else box.obj_upper
    return np.concatenate([np.asarray(objectives, dtype=float), violation])


def non_dominated_mask(objectives) -> np.ndarray:
    """Mask of rows not dominated by any other row (duplicates are kept)."""
    Y = np.asarray(objectives, dtype=float)
    n = Y.shape[0]
    keep = np.ones(n, dtype=bool)
    order = np.lexsort(Y.T[::-1])
    for rank, i in enumerate(order):
        if not keep[i]:
            continue
        rest = order[rank + 1:]
        rest = rest[keep[rest]]
        dominated = np.all(Y[i] <= Y[rest], axis=1) & np.any(Y[i] < Y[rest], axis=1)
        keep[rest[dominated]] = False
    return keep


def pareto_front(points) -> np.ndarray:
    """Indices of the feasible points not dominated by another feasible point."""
    if len(points) == 0:
        return np.array([], dtype=int)
    feasible = np.array([p.feasible for p in points])
    idx = np.flatnonzero(feasible)
    if idx.size == 0:
        return idx
    Y = np.array([points[i].objectives for i in idx], dtype=float)
    return idx[non_dominated_mask(Y)]


def pareto_front_arrays(objectives, constraints) -> np.ndarray:
    """Same as :func:`pareto_front` for stacked arrays."""
    objectives = np.asarray(objectives, dtype=float)
    idx = np.flatnonzero(feasibility(constraints))
    if idx.size == 0:
        return idx
    return idx[non_dominated_mask(objectives[idx])]


def weakly_dominated(refs, front) -> np.ndarray:
    """Mask of reference rows ``z`` with some front row ``f <= z``."""
    refs = np.asarray(refs, dtype=float)
    front = np.asarray(front, dtype=float)
    out = np.zeros(refs.shape[0], dtype=bool)
    if front.size == 0 or refs.size == 0:
        return out
    for start in range(0, front.shape[0], 256):
        block = front[start:start + 256]
        out |= np.any(np.all(block[None, :, :] <= refs[:, None, :], axis=2), axis=1)
    return out


def hypervolume_2d(objectives, reference) -> float:
    """Area dominated by a set of 2-D points and bounded by ``reference``."""
    Y = np.asarray(objectives, dtype=float).reshape(-1, 2)
    ref = np.asarray(reference, dtype=float)
    Y = Y[np.all(Y < ref, axis=1)]
    if Y.size == 0:
        return 0.0
    Y = Y[non_dominated_mask(Y)]
    Y = Y[np.argsort(Y[:, 0])]
    widths = np.diff(np.append(Y[:, 0], ref[0]))
    return float(np.sum(widths * (ref[1] - Y[:, 1])))
