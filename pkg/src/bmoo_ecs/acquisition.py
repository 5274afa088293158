"""Extended expected improvement weighted by a probability of observability.

Observations are compared in the extended space (objectives, positive part
of the constraints): a feasible observation ``f`` dominates the objective
slab above ``f`` and the whole violation region; an infeasible observation
with violation ``v`` dominates the violation orthant above ``v``.  The
criterion is the expected volume of the currently non-dominated region that
a new observation would dominate, estimated with Monte Carlo reference
points drawn uniformly in that region.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from scipy.stats import qmc

from .pareto import ExtendedBox, feasibility, non_dominated_mask, weakly_dominated

# budget of elements per (candidates x refs x outputs) block
_BLOCK = 2_000_000


@dataclass(frozen=True)
class ObservedFront:
    """Extended-space summary of the successful observations so far."""

    feasible_objectives: np.ndarray  # (k, p), non-dominated only
    violations: np.ndarray  # (l, q), positive parts of infeasible points, clipped
    n_objectives: int
    n_constraints: int

    @property
    def any_feasible(self) -> bool:
        return self.feasible_objectives.shape[0] > 0

    @classmethod
    def from_observations(cls, objectives, constraints, box: ExtendedBox):
        objectives = np.atleast_2d(np.asarray(objectives, dtype=float))
        p = box.obj_lower.size
        q = box.constraint_upper.size
        constraints = np.asarray(constraints, dtype=float).reshape(objectives.shape[0], q)
        feas = feasibility(constraints)
        fobj = objectives[feas].reshape(-1, p)
        if fobj.shape[0]:
            fobj = fobj[non_dominated_mask(fobj)]
        viol = np.minimum(np.maximum(constraints[~feas], 0.0), box.constraint_upper)
        if viol.shape[0]:
            viol = viol[non_dominated_mask(viol)]
        return cls(fobj, viol, p, q)


def refresh_box(objectives, constraints, n_objectives, pad=0.2, percentile=95.0,
                floor=1.0, obj_bounds=None) -> ExtendedBox:
    """Extended box from the successful observations.

    Objective bounds span the feasible objectives padded by ``pad`` of their
    range (``obj_bounds`` overrides them); the violation bound of each
    constraint is the given percentile of its observed positive part, floored.
    """
    objectives = np.asarray(objectives, dtype=float).reshape(-1, n_objectives)
    constraints = np.asarray(constraints, dtype=float)
    q = constraints.shape[1] if constraints.ndim == 2 else 0
    constraints = constraints.reshape(objectives.shape[0], q)
    if q and constraints.shape[0]:
        upper = np.percentile(np.maximum(constraints, 0.0), percentile, axis=0)
        upper = np.maximum(upper, floor)
    else:
        upper = np.full(q, floor)
    if obj_bounds is not None:
        lo, hi = (np.asarray(b, dtype=float) for b in obj_bounds)
    else:
        feas = feasibility(constraints)
        if np.any(feas):
            f = objectives[feas]
            lo, hi = f.min(axis=0), f.max(axis=0)
            span = hi - lo
            span = np.where(span > 0, span, np.maximum(np.abs(hi), 1.0))
            lo, hi = lo - pad * span, hi + pad * span
        else:
            # placeholder; the objective block is inactive without feasible data
            lo, hi = np.zeros(n_objectives), np.ones(n_objectives)
    return ExtendedBox(lo, hi, upper)


@dataclass(frozen=True)
class McReferenceSet:
    """Monte Carlo points in the non-dominated part of the extended box.

    ``objective_points`` sample the feasible slab, ``violation_points`` the
    violation region; every point carries the volume ``*_weight`` it
    represents, so sums of probabilities estimate expected volumes.
    """

    objective_points: np.ndarray
    objective_weight: float
    violation_points: np.ndarray
    violation_weight: float
    objective_active: bool

    @property
    def size(self) -> int:
        return self.objective_points.shape[0] + self.violation_points.shape[0]

    @classmethod
    def sample(cls, box: ExtendedBox, front: ObservedFront | None, rng,
               n_points=4096, max_batches=32):
        p = box.obj_lower.size
        q = box.constraint_upper.size
        if front is None:
            front = ObservedFront(np.empty((0, p)), np.empty((0, q)), p, q)
        objective_active = front.any_feasible or q == 0

        def draw(lower, upper, volume, dominated):
            # scrambled Sobol batches: unbiased, lower variance than iid draws
            # batches are powers of two, which keeps the Sobol balance properties
            sobol = qmc.Sobol(lower.size, scramble=True, seed=rng)
            batch = 1 << max(0, int(n_points - 1).bit_length())
            kept, draws = [], 0
            for _ in range(max_batches):
                z = lower + (upper - lower) * sobol.random(batch)
                draws += batch
                kept.append(z[~dominated(z)])
                if sum(k.shape[0] for k in kept) >= n_points:
                    break
            return np.concatenate(kept), volume / draws

        if objective_active:
            obj, w_obj = draw(box.obj_lower, box.obj_upper, box.objective_volume,
                              lambda z: weakly_dominated(z, front.feasible_objectives))
        else:
            obj, w_obj = np.empty((0, p)), 0.0
        if q and not front.any_feasible:
            viol, w_viol = draw(np.zeros(q), box.constraint_upper, box.violation_volume,
                                lambda z: weakly_dominated(z, front.violations))
        else:
            viol, w_viol = np.empty((0, q)), 0.0
        return cls(obj, w_obj, viol, w_viol, objective_active)


def _cdf(z, mu, sigma):
    """P(Y <= z) for Y ~ N(mu, sigma^2), exact step when sigma == 0."""
    if np.all(sigma > 0):
        return ndtr((z - mu) * (1.0 / sigma))
    with np.errstate(divide="ignore", invalid="ignore"):
        u = (z - mu) / sigma
    return np.where(sigma > 0, ndtr(u), (z >= mu).astype(float))


def improvement_probabilities(means, stds, refs: McReferenceSet, n_objectives):
    """Expected dominated volume of non-dominated reference mass.

    ``means``/``stds`` have shape ``(n, p + q)``; returns ``(n,)``.
    """
    means = np.atleast_2d(means)
    stds = np.atleast_2d(stds)
    n = means.shape[0]
    p = n_objectives
    mu_o, sd_o = means[:, :p], stds[:, :p]
    mu_c, sd_c = means[:, p:], stds[:, p:]
    total = np.zeros(n)

    if refs.objective_points.shape[0]:
        feasible_prob = np.prod(_cdf(0.0, mu_c, sd_c), axis=1) if mu_c.shape[1] else np.ones(n)
        Z = refs.objective_points
        step = max(1, _BLOCK // max(1, Z.shape[0] * p))
        for s in range(0, n, step):
            sl = slice(s, s + step)
            probs = np.prod(_cdf(Z[None, :, :], mu_o[sl, None, :], sd_o[sl, None, :]), axis=2)
            total[sl] += refs.objective_weight * probs.sum(axis=1) * feasible_prob[sl]

    if refs.violation_points.shape[0]:
        Z = refs.violation_points
        # constraints certainly satisfied everywhere in the batch contribute a factor 1
        lower = _cdf(0.0, mu_c, sd_c)
        active = np.flatnonzero(np.any(lower < 1.0, axis=0))
        if active.size == 0:
            total += refs.violation_weight * Z.shape[0]
        else:
            Z = Z[:, active]
            mu_a, sd_a = mu_c[:, active], sd_c[:, active]
            step = max(1, _BLOCK // max(1, Z.shape[0] * active.size))
            for s in range(0, n, step):
                sl = slice(s, s + step)
                probs = np.prod(_cdf(Z[None, :, :], mu_a[sl, None, :], sd_a[sl, None, :]), axis=2)
                total[sl] += refs.violation_weight * probs.sum(axis=1)
    return total


class ObservabilityModel:
    """k-nearest-neighbour estimate of the probability that a simulation succeeds.

    Distances are Euclidean in the unit box; ties keep insertion order.
    """

    def __init__(self, X, labels, lower, upper, k=5):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        X = np.asarray(X, dtype=float).reshape(-1, self.lower.size)
        self.X = (X - self.lower) / (self.upper - self.lower)
        self.labels = np.asarray(labels, dtype=bool)
        self.k = k

    def predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n = self.X.shape[0]
        if n == 0:
            return np.ones(X.shape[0])
        Xn = (X - self.lower) / (self.upper - self.lower)
        d2 = np.sum((Xn[:, None, :] - self.X[None, :, :]) ** 2, axis=2)
        k = min(self.k, n)
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        return self.labels[nearest].sum(axis=1) / k


def p_observable(model: ObservabilityModel, x) -> float:
    return float(model.predict(x)[0])


class Criterion:
    """Everything needed to score candidates during one iteration.

    Parameters
    ----------
    surrogates : SurrogateSet
        GPs for the p objectives followed by the q constraints.
    refs : McReferenceSet
    observability : ObservabilityModel, optional
        Omitted means every design is assumed observable.
    """

    def __init__(self, surrogates, refs: McReferenceSet, n_objectives,
                 observability: ObservabilityModel | None = None):
        self.surrogates = surrogates
        self.refs = refs
        self.n_objectives = n_objectives
        self.observability = observability

    def expected_improvement(self, X):
        X = np.atleast_2d(X)
        if self.refs.size == 0:
            return np.zeros(X.shape[0])
        means, stds = self.surrogates.predict(X)
        return improvement_probabilities(means, stds, self.refs, self.n_objectives)

    def p_observable(self, X):
        X = np.atleast_2d(X)
        if self.observability is None:
            return np.ones(X.shape[0])
        return self.observability.predict(X)

    def weighted(self, X):
        """Expected improvement times probability of observability."""
        X = np.atleast_2d(X)
        p_obs = self.p_observable(X)
        out = np.zeros(X.shape[0])
        live = p_obs > 0
        if np.any(live):
            out[live] = self.expected_improvement(X[live]) * p_obs[live]
        return out

    def weighted_parts(self, X):
        """``(expected improvement, p_observable)`` skipping EI where p = 0."""
        X = np.atleast_2d(X)
        p_obs = self.p_observable(X)
        ei = np.zeros(X.shape[0])
        live = p_obs > 0
        if np.any(live):
            ei[live] = self.expected_improvement(X[live])
        return ei, p_obs


def expected_improvement(surrogates, front: ObservedFront, box: ExtendedBox,
                         refs: McReferenceSet, x):
    """Extended expected improvement at ``x`` (one design or a batch).

    ``refs`` must have been sampled against ``front`` and ``box``.
    """
    crit = Criterion(surrogates, refs, box.obj_lower.size)
    values = crit.expected_improvement(x)
    return float(values[0]) if np.ndim(x) == 1 else values


def weighted_criterion(criterion: Criterion, x):
    values = criterion.weighted(x)
    return float(values[0]) if np.ndim(x) == 1 else values
