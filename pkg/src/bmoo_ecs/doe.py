"""Space-filling initial designs on a truncated (non-hypercubic) domain."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .ecs.model import domain_mask
from .ecs.parameters import DEFAULT_PARAMS, LOWER, UPPER


class InsufficientSurvivors(RuntimeError):
    pass


@dataclass(frozen=True)
class TruncatedDomain:
    """A hypercube restricted by a vectorized membership test."""

    lower: np.ndarray
    upper: np.ndarray
    mask: object = None  # callable X -> bool array; None means the whole box

    @property
    def dim(self) -> int:
        return len(self.lower)

    def contains(self, X):
        X = np.atleast_2d(X)
        inside = np.all((X >= self.lower) & (X <= self.upper), axis=1)
        if self.mask is not None and np.any(inside):
            inside[inside] = self.mask(X[inside])
        return inside

    def normalize(self, X):
        return (np.asarray(X) - self.lower) / (self.upper - self.lower)

    def sample_box(self, n, rng):
        return self.lower + (self.upper - self.lower) * rng.random((n, self.dim))


def ecs_domain(params=DEFAULT_PARAMS, restrictions=None) -> TruncatedDomain:
    """The ECS design box restricted by d1..d9 (or the listed subset)."""
    if restrictions is not None and len(restrictions) == 0:
        return TruncatedDomain(LOWER.copy(), UPPER.copy())
    return TruncatedDomain(LOWER.copy(), UPPER.copy(),
                           lambda X: domain_mask(X, params, restrictions))


@dataclass(frozen=True)
class DoeConfig:
    n_init: int = 90
    oversample: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.n_init < 1:
            raise ValueError("n_init must be >= 1")
        if self.oversample < 1:
            raise ValueError("oversample must be >= 1")


def prune_to_maximin(X, n_keep, lower, upper):
    """Greedily drop points until ``n_keep`` remain.

    At each step the closest pair is found and the endpoint whose
    second-nearest neighbour is nearer is removed.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[0] <= n_keep:
        return X
    D = squareform(pdist((X - lower) / (upper - lower)))
    np.fill_diagonal(D, np.inf)
    alive = np.ones(X.shape[0], dtype=bool)
    for _ in range(X.shape[0] - n_keep):
        sub = np.flatnonzero(alive)
        Ds = D[np.ix_(sub, sub)]
        flat = int(np.argmin(Ds))
        i, j = divmod(flat, Ds.shape[0])
        second_i = np.partition(Ds[i], 1)[1]
        second_j = np.partition(Ds[j], 1)[1]
        victim = sub[i] if second_i < second_j else sub[j]
        alive[victim] = False
    return X[alive]


def min_pairwise_distance(X, lower, upper) -> float:
    X = np.asarray(X, dtype=float)
    if X.shape[0] < 2:
        return math.inf
    return float(pdist((X - lower) / (upper - lower)).min())


def maximin_design(config: DoeConfig = DoeConfig(), domain: TruncatedDomain | None = None,
                   rng=None, max_retries=3):
    """Pseudo-maximin design of ``config.n_init`` points inside ``domain``.

    Uniform candidates in the containing box are filtered by the domain test
    and then pruned.  Returns an ``(n_init, d)`` array.
    """
    domain = ecs_domain() if domain is None else domain
    rng = np.random.default_rng(config.seed) if rng is None else rng
    oversample = config.oversample
    for _ in range(max_retries + 1):
        cand = domain.sample_box(oversample * config.n_init, rng)
        survivors = cand[domain.contains(cand)]
        if survivors.shape[0] >= config.n_init:
            return prune_to_maximin(survivors, config.n_init, domain.lower, domain.upper)
        oversample *= 2
    raise InsufficientSurvivors(
        f"only {survivors.shape[0]} of {oversample // 2 * config.n_init} candidates "
        f"fell inside the domain; need {config.n_init}")


def sample_domain(domain: TruncatedDomain, n, rng, batch=None):
    """``n`` independent uniform draws from the truncated domain."""
    batch = batch or max(1024, 4 * n)
    out, count = [], 0
    for _ in range(10_000):
        cand = domain.sample_box(batch, rng)
        cand = cand[domain.contains(cand)]
        out.append(cand)
        count += cand.shape[0]
        if count >= n:
            return np.concatenate(out)[:n]
    raise InsufficientSurvivors("domain acceptance too small for rejection sampling")


def estimate_domain_volume_ratio(n_samples=100_000, seed=0, params=DEFAULT_PARAMS,
                                 restrictions=None, samples=None):
    """Fraction of the design box satisfying the restrictions.

    Returns ``(ratio, standard_error)``.  ``samples`` may supply the uniform
    draws so that different restriction sets can share them.
    """
    if n_samples < 10_000 and samples is None:
        raise ValueError("n_samples must be at least 1e4")
    if samples is None:
        rng = np.random.default_rng(seed)
        samples = LOWER + (UPPER - LOWER) * rng.random((n_samples, LOWER.size))
    if restrictions is not None and len(restrictions) == 0:
        inside = np.ones(samples.shape[0], dtype=bool)
    else:
        inside = domain_mask(samples, params, restrictions)
    ratio = float(inside.mean())
    return ratio, math.sqrt(ratio * (1.0 - ratio) / samples.shape[0])
