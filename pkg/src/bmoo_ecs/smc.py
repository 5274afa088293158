"""Sequential Monte Carlo search for the maximizer of the weighted criterion.

The particle population tracks the density
``1[x in domain] * p_observable(x) * (EI(x) + floor)`` which changes from one
iteration to the next.  Each step reweights by the density ratio, resamples
when the effective sample size drops below half the population, and moves
every particle with a few Metropolis-Hastings random-walk sweeps.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .doe import TruncatedDomain, sample_domain

log = logging.getLogger(__name__)

FLOOR_FACTOR = 1e-12


class Degenerate(RuntimeError):
    """All particle weights vanished."""


@dataclass(frozen=True)
class SMCConfig:
    n_particles: int = 500
    n_moves: int = 2
    target_accept: float = 0.3
    initial_scale: float = 0.1
    min_scale: float = 1e-4
    max_scale: float = 0.5
    ess_fraction: float = 0.5

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if self.n_moves < 0:
            raise ValueError("n_moves must be >= 0")
        if not 0 < self.min_scale <= self.initial_scale <= self.max_scale:
            raise ValueError("need 0 < min_scale <= initial_scale <= max_scale")


@dataclass(frozen=True)
class ParticleSet:
    """Weighted particles with the density values they were last scored at.

    ``scale`` is the random-walk standard deviation per dimension, as a
    fraction of each variable's range.  ``parts`` caches the (EI, p_obs)
    pair behind every density value so that the argmax needs no re-evaluation.
    """

    x: np.ndarray
    weights: np.ndarray
    density: np.ndarray
    scale: np.ndarray
    iteration: int = 0
    ei: np.ndarray | None = None
    p_obs: np.ndarray | None = None
    acceptance: float = float("nan")

    @property
    def size(self) -> int:
        return self.x.shape[0]

    def ess(self) -> float:
        return float(1.0 / np.sum(self.weights ** 2))


class TargetDensity:
    """Unnormalized truncated density built from a criterion.

    ``criterion`` must offer ``weighted_parts(X) -> (ei, p_obs)``.
    """

    def __init__(self, criterion, domain: TruncatedDomain, floor: float):
        if floor <= 0:
            raise ValueError("floor must be positive")
        self.criterion = criterion
        self.domain = domain
        self.floor = floor

    def parts(self, X):
        """Return ``(density, ei, p_obs)``; all zero outside the domain."""
        X = np.atleast_2d(X)
        n = X.shape[0]
        ei, p_obs = np.zeros(n), np.zeros(n)
        inside = self.domain.contains(X)
        if np.any(inside):
            ei[inside], p_obs[inside] = self.criterion.weighted_parts(X[inside])
        density = np.where(inside, p_obs * (ei + self.floor), 0.0)
        return density, ei, p_obs

    def __call__(self, X):
        return self.parts(X)[0]


def criterion_floor(refs) -> float:
    """Density floor: a tiny fraction of the volume carried by one reference point."""
    w = max(getattr(refs, "objective_weight", 0.0), getattr(refs, "violation_weight", 0.0))
    return FLOOR_FACTOR * w if w > 0 else 1.0


def target_density(criterion, domain: TruncatedDomain, x, floor=None) -> float:
    floor = criterion_floor(criterion.refs) if floor is None else floor
    return float(TargetDensity(criterion, domain, floor)(np.atleast_2d(x))[0])


def systematic_resample(weights, rng) -> np.ndarray:
    """Indices drawn by systematic resampling (one uniform offset)."""
    n = weights.size
    positions = (rng.random() + np.arange(n)) / n
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    return np.searchsorted(cumulative, positions, side="right").clip(max=n - 1)


def initialize(domain: TruncatedDomain, density: TargetDensity | None, rng,
               config: SMCConfig = SMCConfig(), x=None) -> ParticleSet:
    """Uniform particles over the domain, scored under ``density`` if given."""
    if x is None:
        x = sample_domain(domain, config.n_particles, rng)
    n = x.shape[0]
    if density is None:
        dens, ei, p_obs = np.ones(n), None, None
    else:
        dens, ei, p_obs = density.parts(x)
    weights = np.full(n, 1.0 / n)
    scale = np.full(domain.dim, config.initial_scale)
    return ParticleSet(x, weights, dens, scale, 0, ei, p_obs)


def mh_sweep(particles: ParticleSet, density, domain: TruncatedDomain, rng,
             config: SMCConfig = SMCConfig()) -> ParticleSet:
    """One Gaussian random-walk Metropolis-Hastings move for every particle.

    Proposals outside the domain are rejected without evaluating the density.
    """
    x, dens = particles.x, particles.density
    n, d = x.shape
    span = domain.upper - domain.lower
    noise = rng.standard_normal((n, d))
    u = rng.random(n)
    prop = x + noise * particles.scale * span
    inside = domain.contains(prop)
    accept = np.zeros(n, dtype=bool)
    new_dens = np.zeros(n)
    new_ei = new_p = None
    if np.any(inside):
        if isinstance(density, TargetDensity):
            d_in, ei_in, p_in = density.parts(prop[inside])
            new_ei, new_p = np.zeros(n), np.zeros(n)
            new_ei[inside], new_p[inside] = ei_in, p_in
        else:
            d_in = density(prop[inside])
        new_dens[inside] = d_in
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dens > 0, new_dens / dens, np.where(new_dens > 0, np.inf, 0.0))
        accept = inside & (u < ratio)
    x = np.where(accept[:, None], prop, x)
    dens = np.where(accept, new_dens, dens)
    ei, p_obs = particles.ei, particles.p_obs
    if new_ei is not None and ei is not None:
        ei = np.where(accept, new_ei, ei)
        p_obs = np.where(accept, new_p, p_obs)
    rate = float(accept.mean())
    factor = 1.1 if rate > config.target_accept else 0.9
    scale = np.clip(particles.scale * factor, config.min_scale, config.max_scale)
    return replace(particles, x=x, density=dens, ei=ei, p_obs=p_obs, scale=scale,
                   acceptance=rate)


def step(particles: ParticleSet, density: TargetDensity, domain: TruncatedDomain, rng,
         config: SMCConfig = SMCConfig()) -> ParticleSet:
    """Move the population from its previous density to ``density``."""
    if particles.size == 0:
        raise ValueError("empty particle set")
    new_dens, ei, p_obs = density.parts(particles.x)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(particles.density > 0, new_dens / particles.density, 0.0)
    w = particles.weights * ratio
    total = w.sum()
    if not np.isfinite(total) or total <= 0:
        log.debug("SMC weights degenerate; reinitializing from the domain")
        fresh = initialize(domain, density, rng, config)
        particles = replace(fresh, scale=particles.scale, iteration=particles.iteration)
    else:
        w = w / total
        particles = replace(particles, weights=w, density=new_dens, ei=ei, p_obs=p_obs)
        if particles.ess() < config.ess_fraction * particles.size:
            idx = systematic_resample(w, rng)
            n = particles.size
            particles = replace(particles, x=particles.x[idx], density=new_dens[idx],
                                ei=ei[idx], p_obs=p_obs[idx], weights=np.full(n, 1.0 / n))
    for _ in range(config.n_moves):
        particles = mh_sweep(particles, density, domain, rng, config)
    return replace(particles, iteration=particles.iteration + 1)


def propose_next(particles: ParticleSet, criterion=None) -> np.ndarray:
    """Particle maximizing EI * p_observable (first index on ties).

    Uses the cached per-particle values unless ``criterion`` is given, in
    which case every particle is rescored with ``criterion.weighted``.
    """
    if criterion is not None:
        values = criterion.weighted(particles.x)
    elif particles.ei is not None:
        values = particles.ei * particles.p_obs
    else:
        values = particles.density
    return particles.x[int(np.argmax(values))].copy()
