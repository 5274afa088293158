"""Gaussian-process regression with an anisotropic Matern-5/2 kernel.

Inputs are mapped to the unit box, outputs are standardized, the constant
mean is profiled out by generalized least squares and the remaining
hyperparameters (signal variance, one lengthscale per input) maximize the
log marginal likelihood by multi-start L-BFGS-B.

The jitter is treated as part of the covariance (a nugget that also appears
in the cross-covariance of coincident points), so the posterior interpolates
training data exactly, with zero variance there.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize

SQRT5 = math.sqrt(5.0)
LOG_2PI = math.log(2.0 * math.pi)
_Z_BITS = 40


class CholeskyFailure(np.linalg.LinAlgError):
    pass


class DegenerateDataWarning(UserWarning):
    """All training outputs are equal; a constant model is returned."""


@dataclass(frozen=True)
class GPConfig:
    lengthscale_bounds: tuple = (1e-2, 1e1)
    variance_bounds: tuple = (1e-4, 1e4)
    jitter: float = 1e-8
    restarts: int = 5
    max_iter: int = 200

    def __post_init__(self):
        if self.jitter <= 0:
            raise ValueError("jitter must be positive")
        lo, hi = self.lengthscale_bounds
        vlo, vhi = self.variance_bounds
        if not (0 < lo < hi and 0 < vlo < vhi):
            raise ValueError("hyperparameter bounds must be positive and ordered")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


def matern52(r):
    """Matern-5/2 correlation as a function of the scaled distance."""
    sr = SQRT5 * r
    return (1.0 + sr + sr * sr / 3.0) * np.exp(-sr)


def pairwise_sq_diffs(A, B):
    """Per-dimension squared differences, shape ``(len(A), len(B), d)``."""
    return (A[:, None, :] - B[None, :, :]) ** 2


def _cholesky(K, jitter_abs, retries=3):
    n = K.shape[0]
    eye = np.eye(n)
    for attempt in range(retries + 1):
        try:
            return linalg.cholesky(K + jitter_abs * eye, lower=True), jitter_abs
        except linalg.LinAlgError:
            jitter_abs *= 10.0
    raise CholeskyFailure("covariance not positive definite after jitter retries")


def _lml_core(sq, y, log_variance, log_lengthscales, jitter, mean=None, grad=False):
    n = y.shape[0]
    variance = math.exp(log_variance)
    inv_l2 = np.exp(-2.0 * np.asarray(log_lengthscales))
    r = np.sqrt(np.maximum(sq @ inv_l2, 0.0))
    K = variance * matern52(r)
    L, jit = _cholesky(K, jitter * variance)
    ones = np.ones(n)
    if mean is None:
        k_one = linalg.cho_solve((L, True), ones)
        k_y = linalg.cho_solve((L, True), y)
        mean = float(ones @ k_y / (ones @ k_one))
        alpha = k_y - mean * k_one
    else:
        alpha = linalg.cho_solve((L, True), y - mean)
    resid = y - mean
    lml = -0.5 * resid @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * LOG_2PI
    if not grad:
        return lml, mean, L, alpha, jit
    K_inv = linalg.cho_solve((L, True), np.eye(n))
    W = np.outer(alpha, alpha) - K_inv
    # d/dlog(variance): K itself (jitter included, since it is relative)
    g_var = 0.5 * (alpha @ resid - n)
    G = variance * (5.0 / 3.0) * (1.0 + SQRT5 * r) * np.exp(-SQRT5 * r)
    A = W * G
    g_len = 0.5 * np.tensordot(A, sq, axes=([0, 1], [0, 1])) * inv_l2
    return lml, mean, L, alpha, jit, np.concatenate([[g_var], g_len])


def log_marginal_likelihood(X, y, hyperparameters, jitter=1e-8, mean=None,
                            return_grad=False):
    """Gaussian log marginal likelihood.

    Parameters
    ----------
    X : ndarray, shape (n, d)
        Inputs (already normalized).
    y : ndarray, shape (n,)
    hyperparameters : array_like
        ``[log variance, log lengthscale_1, ..., log lengthscale_d]``.
    mean : float, optional
        Fixed constant mean; by default the GLS estimate is used.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    theta = np.asarray(hyperparameters, dtype=float)
    out = _lml_core(pairwise_sq_diffs(X, X), y, theta[0], theta[1:], jitter,
                    mean=mean, grad=return_grad)
    return (out[0], out[-1]) if return_grad else out[0]


class GPModel:
    """A fitted GP; immutable after construction."""

    def __init__(self, X, y, lower, upper, y_mean, y_std, log_variance,
                 log_lengthscales, mean, chol, alpha, jitter_abs, lml=float("nan")):
        self.X = X
        self.y = y
        self.lower = lower
        self.upper = upper
        self.y_mean = y_mean
        self.y_std = y_std
        self.log_variance = float(log_variance)
        self.log_lengthscales = np.asarray(log_lengthscales, dtype=float)
        self.mean = mean
        self.chol = chol
        self.alpha = alpha
        self.jitter_abs = jitter_abs
        self.lml = lml

    @property
    def hyperparameters(self) -> np.ndarray:
        return np.concatenate([[self.log_variance], self.log_lengthscales])

    @property
    def lengthscales(self) -> np.ndarray:
        return np.exp(self.log_lengthscales)

    @property
    def prior_variance(self) -> float:
        """Prior variance in output units."""
        return (math.exp(self.log_variance) + self.jitter_abs) * self.y_std**2

    def normalize(self, X):
        return (np.atleast_2d(np.asarray(X, dtype=float)) - self.lower) / (self.upper - self.lower)

    def predict(self, X):
        """Posterior mean and variance (output units) at the rows of ``X``."""
        Xn = self.normalize(X)
        sq = pairwise_sq_diffs(Xn, self.X)
        inv_l2 = np.exp(-2.0 * self.log_lengthscales)
        dist2 = sq @ inv_l2
        variance = math.exp(self.log_variance)
        k = variance * matern52(np.sqrt(dist2))
        k[np.all(sq == 0.0, axis=2)] += self.jitter_abs
        mean = self.mean + k @ self.alpha
        v = linalg.solve_triangular(self.chol, k.T, lower=True)
        var = variance + self.jitter_abs - np.sum(v * v, axis=0)
        var = np.maximum(var, 0.0)
        return mean * self.y_std + self.y_mean, var * self.y_std**2


def predict(model: GPModel, x):
    """Mean and variance at a single input (or a batch)."""
    mean, var = model.predict(x)
    if np.ndim(x) == 1:
        return float(mean[0]), float(var[0])
    return mean, var


def deduplicate(X, y):
    """Drop repeated input rows, keeping the first occurrence."""
    _, first = np.unique(X, axis=0, return_index=True)
    first = np.sort(first)
    return X[first], y[first]


def _starting_points(d, config, rng, n_starts, initial):
    lo, hi = np.log(config.lengthscale_bounds)
    vlo, vhi = np.log(config.variance_bounds)
    starts = []
    if initial is not None:
        starts.append(np.asarray(initial, dtype=float))
    default = np.concatenate([[0.0], np.full(d, math.log(0.5 * math.sqrt(d)))])
    starts.append(default)
    while len(starts) < n_starts:
        starts.append(np.concatenate([
            rng.uniform(math.log(0.1), math.log(10.0), 1),
            rng.uniform(math.log(0.1), math.log(10.0), d),
        ]))
    box_lo = np.concatenate([[vlo], np.full(d, lo)])
    box_hi = np.concatenate([[vhi], np.full(d, hi)])
    return [np.clip(s, box_lo, box_hi) for s in starts[:n_starts]], list(zip(box_lo, box_hi))


def fit(inputs, outputs, config: GPConfig = GPConfig(), bounds=None, rng=None,
        initial=None, optimize_hyperparameters=True, n_starts=None) -> GPModel:
    """Fit a GP to ``(inputs, outputs)``.

    Parameters
    ----------
    inputs : array_like, shape (n, d)
    outputs : array_like, shape (n,)
    bounds : (lower, upper), optional
        Containing hypercube used to normalize inputs; defaults to the data range.
    initial : array_like, optional
        Hyperparameters ``[log variance, log lengthscales...]`` (standardized
        units) used as the first starting point, or kept as-is when
        ``optimize_hyperparameters`` is False.
    n_starts : int, optional
        Number of local searches; defaults to ``config.restarts``.
    """
    X = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = np.asarray(outputs, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise ValueError("inputs and outputs differ in length")
    X, y = deduplicate(X, y)
    if X.shape[0] < 2:
        raise ValueError("at least two distinct inputs are required")
    if bounds is None:
        lower, upper = X.min(axis=0), X.max(axis=0)
        upper = np.where(upper > lower, upper, lower + 1.0)
    else:
        lower, upper = (np.asarray(b, dtype=float) for b in bounds)
    Xn = (X - lower) / (upper - lower)
    d = Xn.shape[1]
    sq = pairwise_sq_diffs(Xn, Xn)

    y_mean = float(np.mean(y))
    y_std = float(np.std(y))
    if not y_std > 0 or not np.isfinite(y_std):
        warnings.warn("all outputs are equal; using a constant model",
                      DegenerateDataWarning, stacklevel=2)
        theta = np.concatenate([[math.log(1e-12)], np.zeros(d)])
        _, mean, L, alpha, jit = _lml_core(sq, np.zeros_like(y), theta[0], theta[1:],
                                           config.jitter, mean=0.0)
        return GPModel(Xn, y, lower, upper, y_mean, 1.0, theta[0], theta[1:],
                       mean, L, alpha, jit)
    # Snap the standardized outputs to a 2^-40 grid: rescaled outputs then
    # give bit-identical data to the hyperparameter search (error <= 5e-13 sd).
    z = np.round(np.ldexp((y - y_mean) / y_std, _Z_BITS)) * 2.0 ** -_Z_BITS

    if optimize_hyperparameters:
        rng = np.random.default_rng() if rng is None else rng
        starts, box = _starting_points(d, config, rng, n_starts or config.restarts, initial)

        def objective(theta):
            try:
                lml, *_, g = _lml_core(sq, z, theta[0], theta[1:], config.jitter, grad=True)
            except CholeskyFailure:
                return 1e25, np.zeros_like(theta)
            if not np.isfinite(lml):
                return 1e25, np.zeros_like(theta)
            return -lml, -g

        best = None
        for start in starts:
            res = optimize.minimize(objective, start, jac=True, method="L-BFGS-B",
                                    bounds=box, options={"maxiter": config.max_iter})
            if best is None or res.fun < best.fun:
                best = res
        theta = best.x
    else:
        if initial is None:
            raise ValueError("fixed hyperparameters require `initial`")
        theta = np.asarray(initial, dtype=float)

    lml, mean, L, alpha, jit = _lml_core(sq, z, theta[0], theta[1:], config.jitter)
    return GPModel(Xn, y, lower, upper, y_mean, y_std, theta[0], theta[1:],
                   mean, L, alpha, jit, lml=float(lml))


class SurrogateSet:
    """Independent GPs for the objectives and constraints of one problem."""

    def __init__(self, models):
        self.models = list(models)

    def __len__(self):
        return len(self.models)

    def predict(self, X):
        """Means and standard deviations, each of shape ``(n, n_models)``."""
        X = np.atleast_2d(X)
        means = np.empty((X.shape[0], len(self.models)))
        stds = np.empty_like(means)
        for j, model in enumerate(self.models):
            m, v = model.predict(X)
            means[:, j] = m
            stds[:, j] = np.sqrt(v)
        return means, stds

    def scaled(self, factor) -> "SurrogateSet":
        """Same posterior with every output multiplied by ``factor > 0``."""
        out = []
        for m in self.models:
            out.append(GPModel(m.X, m.y * factor, m.lower, m.upper, m.y_mean * factor,
                               m.y_std * factor, m.log_variance, m.log_lengthscales,
                               m.mean, m.chol, m.alpha, m.jitter_abs, m.lml))
        return SurrogateSet(out)


def fit_surrogates(X, Y, config: GPConfig = GPConfig(), bounds=None, rng=None,
                   previous=None, optimize_hyperparameters=True, n_starts=None):
    """Fit one GP per column of ``Y``.

    ``previous`` (a :class:`SurrogateSet`) provides warm starts, or the
    frozen hyperparameters when ``optimize_hyperparameters`` is False.
    """
    Y = np.asarray(Y, dtype=float)
    models = []
    for j in range(Y.shape[1]):
        init = previous.models[j].hyperparameters if previous is not None else None
        models.append(fit(X, Y[:, j], config, bounds=bounds, rng=rng, initial=init,
                          optimize_hyperparameters=optimize_hyperparameters,
                          n_starts=n_starts))
    return SurrogateSet(models)
