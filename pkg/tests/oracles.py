"""Independent reference implementations shared by the test modules."""

import math

import numpy as np
from scipy.stats import norm

from bmoo_ecs.pareto import dominates


def naive_posterior(X, y, Xs, variance, lengthscales, jitter, lower, upper):
    """Textbook GP posterior with a GLS constant mean, via dense solves and loops."""
    Xn = (X - lower) / (upper - lower)
    Xsn = (Xs - lower) / (upper - lower)
    ym, ys = y.mean(), y.std()
    z = (y - ym) / ys

    def kern(a, b):
        r = math.sqrt(sum(((ai - bi) / li) ** 2 for ai, bi, li in zip(a, b, lengthscales)))
        s = math.sqrt(5) * r
        return variance * (1 + s + s * s / 3) * math.exp(-s)

    n = len(Xn)
    K = np.array([[kern(Xn[i], Xn[j]) for j in range(n)] for i in range(n)])
    K += jitter * variance * np.eye(n)
    ones = np.ones(n)
    Ki1 = np.linalg.solve(K, ones)
    Kiz = np.linalg.solve(K, z)
    m = ones @ Kiz / (ones @ Ki1)
    means, variances = [], []
    for xs in Xsn:
        k = np.array([kern(xs, Xn[j]) for j in range(n)])
        means.append(m + k @ np.linalg.solve(K, z - m))
        variances.append(variance * (1 + jitter) - k @ np.linalg.solve(K, k))
    return np.array(means) * ys + ym, np.array(variances) * ys**2


def closed_form_ei(mu, sigma, y_star, lower):
    """Integral of P(Y <= z) for z in [lower, y_star], Y ~ N(mu, sigma^2)."""
    psi = lambda u: norm.pdf(u) + u * norm.cdf(u)  # noqa: E731
    return sigma * (psi((y_star - mu) / sigma) - psi((lower - mu) / sigma))


def balance_residuals(s, x, p, eps1, eps2):
    """Relative residuals of the four exchanger equations (independent re-substitution)."""
    return [
        abs(x.mdot * (p.T_t1 - s.Tt2) - x.mdot_r * (s.Tt3r - s.Tt2r)) / (x.mdot * p.T_t1),
        abs(x.mdot * (s.Tt3 - s.Tt4) - x.mdot_r * (s.Tt2r - p.T_a)) / (x.mdot * s.Tt3),
        abs((p.T_t1 - s.Tt2) - eps1 * (p.T_t1 - s.Tt2r)) / p.T_t1,
        abs((s.Tt3 - s.Tt4) - eps2 * (s.Tt3 - p.T_a)) / s.Tt3,
    ]


def brute_force_front(records):
    """Eval ids of feasible records that no other feasible record dominates."""
    feas = [r for r in records if r.feasible]
    return sorted(a.eval_id for a in feas
                  if not any(dominates(b.objectives, a.objectives) for b in feas))
