"""Heat-exchanger effectiveness closures.

The solver only needs a callable ``model(geometry, mdot_hot, mdot_cold,
params) -> effectiveness``.  :class:`CompactCrossflowEffectiveness` is the
default: a plate-fin crossflow exchanger with both fluids unmixed, Colburn
factor ``j = 0.53 Re^-0.5`` on each side and a conductive wall in between.
"""

from __future__ import annotations

from typing import Protocol

import numpy as np
from scipy.special import exprel


class EffectivenessModel(Protocol):
    def __call__(self, geometry, mdot_hot, mdot_cold, params) -> float: ...


def crossflow_unmixed_effectiveness(ntu, cr):
    """Effectiveness of a crossflow exchanger, both fluids unmixed.

    Uses the usual approximation
    ``1 - exp(Ntu^0.22 / Cr * (exp(-Cr * Ntu^0.78) - 1))``, rewritten as
    ``1 - exp(-Ntu * exprel(-Cr * Ntu^0.78))`` so that small ``Cr`` is
    stable and ``Cr = 0`` gives the single-stream limit ``1 - exp(-Ntu)``.
    """
    ntu = np.asarray(ntu, dtype=float)
    cr = np.asarray(cr, dtype=float)
    eps = -np.expm1(-ntu * exprel(-cr * ntu**0.78))
    return eps if eps.ndim else float(eps)


class CompactCrossflowEffectiveness:
    """Default epsilon-Ntu closure from the exchanger surface parameters.

    The bleed (hot) stream runs along x and the ram (cold) stream along y;
    plates are stacked along z.  Each stream occupies the fraction
    ``b / (b + b_r + 2 t_w)`` of the core volume, its wetted area is the
    area density ``beta`` times that volume and its free-flow area follows
    from ``sigma = alpha * Dh / 4``.

    Parameters
    ----------
    j_coefficient, j_exponent : float
        Colburn correlation ``j = j_coefficient * Re ** j_exponent``.
    """

    def __init__(self, j_coefficient=0.53, j_exponent=-0.5):
        self.j_coefficient = j_coefficient
        self.j_exponent = j_exponent

    def _film_conductance(self, mdot, frontal, volume, beta, spacing,
                          dh, mu, prandtl, pitch, cp):
        alpha = beta * spacing / pitch
        area = alpha * volume
        free_flow = alpha * dh / 4.0 * frontal
        mass_velocity = mdot / free_flow
        reynolds = mass_velocity * dh / mu
        j = self.j_coefficient * reynolds**self.j_exponent
        h = j * mass_velocity * cp * prandtl ** (-2.0 / 3.0)
        return h * area

    def conductance(self, geometry, mdot_hot, mdot_cold, params):
        """Overall UA (W/K) of one exchanger."""
        lx, ly, lz = geometry
        p = params
        pitch = p.b + p.b_r + 2.0 * p.t_w
        volume = lx * ly * lz
        hot = self._film_conductance(mdot_hot, ly * lz, volume, p.beta, p.b,
                                     p.Dh, p.mu, p.Pr, pitch, p.c_p)
        cold = self._film_conductance(mdot_cold, lx * lz, volume, p.beta_r, p.b_r,
                                      p.Dh_r, p.mu_r, p.Pr_r, pitch, p.c_p)
        # two separating plates per hot/cold layer pair
        wall_area = 2.0 * volume / pitch
        return 1.0 / (1.0 / hot + p.t_w / (p.k_w * wall_area) + 1.0 / cold)

    def ntu(self, geometry, mdot_hot, mdot_cold, params):
        c_min = params.c_p * np.minimum(mdot_hot, mdot_cold)
        return self.conductance(geometry, mdot_hot, mdot_cold, params) / c_min

    def __call__(self, geometry, mdot_hot, mdot_cold, params):
        cr = np.minimum(mdot_hot, mdot_cold) / np.maximum(mdot_hot, mdot_cold)
        return crossflow_unmixed_effectiveness(
            self.ntu(geometry, mdot_hot, mdot_cold, params), cr)


DEFAULT_EFFECTIVENESS = CompactCrossflowEffectiveness()


def hx_effectiveness(geometry, mdot_hot, mdot_cold, params, model=None):
    """Effectiveness of one exchanger of box size ``geometry = (Lx, Ly, Lz)``."""
    model = DEFAULT_EFFECTIVENESS if model is None else model
    return model(geometry, mdot_hot, mdot_cold, params)
