"""Design variables and fixed parameters of the ECS benchmark.

The fixed parameters use the ASCII spelling of the usual notation as field
names (``T_a``, ``eta_F``, ...) so that the JSON representation is the
dataclass field mapping itself.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DESIGN_NAMES = (
    "mdot", "mdot_r",
    "r3", "r4",
    "r2p", "r2t", "r5p", "r5t",
    "b3", "b4",
    "beta3", "alpha4",
    "Lx1", "Ly1", "Lz1",
    "Lx2", "Ly2", "Lz2",
)

_PI3 = math.pi / 3.0

DESIGN_BOUNDS = {
    "mdot": (2.0, 8.0),
    "mdot_r": (2.0, 8.0),
    "r3": (0.1, 0.3),
    "r4": (0.1, 0.3),
    "r2p": (0.03, 0.1),
    "r2t": (0.04, 0.2),
    "r5p": (0.03, 0.1),
    "r5t": (0.04, 0.2),
    "b3": (0.01, 0.1),
    "b4": (0.01, 0.1),
    "beta3": (-_PI3, _PI3),
    "alpha4": (0.0, _PI3),
    "Lx1": (0.025, 0.7),
    "Ly1": (0.025, 0.7),
    "Lz1": (0.025, 0.7),
    "Lx2": (0.025, 0.7),
    "Ly2": (0.025, 0.7),
    "Lz2": (0.025, 0.7),
}

LOWER = np.array([DESIGN_BOUNDS[n][0] for n in DESIGN_NAMES])
UPPER = np.array([DESIGN_BOUNDS[n][1] for n in DESIGN_NAMES])


@dataclass(frozen=True)
class DesignVector:
    """The 18 geometric and flow design variables (SI units, angles in rad)."""

    mdot: float
    mdot_r: float
    r3: float
    r4: float
    r2p: float
    r2t: float
    r5p: float
    r5t: float
    b3: float
    b4: float
    beta3: float
    alpha4: float
    Lx1: float
    Ly1: float
    Lz1: float
    Lx2: float
    Ly2: float
    Lz2: float

    @classmethod
    def from_array(cls, values) -> "DesignVector":
        values = np.asarray(values, dtype=float).ravel()
        if values.shape != (len(DESIGN_NAMES),):
            raise ValueError(
                f"expected {len(DESIGN_NAMES)} design values, got {values.size}"
            )
        return cls(*(float(v) for v in values))

    @classmethod
    def from_mapping(cls, mapping) -> "DesignVector":
        missing = [n for n in DESIGN_NAMES if n not in mapping]
        extra = [k for k in mapping if k not in DESIGN_NAMES]
        if missing or extra:
            raise ValueError(
                f"bad design mapping: missing={missing} unknown={extra}"
            )
        return cls(**{n: float(mapping[n]) for n in DESIGN_NAMES})

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in DESIGN_NAMES])

    def to_dict(self) -> dict:
        return {n: getattr(self, n) for n in DESIGN_NAMES}

    def in_box(self) -> bool:
        x = self.to_array()
        return bool(np.all(x >= LOWER) and np.all(x <= UPPER))


def mid_box() -> DesignVector:
    return DesignVector.from_array(0.5 * (LOWER + UPPER))


# heat-load terms and the (unused) valve opening may vanish
_MAY_BE_ZERO = frozenset({"theta", "N_pax", "N_crew", "P_pax", "P_crew", "P_eq", "P_out"})


@dataclass(frozen=True)
class FixedParameters:
    """Scenario, fluid, exchanger and machine constants.

    ``rho_air`` is the constant density assumed along the bleed stream and in
    the shaft power balance; when left as ``None`` it is derived from the
    bleed inlet conditions, ``P_t1 / (R * T_t1)``.  The ram stream is at the
    ambient density ``P_a / (R * T_a)``.
    """

    # simulation
    T_a: float = 323.0
    P_a: float = 101.3e3
    N_pax: float = 120
    N_crew: float = 5
    P_pax: float = 70.0
    P_crew: float = 100.0
    P_eq: float = 4800.0
    P_out: float = 3000.0
    T_t1: float = 473.0
    P_t1: float = 260e3
    dP_hx: float = 40e3
    theta: float = 0.0
    A_r: float = 0.20
    eta_F: float = 0.95
    c_p: float = 1004.0
    gamma: float = 1.4
    R: float = 287.0
    # heat exchangers
    mu: float = 2.28e-5
    mu_r: float = 2.28e-5
    beta: float = 2231.0
    beta_r: float = 1115.0
    b: float = 5.21e-3
    b_r: float = 12.3e-3
    Pr: float = 0.7
    Pr_r: float = 0.7
    Dh: float = 1.54e-3
    Dh_r: float = 3.41e-3
    lambda_c: float = 0.035
    lambda_c_r: float = 0.035
    rho_hx: float = 1415.0
    delta_fin: float = 0.102e-3
    t_w: float = 6e-4
    k_w: float = 237.0
    # rotating machines
    eta_c: float = 0.8
    eta_t: float = 0.92
    h_c: float = 0.7
    h_t: float = 0.5
    e_c: float = 0.01
    e_t: float = 0.01
    Z_c: float = 21
    Z_t: float = 21
    # scenario bounds
    T_min: float = 288.15
    T_max: float = 298.15
    P_min: float = 101.3e3
    P_max: float = 1.05 * 101.3e3
    T_c: float = 297.15
    # assumed densities
    rho_air: float | None = None
    rho_steel: float = 7850.0

    def __post_init__(self):
        if self.rho_air is None:
            object.__setattr__(self, "rho_air", self.P_t1 / (self.R * self.T_t1))
        bad = [
            f.name for f in dataclasses.fields(self)
            if (getattr(self, f.name) < 0 if f.name in _MAY_BE_ZERO
                else getattr(self, f.name) <= 0)
        ]
        if bad:
            raise ValueError(f"parameters out of range: {bad}")
        for name in ("eta_c", "eta_t", "eta_F"):
            if getattr(self, name) > 1:
                raise ValueError(f"{name} must lie in (0, 1]")
        if self.gamma <= 1:
            raise ValueError("gamma must exceed 1")

    @property
    def rho_ram(self) -> float:
        return self.P_a / (self.R * self.T_a)

    def replace(self, **changes) -> "FixedParameters":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, mapping: dict) -> "FixedParameters":
        """Build from a (partial) mapping; absent keys keep their defaults."""
        known = {f.name: f for f in dataclasses.fields(cls)}
        unknown = sorted(set(mapping) - set(known))
        if unknown:
            raise KeyError(f"unknown parameter(s): {', '.join(unknown)}")
        kwargs = {}
        for key, value in mapping.items():
            if value is None and key == "rho_air":
                kwargs[key] = None
                continue
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError(f"parameter {key!r} must be a number, got {value!r}")
            kwargs[key] = float(value)
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "FixedParameters":
        return cls.from_dict(json.loads(Path(path).read_text()))


DEFAULT_PARAMS = FixedParameters()
