"""One-dimensional steady model of the environment control system.

The bleed stream goes 1 -> HX1 -> 2 -> compressor -> 3 -> HX2 -> 4 ->
turbine -> 5; the ram stream goes 1r -> HX2 -> 2r -> HX1 -> 3r.  All
stations are described by stagnation quantities ``Tt*``/``Pt*``; statics
follow from the velocity triangles of the two machines.

Every stage raises :class:`SimulationFailure` on a non-physical result;
:func:`evaluate` turns those into failed :class:`SimulationOutcome` values
and never raises for in-box inputs.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .effectiveness import hx_effectiveness
from .parameters import DEFAULT_PARAMS, DESIGN_NAMES, DesignVector, FixedParameters

N_CONSTRAINTS = 15
N_RESTRICTIONS = 9
# absolute slack on restriction margins; published designs sit exactly on d4/d6
RESTRICTION_TOL = 1e-12
CONSTRAINT_NAMES = tuple(f"c{i}" for i in range(1, N_CONSTRAINTS + 1))
OBJECTIVE_NAMES = ("mass_kg", "entropy_w_per_k")

_COL = {name: i for i, name in enumerate(DESIGN_NAMES)}

DOMAIN_VIOLATION = "DomainViolation"
NO_REAL_SHAFT_SPEED = "NoRealShaftSpeed"
NON_POSITIVE_SHAFT_SPEED = "NonPositiveShaftSpeed"
NON_PHYSICAL_STATE = "NonPhysicalState"
SUPERSONIC_INTERNAL_FLOW = "SupersonicInternalFlow"


@dataclass(frozen=True)
class FailureReason:
    kind: str
    detail: object = None

    def __str__(self):
        if self.kind == DOMAIN_VIOLATION:
            return f"{self.kind}({','.join(f'd{i}' for i in self.detail)})"
        if self.detail is None:
            return self.kind
        return f"{self.kind}({self.detail})"


class SimulationFailure(Exception):
    """Raised by the model stages; carries the :class:`FailureReason`."""

    def __init__(self, kind, detail=None):
        self.reason = FailureReason(kind, detail)
        super().__init__(str(self.reason))


@dataclass(frozen=True)
class StateVector:
    Tt2: float
    Tt3: float
    Tt4: float
    Tt5: float
    Tt2r: float
    Tt3r: float
    Pt2: float
    Pt3: float
    Pt4: float
    Pt5: float
    W_C: float
    W_T: float
    omega: float


@dataclass(frozen=True)
class StaticState:
    T2: float
    T3: float
    T4: float
    T5: float
    P2: float
    P3: float
    P4: float
    P5: float
    C2x: float
    C3m: float
    C4m: float
    C5x: float
    T1r: float
    T2r: float
    T3r: float
    P2r: float
    P3r: float
    C2_norm: float
    C3_norm: float
    C4_norm: float
    C5_norm: float


@dataclass(frozen=True)
class DomainReport:
    ok: bool
    violated: tuple
    discriminant: float


@dataclass(frozen=True)
class SimulationOutcome:
    """Result of one simulator call.

    ``constraints`` are in normal form: ``c <= 0`` is satisfied.
    """

    success: bool
    objectives: np.ndarray | None = None
    constraints: np.ndarray | None = None
    state: StateVector | None = None
    statics: StaticState | None = None
    effectiveness: tuple | None = None
    reason: FailureReason | None = None

    @property
    def status(self) -> str:
        return "success" if self.success else "failure"

    @property
    def feasible(self) -> bool:
        return self.success and bool(np.all(self.constraints <= 0))

    def to_dict(self) -> dict:
        out = {"status": self.status}
        if self.success:
            out["objectives"] = dict(zip(OBJECTIVE_NAMES, map(float, self.objectives)))
            out["constraints"] = dict(zip(CONSTRAINT_NAMES, map(float, self.constraints)))
            out["feasible"] = self.feasible
            out["effectiveness"] = list(self.effectiveness)
            out["state"] = asdict(self.state)
            out["statics"] = asdict(self.statics)
        else:
            out["failure_reason"] = str(self.reason)
        return out


def compute_heat_load(params: FixedParameters = DEFAULT_PARAMS) -> float:
    """Thermal power (W) the system must remove from the cabin."""
    p = params
    return p.P_out + p.P_eq + p.N_pax * p.P_pax + p.N_crew * p.P_crew


def shaft_quadratic(X, params=DEFAULT_PARAMS):
    """Coefficients ``(a, b, c)`` of ``a w^2 + b w + c = 0`` for each row of X."""
    X = np.asarray(X, dtype=float)
    mdot, mdot_r = X[..., _COL["mdot"]], X[..., _COL["mdot_r"]]
    r3 = X[..., _COL["r3"]]
    slope = (np.tan(X[..., _COL["beta3"]]) / X[..., _COL["b3"]]
             + np.tan(X[..., _COL["alpha4"]]) / X[..., _COL["b4"]])
    rho = params.rho_air
    a = mdot * r3**2
    b = -(mdot**2) / (2.0 * math.pi * rho) * slope
    c = mdot_r**3 / (2.0 * params.eta_F * rho**2 * params.A_r**2)
    return a, b, c


def restriction_margins(X, params=DEFAULT_PARAMS):
    """Margins of restrictions d1..d9, shape ``(..., 9)``; ``>= 0`` holds."""
    X = np.asarray(X, dtype=float)
    g = lambda n: X[..., _COL[n]]  # noqa: E731
    a, b, c = shaft_quadratic(X, params)
    return np.stack([
        g("mdot_r") - g("mdot"),
        params.h_c * g("r3") - g("b3"),
        params.h_t * g("r4") - g("b4"),
        g("r2t") - g("r2p") - 0.02,
        g("r3") - g("r2t"),
        g("r5t") - g("r5p") - 0.02,
        g("r4") - g("r5t"),
        b * b - 4.0 * a * c,
        np.tan(g("beta3")) / g("b3") + np.tan(g("alpha4")) / g("b4"),
    ], axis=-1)


def domain_mask(X, params=DEFAULT_PARAMS, restrictions=None):
    """Boolean mask of rows satisfying the selected restrictions (all by default)."""
    margins = restriction_margins(X, params)
    if restrictions is not None:
        idx = [i - 1 for i in restrictions]
        margins = margins[..., idx]
    return np.all(margins >= -RESTRICTION_TOL, axis=-1)


def check_domain(x: DesignVector, params: FixedParameters = DEFAULT_PARAMS) -> DomainReport:
    margins = restriction_margins(x.to_array(), params)
    violated = tuple(int(i) + 1 for i in np.flatnonzero(margins < -RESTRICTION_TOL))
    return DomainReport(ok=not violated, violated=violated,
                        discriminant=float(margins[7]))


def solve_shaft_speed(x: DesignVector, params: FixedParameters = DEFAULT_PARAMS):
    """Shaft speed and machine powers from the power balance of the shaft.

    Returns ``(omega, W_C, W_T)``; the largest real root is kept.
    """
    a, b, c = (float(v) for v in shaft_quadratic(x.to_array(), params))
    disc = b * b - 4.0 * a * c
    if disc < 0:
        raise SimulationFailure(NO_REAL_SHAFT_SPEED)
    omega = (-b + math.sqrt(disc)) / (2.0 * a)
    if omega <= 0:
        raise SimulationFailure(NON_POSITIVE_SHAFT_SPEED)
    rho = params.rho_air
    w_c = x.mdot * (x.r3**2 * omega**2
                    - x.mdot * math.tan(x.beta3) / (2.0 * math.pi * rho * x.b3) * omega)
    w_t = -(x.mdot**2) * math.tan(x.alpha4) / (2.0 * math.pi * rho * x.b4) * omega
    return omega, w_c, w_t


def fan_power(x: DesignVector, params: FixedParameters = DEFAULT_PARAMS) -> float:
    """Power drawn by the ram-air fan from the shaft (W)."""
    return x.mdot_r**3 / (2.0 * params.eta_F * params.rho_air**2 * params.A_r**2)


def solve_thermal_state(x: DesignVector, params: FixedParameters, eps1, eps2,
                        W_C, W_T, omega) -> StateVector:
    """Stagnation temperatures and pressures along both streams.

    The exchanger balances couple ``Tt2``, ``Tt3`` and ``Tt2r`` linearly;
    the 3x3 system is solved by substitution.
    """
    p = params
    k = x.mdot / x.mdot_r
    tt1, tt1r = p.T_t1, p.T_a
    rise_c = W_C / (p.eta_c * x.mdot * p.c_p)
    det = 1.0 - k * eps1 * eps2
    if det == 0:
        raise SimulationFailure(NON_PHYSICAL_STATE, "singular exchanger coupling")
    tt2r = (tt1r + k * eps2 * ((1.0 - eps1) * tt1 + rise_c - tt1r)) / det
    tt2 = tt1 - eps1 * (tt1 - tt2r)
    tt3 = tt2 + rise_c
    tt4 = tt3 - eps2 * (tt3 - tt1r)
    tt5 = tt4 + p.eta_t * W_T / (x.mdot * p.c_p)
    tt3r = tt2r + k * (tt1 - tt2)

    expo = p.gamma / (p.gamma - 1.0)
    pt2 = p.P_t1 - p.dP_hx
    base_c = 1.0 + p.eta_c * (tt3 - tt2) / tt2 if tt2 > 0 else -1.0
    base_t = 1.0 + (tt5 - tt4) / (p.eta_t * tt4) if tt4 > 0 else -1.0
    temps = {"Tt2": tt2, "Tt3": tt3, "Tt4": tt4, "Tt5": tt5,
             "Tt2r": tt2r, "Tt3r": tt3r}
    bad = [name for name, t in temps.items() if not t > 0]
    if bad:
        raise SimulationFailure(NON_PHYSICAL_STATE, f"non-positive {'/'.join(bad)}")
    if base_c <= 0 or base_t <= 0:
        raise SimulationFailure(NON_PHYSICAL_STATE, "no isentropic pressure ratio")
    pt3 = pt2 * base_c**expo
    pt4 = pt3 - p.dP_hx
    pt5 = pt4 * base_t**expo
    if min(pt2, pt3, pt4, pt5) <= 0:
        raise SimulationFailure(NON_PHYSICAL_STATE, "non-positive pressure")
    return StateVector(tt2, tt3, tt4, tt5, tt2r, tt3r, pt2, pt3, pt4, pt5,
                       W_C, W_T, omega)


def velocity_magnitudes(state: StateVector, x: DesignVector, params: FixedParameters):
    """Absolute velocity magnitudes at stations 2..5 (m/s)."""
    rho = params.rho_air
    c2 = x.mdot / (math.pi * (x.r2t**2 - x.r2p**2) * rho)
    w3m = x.mdot / (2.0 * math.pi * rho * x.r3 * x.b3)
    c3u = x.r3 * state.omega - w3m * math.tan(x.beta3)
    c3 = math.hypot(c3u, w3m)
    c4 = x.mdot / (2.0 * math.pi * rho * x.r4 * x.b4 * math.cos(x.alpha4))
    c5 = x.mdot / (math.pi * (x.r5t**2 - x.r5p**2) * rho)
    return c2, c3, c4, c5


def compute_static_state(state: StateVector, x: DesignVector,
                         params: FixedParameters = DEFAULT_PARAMS) -> StaticState:
    p = params
    speeds = velocity_magnitudes(state, x, p)
    totals_t = (state.Tt2, state.Tt3, state.Tt4, state.Tt5)
    totals_p = (state.Pt2, state.Pt3, state.Pt4, state.Pt5)
    expo = p.gamma / (p.gamma - 1.0)
    temps, pressures = [], []
    for station, c, tt, pt in zip((2, 3, 4, 5), speeds, totals_t, totals_p):
        t = tt - c * c / (2.0 * p.c_p)
        if not t > 0:
            raise SimulationFailure(NON_PHYSICAL_STATE, f"non-positive T{station}")
        mach2 = c * c / (p.gamma * p.R * t)
        if mach2 >= 1.0:
            raise SimulationFailure(SUPERSONIC_INTERNAL_FLOW, f"station {station}")
        temps.append(t)
        pressures.append(pt / (1.0 + 0.5 * (p.gamma - 1.0) * mach2) ** expo)
    rho_r = p.rho_ram
    c2, c3, c4, c5 = speeds
    return StaticState(
        *temps, *pressures,
        C2x=c2, C3m=c3, C4m=c4, C5x=c5,
        T1r=p.T_a, T2r=state.Tt2r, T3r=state.Tt3r,
        P2r=rho_r * p.R * state.Tt2r, P3r=rho_r * p.R * state.Tt3r,
        C2_norm=c2, C3_norm=c3, C4_norm=c4, C5_norm=c5,
    )


def machine_volumes(x: DesignVector, params: FixedParameters = DEFAULT_PARAMS):
    """Blade and body volumes ``(Vc_blade, Vc_body, Vt_blade, Vt_body)`` in m^3."""
    p = params
    vc_blade = p.e_c * (p.h_c * x.r3 * (x.r3 - x.r2p) / 2.0
                        - (x.r3 - x.r2t) * (p.h_c * x.r3 - x.b3) / 2.0)
    vc_body = (math.pi * x.r3**2 * p.h_c * (x.r3 + x.r2p) / 3.0
               - math.pi * p.h_c * x.r2p**3 / 3.0)
    vt_blade = p.e_t * (p.h_t * x.r4 * (x.r4 - x.r5p) / 2.0
                        - (x.r4 - x.r5t) * (p.h_t * x.r4 - x.b4) / 2.0)
    vt_body = (math.pi * x.r4**2 * p.h_t * (x.r4 + x.r5p) / 3.0
               - math.pi * p.h_t * x.r5p**3 / 3.0)
    return vc_blade, vc_body, vt_blade, vt_body


def exchanger_mass(x: DesignVector, params: FixedParameters = DEFAULT_PARAMS) -> float:
    return params.rho_hx * (x.Lx1 * x.Ly1 * x.Lz1 + x.Lx2 * x.Ly2 * x.Lz2)


def compute_mass(x: DesignVector, params: FixedParameters = DEFAULT_PARAMS) -> float:
    """Total mass (kg): two exchanger cores plus compressor and turbine."""
    vc_blade, vc_body, vt_blade, vt_body = machine_volumes(x, params)
    steel = params.Z_c * vc_blade + vc_body + params.Z_t * vt_blade + vt_body
    return exchanger_mass(x, params) + params.rho_steel * steel


def compute_entropy_rate(statics: StaticState, x: DesignVector,
                         params: FixedParameters = DEFAULT_PARAMS) -> float:
    """Entropy generation rate (W/K) of both streams, relative to ambient."""
    p = params
    bleed = p.c_p * math.log(statics.T5 / p.T_a) - p.R * math.log(statics.P5 / p.P_a)
    ram = p.c_p * math.log(statics.T3r / p.T_a) - p.R * math.log(statics.P3r / p.P_a)
    return x.mdot * bleed + x.mdot_r * ram


def constraint_values(x, statics, eps1, eps2, omega, params=DEFAULT_PARAMS):
    p = params
    sound = lambda t: math.sqrt(p.gamma * p.R * t)  # noqa: E731
    s = statics
    return np.array([
        p.T_min - s.T5,
        s.T5 - p.T_max,
        p.P_min - s.P5,
        s.P5 - p.P_max,
        0.5 - eps1,
        eps1 - 0.9,
        0.5 - eps2,
        eps2 - 0.9,
        s.C2_norm - 0.95 * sound(s.T2),
        s.C3_norm - 0.95 * sound(s.T3),
        s.C4_norm - 0.95 * sound(s.T4),
        s.C5_norm - 0.95 * sound(s.T5),
        x.r3 * omega - sound(s.T3),
        x.r4 * omega - sound(s.T4),
        compute_heat_load(p) - x.mdot * p.c_p * (p.T_c - s.T5),
    ])


@dataclass
class Simulator:
    """The ECS simulator with a fixed parameter set and effectiveness closure."""

    params: FixedParameters = field(default_factory=FixedParameters)
    effectiveness_model: object = None

    def __call__(self, x) -> SimulationOutcome:
        return evaluate(x, self.params, self.effectiveness_model)


def evaluate(x, params: FixedParameters = DEFAULT_PARAMS,
             effectiveness_model=None) -> SimulationOutcome:
    """Run the full model for one design.

    ``x`` may be a :class:`DesignVector` or an array in ``DESIGN_NAMES`` order.
    """
    if not isinstance(x, DesignVector):
        x = DesignVector.from_array(x)
    report = check_domain(x, params)
    if not report.ok:
        return SimulationOutcome(False, reason=FailureReason(DOMAIN_VIOLATION, report.violated))
    try:
        omega, w_c, w_t = solve_shaft_speed(x, params)
        if not (w_c > 0 and w_t < 0):
            raise SimulationFailure(NON_PHYSICAL_STATE, "machine power sign")
        eps1 = float(hx_effectiveness((x.Lx1, x.Ly1, x.Lz1), x.mdot, x.mdot_r,
                                      params, effectiveness_model))
        eps2 = float(hx_effectiveness((x.Lx2, x.Ly2, x.Lz2), x.mdot, x.mdot_r,
                                      params, effectiveness_model))
        state = solve_thermal_state(x, params, eps1, eps2, w_c, w_t, omega)
        statics = compute_static_state(state, x, params)
    except SimulationFailure as failure:
        return SimulationOutcome(False, reason=failure.reason)
    objectives = np.array([compute_mass(x, params),
                           compute_entropy_rate(statics, x, params)])
    constraints = constraint_values(x, statics, eps1, eps2, omega, params)
    return SimulationOutcome(True, objectives=objectives, constraints=constraints,
                             state=state, statics=statics, effectiveness=(eps1, eps2))
