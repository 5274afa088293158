"""Environment control system simulator (mass vs. entropy generation)."""

from .effectiveness import (
    CompactCrossflowEffectiveness,
    EffectivenessModel,
    crossflow_unmixed_effectiveness,
    hx_effectiveness,
)
from .model import (
    CONSTRAINT_NAMES,
    OBJECTIVE_NAMES,
    DomainReport,
    FailureReason,
    SimulationFailure,
    SimulationOutcome,
    Simulator,
    StateVector,
    StaticState,
    check_domain,
    compute_entropy_rate,
    compute_heat_load,
    compute_mass,
    compute_static_state,
    domain_mask,
    evaluate,
    exchanger_mass,
    restriction_margins,
    solve_shaft_speed,
    solve_thermal_state,
)
from .parameters import (
    DEFAULT_PARAMS,
    DESIGN_BOUNDS,
    DESIGN_NAMES,
    LOWER,
    UPPER,
    DesignVector,
    FixedParameters,
    mid_box,
)
from .table2 import REPORTED_ENTROPY, REPORTED_MASS, table2_point, table2_points
