"""Seven published trade-off designs, keyed 1..7, with their reported mass
and entropy rate.  Values are rounded to two decimals as published."""

from .parameters import DESIGN_NAMES, DesignVector

_COLUMNS = {
    "mdot": (2.95, 2.92, 2.94, 2.94, 2.94, 2.95, 2.94),
    "mdot_r": (7.74, 6.86, 5.63, 5.06, 4.64, 4.40, 4.27),
    "r2p": (0.07, 0.05, 0.05, 0.03, 0.03, 0.07, 0.04),
    "r2t": (0.10, 0.08, 0.08, 0.08, 0.06, 0.09, 0.10),
    "r3": (0.10, 0.11, 0.10, 0.10, 0.12, 0.12, 0.13),
    "b3": (0.01, 0.01, 0.05, 0.05, 0.04, 0.02, 0.03),
    "beta3": (0.36, 0.74, 0.97, -0.16, 0.61, 0.94, 0.48),
    "r5p": (0.03,) * 7,
    "r5t": (0.05,) * 7,
    "r4": (0.10, 0.10, 0.11, 0.12, 0.11, 0.10, 0.11),
    "b4": (0.02, 0.02, 0.04, 0.02, 0.04, 0.03, 0.03),
    "alpha4": (1.04, 0.50, 0.89, 1.01, 0.44, 0.79, 0.30),
    "Lx1": (0.67, 0.65, 0.68, 0.68, 0.63, 0.69, 0.70),
    "Ly1": (0.65, 0.68, 0.61, 0.67, 0.67, 0.66, 0.65),
    "Lz1": (0.03, 0.04, 0.07, 0.12, 0.17, 0.20, 0.32),
    "Lx2": (0.66, 0.69, 0.66, 0.66, 0.70, 0.68, 0.69),
    "Ly2": (0.69, 0.53, 0.68, 0.65, 0.65, 0.68, 0.65),
    "Lz2": (0.03, 0.06, 0.09, 0.10, 0.17, 0.25, 0.36),
}

REPORTED_MASS = (49.78, 77.13, 117.00, 156.57, 240.03, 312.40, 466.69)
REPORTED_ENTROPY = (0.47, 0.45, 0.43, 0.43, 0.42, 0.41, 0.41)


def table2_point(k: int) -> DesignVector:
    """Design column ``k`` (1-based)."""
    if not 1 <= k <= 7:
        raise ValueError(f"table 2 point must be in 1..7, got {k}")
    return DesignVector(**{n: _COLUMNS[n][k - 1] for n in DESIGN_NAMES})


def table2_points():
    return [table2_point(k) for k in range(1, 8)]
