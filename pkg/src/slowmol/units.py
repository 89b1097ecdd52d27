"""Unit conventions shared across the package.

Internal unit system: microseconds (time), micrometers (length),
rad/us (angular frequency), hbar = 1.  One um/us equals exactly one
m/s, so group velocities read directly in m/s.
"""

import math

# Signal vacuum speed in um/us (numerically equal to m/s).
C_VACUUM_UM_PER_US = 2.998e8

TWO_PI = 2.0 * math.pi


def rad_per_us_from_hz(f_hz: float) -> float:
    """Angular frequency in rad/us for an ordinary frequency in Hz."""
    return TWO_PI * f_hz * 1e-6


def rad_per_us_from_per_s(w_per_s: float) -> float:
    """rad/us for a rate already given in rad/s (or 1/s)."""
    return w_per_s * 1e-6
