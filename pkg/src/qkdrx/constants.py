"""Physical constants, unit conventions and dB helpers.

All public functions in this package take and return SI base units:
currents in A, PSDs in A^2/Hz, root spectral densities in A/sqrt(Hz),
optical power in W, capacitance in F, frequency in Hz, temperature in K.
Quadrature variances are in shot-noise units (SNU). Decibel conversions
are always explicit and power-like (10*log10); the one exception is CMRR,
which is defined on a current ratio (see ``receiver.cmrr_db``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class PhysicalConstants:
    q: float = 1.602176634e-19  # C
    k: float = 1.380649e-23  # J/K
    h: float = 6.62607015e-34  # J s
    c: float = 2.99792458e8  # m/s


CONSTANTS = PhysicalConstants()
Q = CONSTANTS.q
K_B = CONSTANTS.k
H = CONSTANTS.h
C_LIGHT = CONSTANTS.c

DEFAULT_TEMPERATURE = 300.0


def thermal_voltage(temperature: float = DEFAULT_TEMPERATURE) -> float:
    """kT/q in volts (25.85 mV at 300 K)."""
    return K_B * temperature / Q


def db_from_ratio(ratio: float) -> float:
    if not ratio > 0:
        raise DomainError(f"dB undefined for non-positive ratio {ratio!r}")
    return 10.0 * math.log10(ratio)


def ratio_from_db(db: float) -> float:
    return 10.0 ** (db / 10.0)


def ideal_responsivity(wavelength: float) -> float:
    """Responsivity (A/W) of a photodiode with unity quantum efficiency."""
    if not wavelength > 0:
        raise DomainError(f"wavelength must be positive, got {wavelength!r}")
    return Q * wavelength / (H * C_LIGHT)
