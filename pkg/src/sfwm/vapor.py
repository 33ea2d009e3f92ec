"""Rubidium vapor: number density, Doppler width, optical depth and absorption.

Vapor pressure uses the liquid-phase rubidium correlation tabulated in
D. A. Steck, "Rubidium 87 D Line Data":

    log10(P / Torr) = 2.881 + 4.312 - 4040 / T

applied over 250-500 K. The density is the ideal-gas value P / (k_B T).
The resonant optical depth is a calibrated input, scaled linearly with path
length and (when moving to another temperature) with density.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy import constants

from .errors import DomainError

K_B = constants.k
C_LIGHT = constants.c
TORR = constants.torr

RB87_MASS = 1.443160648e-25  # kg
RB87_D1_FREQUENCY = 377.107463380e12  # Hz, 5S1/2 -> 5P1/2
RB87_D2_FREQUENCY = 384.230484468e12  # Hz, 5S1/2 -> 5P3/2

# Liquid-phase vapor-pressure constants (Torr, K)
VP_A = 2.881 + 4.312
VP_B = 4040.0
T_MIN, T_MAX = 250.0, 500.0

DEFAULT_OD = 3.4
DEFAULT_REFERENCE_PATH = 0.075  # m, source cell length


def celsius(t_c):
    return t_c + constants.zero_Celsius


def vapor_pressure(temperature):
    """Saturated Rb vapor pressure in pascal."""
    _check_temperature(temperature)
    return 10.0 ** (VP_A - VP_B / np.asarray(temperature, dtype=float)) * TORR


def vapor_density(temperature):
    """Atomic number density [m^-3] of saturated Rb vapor at ``temperature`` [K]."""
    _check_temperature(temperature)
    t = np.asarray(temperature, dtype=float)
    n = vapor_pressure(t) / (K_B * t)
    return float(n) if n.ndim == 0 else n


def doppler_sigma(temperature, line_frequency=RB87_D1_FREQUENCY, atomic_mass=RB87_MASS):
    """1-sigma width [Hz] of the 1D Doppler profile, f * sqrt(k_B T / m c^2)."""
    if temperature <= 0 or line_frequency <= 0 or atomic_mass <= 0:
        raise DomainError("temperature, line frequency and mass must be positive")
    return line_frequency * np.sqrt(K_B * temperature / (atomic_mass * C_LIGHT**2))


@dataclass(frozen=True)
class VaporState:
    temperature: float  # K
    density: float  # m^-3
    doppler_sigma: float  # Hz
    od_resonant: float = DEFAULT_OD
    reference_path: float = DEFAULT_REFERENCE_PATH  # m

    def __post_init__(self):
        if self.od_resonant < 0:
            raise DomainError("od_resonant must be >= 0")
        if self.reference_path <= 0:
            raise DomainError("reference_path must be > 0")

    @classmethod
    def at(cls, temperature, od_resonant=DEFAULT_OD, reference_path=DEFAULT_REFERENCE_PATH):
        """State at ``temperature`` [K] with OD calibrated at that same temperature."""
        return cls(
            temperature=float(temperature),
            density=vapor_density(temperature),
            doppler_sigma=float(doppler_sigma(temperature)),
            od_resonant=float(od_resonant),
            reference_path=float(reference_path),
        )

    def at_temperature(self, temperature):
        """Move to another temperature; the calibrated OD follows the density."""
        density = vapor_density(temperature)
        return replace(
            self,
            temperature=float(temperature),
            density=density,
            doppler_sigma=float(doppler_sigma(temperature)),
            od_resonant=self.od_resonant * density / self.density,
        )


def scaled_od(state, path_length):
    """Optical depth over ``path_length`` [m]; linear in path. Accepts arrays."""
    path = np.asarray(path_length, dtype=float)
    if np.any(path < 0):
        raise DomainError("path length must be >= 0")
    od = state.od_resonant * path / state.reference_path
    return float(od) if od.ndim == 0 else od


def line_transmission(od, detuning, doppler_sigma):
    """Transmission through a Doppler (Gaussian) absorption line of peak depth ``od``."""
    if np.any(np.asarray(od) < 0):
        raise DomainError("od must be >= 0")
    if doppler_sigma <= 0:
        raise DomainError("doppler_sigma must be > 0")
    x = np.asarray(detuning, dtype=float) / doppler_sigma
    t = np.exp(-np.asarray(od, dtype=float) * np.exp(-0.5 * x * x))
    return float(t) if t.ndim == 0 else t


def _check_temperature(temperature):
    t = np.asarray(temperature, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < T_MIN) or np.any(t > T_MAX):
        raise DomainError(
            f"temperature outside vapor-pressure correlation range [{T_MIN}, {T_MAX}] K"
        )
