"""Excitation/detection beam geometry and the cell-viewport displacement model.

Coordinates run along the excitation axis with the interaction-region
centre at ``s = 0``. Displacing the cell by ``z`` puts the inner face of the
output viewport at ``s = z``: atoms exist only for ``s < z`` (and
``s > z - cell_length``). Anti-Stokes photons emitted at ``s`` cross
``z - s`` of vapor before leaving through that viewport.

The longitudinal atom weight is a Gaussian with FWHM equal to the geometric
overlap length, truncated at +-1 overlap length (where the two beam cores no
longer intersect) and renormalised.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DomainError, InfeasibleGeometryError
from .vapor import C_LIGHT, scaled_od

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))
SUPPORT_FWHMS = 1.0  # weight truncated at +-SUPPORT_FWHMS * interaction_length


def phase_mismatch_length(splitting):
    """Length [m] over which a Stokes/anti-Stokes splitting [Hz] accrues a pi phase error."""
    if splitting <= 0:
        raise DomainError("splitting must be > 0")
    return C_LIGHT / (2.0 * splitting)


def overlap_length(angle, excitation_diameter, detection_diameter):
    """Length [m] along which two beams crossing at ``angle`` [rad] overlap."""
    if not 0.0 < angle < math.pi / 2:
        raise DomainError("crossing angle must lie in (0, pi/2)")
    return (excitation_diameter + detection_diameter) / math.sin(angle)


def optimal_angle(excitation_diameter, detection_diameter, phase_length):
    """Crossing angle [rad] whose overlap length equals ``phase_length``."""
    total = excitation_diameter + detection_diameter
    if total >= phase_length:
        raise InfeasibleGeometryError(
            f"beam diameters ({total:.3g} m) do not fit within phase-mismatch length "
            f"({phase_length:.3g} m)"
        )
    return math.asin(total / phase_length)


@dataclass(frozen=True)
class BeamGeometry:
    crossing_angle: float  # rad
    excitation_diameter: float  # m
    detection_diameter: float  # m
    stokes_antistokes_splitting: float = 13.6e9  # Hz
    waist: float = 290e-6  # m
    cell_length: float = 0.075  # m
    displacement_z: float = 0.0  # m

    def __post_init__(self):
        if not 0.0 < self.crossing_angle < math.pi / 2:
            raise DomainError("crossing angle must lie in (0, pi/2)")
        lengths = (
            self.excitation_diameter,
            self.detection_diameter,
            self.stokes_antistokes_splitting,
            self.waist,
            self.cell_length,
        )
        if min(lengths) <= 0:
            raise DomainError("diameters, splitting, waist and cell length must be > 0")

    @property
    def interaction_length(self):
        return overlap_length(self.crossing_angle, self.excitation_diameter, self.detection_diameter)

    @property
    def phase_length(self):
        return phase_mismatch_length(self.stokes_antistokes_splitting)

    def is_valid(self, rtol=1e-9):
        """True when the overlap stays within the phase-mismatch length."""
        return self.interaction_length <= self.phase_length * (1.0 + rtol)


def _support(interaction_length):
    if interaction_length <= 0:
        raise DomainError("interaction_length must be > 0")
    half = SUPPORT_FWHMS * interaction_length
    return half, interaction_length * FWHM_TO_SIGMA


def _weight_cdf(s, interaction_length):
    half, sigma = _support(interaction_length)
    lo, hi = ndtr(-half / sigma), ndtr(half / sigma)
    s = np.clip(s, -half, half)
    return (ndtr(s / sigma) - lo) / (hi - lo)


def effective_atom_fraction(z, interaction_length, cell_length=None):
    """Share of the interaction-region weight lying inside the displaced cell."""
    f = _weight_cdf(np.asarray(z, dtype=float), interaction_length)
    if cell_length is not None:
        f = f - _weight_cdf(np.asarray(z, dtype=float) - cell_length, interaction_length)
    return float(f) if np.ndim(f) == 0 else f


def antistokes_mean_transmission(z, interaction_length, vapor, cell_length=None, n_points=2001):
    """Weight-averaged anti-Stokes transmission from emission point to the output viewport.

    Composite Simpson quadrature on ``n_points`` nodes over the in-cell part of
    the weight. Returns 1 when no part of the weight lies in the cell.
    """
    half, sigma = _support(interaction_length)
    lo = -half if cell_length is None else max(-half, z - cell_length)
    hi = min(half, z)
    if hi <= lo:
        return 1.0
    if n_points < 3:
        raise DomainError("n_points must be >= 3")
    n = n_points if n_points % 2 else n_points + 1
    s = np.linspace(lo, hi, n)
    w = np.exp(-0.5 * (s / sigma) ** 2)
    trans = np.exp(-scaled_od(vapor, np.maximum(z - s, 0.0)))
    h = (hi - lo) / (n - 1)
    simpson = np.ones(n)
    simpson[1:-1:2] = 4.0
    simpson[2:-1:2] = 2.0
    den = np.dot(simpson, w)
    if den * h / 3.0 <= 0:
        return 1.0
    return float(np.dot(simpson, w * trans) / den)
