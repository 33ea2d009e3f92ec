"""Warm-vapor spontaneous four-wave-mixing photon-pair source toolkit.

Rate/noise budget model, vapor and beam geometry, biphoton waveforms,
Monte-Carlo detector streams and g2 correlation estimators.
"""

__version__ = "0.1.0"

from .budget import (
    CorrelationSummary,
    RateBudget,
    background_correct,
    cs_violation,
    forward_coincidences,
    forward_singles,
    g2_peak,
    heralded_g2,
    scale_budget,
    solve_budget,
)
from .biphoton import FilterSpec, Waveform, bandwidth_from_width, filter_impulse_convolve, fwhm, ideal_waveform
from .correlate import CorrelationHistogram, auto_correlate, cross_correlate, peak_and_window
from .geometry import BeamGeometry, optimal_angle, overlap_length, phase_mismatch_length
from .montecarlo import ThermalNoise, TimestampStream, hbt_split, simulate_stream
from .vapor import VaporState, doppler_sigma, vapor_density

__all__ = [
    "BeamGeometry",
    "CorrelationHistogram",
    "CorrelationSummary",
    "FilterSpec",
    "RateBudget",
    "ThermalNoise",
    "TimestampStream",
    "VaporState",
    "Waveform",
    "auto_correlate",
    "background_correct",
    "bandwidth_from_width",
    "cross_correlate",
    "cs_violation",
    "doppler_sigma",
    "filter_impulse_convolve",
    "forward_coincidences",
    "forward_singles",
    "fwhm",
    "g2_peak",
    "hbt_split",
    "heralded_g2",
    "ideal_waveform",
    "optimal_angle",
    "overlap_length",
    "peak_and_window",
    "phase_mismatch_length",
    "scale_budget",
    "simulate_stream",
    "solve_budget",
    "vapor_density",
]
