"""Biphoton temporal waveforms, Fabry-Perot filtering and width/bandwidth mapping.

A :class:`Waveform` holds point samples of the anti-Stokes arrival-time
density after a Stokes detection, ``intensity[k]`` at ``tau_k = origin +
k * bin_width``. Samples that are exactly zero mark the outside of the
support; a jump from zero straight to above half maximum is a hard edge and
is located at the first non-zero sample.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, InfeasibleError, ResolutionError, ShapeError, TruncationError

LN2 = math.log(2.0)
KERNEL_DEPTH = 40.0  # impulse response truncated at exp(-KERNEL_DEPTH)


@dataclass(frozen=True, eq=False)
class Waveform:
    bin_width: float  # s
    origin: float  # s, tau of sample 0
    intensity: np.ndarray  # 1/s, sum * bin_width == 1

    def __post_init__(self):
        arr = np.asarray(self.intensity, dtype=float)
        if self.bin_width <= 0:
            raise DomainError("bin_width must be > 0")
        if arr.ndim != 1 or arr.size == 0:
            raise ShapeError("intensity must be a non-empty 1D array")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ShapeError("intensity must be finite and non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "intensity", arr)

    @property
    def taus(self):
        return self.origin + self.bin_width * np.arange(self.intensity.size)

    @property
    def total(self):
        return float(self.intensity.sum() * self.bin_width)

    def normalized(self):
        total = self.total
        if total <= 0:
            raise ShapeError("cannot normalise an all-zero profile")
        return Waveform(self.bin_width, self.origin, self.intensity / total)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["tau_seconds", "intensity_per_second"])
            for tau, value in zip(self.taus, self.intensity):
                writer.writerow([repr(float(tau)), repr(float(value))])


@dataclass(frozen=True)
class FilterSpec:
    lorentzian_fwhm: float  # Hz
    peak_transmission: float = 1.0

    def __post_init__(self):
        if self.lorentzian_fwhm <= 0:
            raise DomainError("filter FWHM must be > 0")
        if not 0.0 < self.peak_transmission <= 1.0:
            raise DomainError("peak transmission must lie in (0, 1]")

    @property
    def decay_rate(self):
        """Amplitude-free intensity decay rate of the one-sided impulse response."""
        return math.pi * self.lorentzian_fwhm


def ideal_waveform(decay_rate, bin_width, span):
    """One-sided exponential wavepacket exp(-decay_rate tau), tau >= 0, normalised."""
    if decay_rate <= 0 or bin_width <= 0:
        raise DomainError("decay rate and bin width must be > 0")
    if span * decay_rate < 10.0:
        raise TruncationError(f"span {span:.3g} s truncates the wavepacket; need >= 10 / decay_rate")
    n = int(math.floor(span / bin_width + 1e-9)) + 1
    k = np.arange(n)
    intensity = np.exp(-decay_rate * bin_width * k)
    return Waveform(bin_width, 0.0, intensity).normalized()


def filter_impulse_convolve(w, f, passes=1):
    """Convolve with the exponential impulse response of a Lorentzian filter.

    ``passes`` counts filtered channels (2 when both Stokes and anti-Stokes
    arms carry an etalon). The output grid extends so no probability is lost.
    """
    dt = w.bin_width
    if dt > 0.1 / f.lorentzian_fwhm:
        raise ResolutionError(
            f"bin width {dt:.3g} s does not resolve a {f.lorentzian_fwhm:.3g} Hz filter "
            f"(need <= {0.1 / f.lorentzian_fwhm:.3g} s)"
        )
    rate = f.decay_rate
    m = int(math.ceil(KERNEL_DEPTH / (rate * dt))) + 1
    kernel = np.exp(-rate * dt * np.arange(m))
    kernel /= kernel.sum()
    out = np.asarray(w.intensity, dtype=float)
    for _ in range(passes):
        out = np.convolve(out, kernel)
    return Waveform(dt, w.origin, out).normalized()


def filter_channels(w, filters):
    """Apply one impulse response per filter in ``filters`` (skipping ``None``)."""
    for f in filters:
        if f is not None:
            w = filter_impulse_convolve(w, f)
    return w


def _edge(intensity, start, step, half):
    # Walk from the peak until the profile drops below half maximum.
    n = intensity.size
    i = start
    while 0 <= i + step < n and intensity[i + step] >= half:
        i += step
    j = i + step
    if j < 0 or j >= n or intensity[j] == 0.0:
        return float(i)
    a, b = intensity[i], intensity[j]
    return i + step * (a - half) / (a - b)


def fwhm(w):
    """Full width at half maximum [s], linear interpolation between samples."""
    y = np.asarray(w.intensity, dtype=float)
    peak = y.max()
    if peak <= 0:
        raise ShapeError("all-zero profile has no width")
    top = np.flatnonzero(y == peak)
    half = 0.5 * peak
    above = y >= half
    lo, hi = top[0], top[-1]
    while lo > 0 and above[lo - 1]:
        lo -= 1
    while hi < y.size - 1 and above[hi + 1]:
        hi += 1
    if np.count_nonzero(above) != hi - lo + 1:
        raise ShapeError("profile is multimodal at half maximum")
    if lo == 0 and hi == y.size - 1 and y.size > 1 and np.all(y == peak):
        raise ShapeError("flat profile has no half-maximum crossing")
    left = _edge(y, lo, -1, half)
    right = _edge(y, hi, +1, half)
    return (right - left) * w.bin_width


def bandwidth_from_width(temporal_fwhm):
    """Spectral bandwidth [Hz] assigned to a temporal FWHM [s] (1 / FWHM convention)."""
    if temporal_fwhm <= 0:
        raise DomainError("temporal FWHM must be > 0")
    return 1.0 / temporal_fwhm


def width_from_bandwidth(bandwidth):
    if bandwidth <= 0:
        raise DomainError("bandwidth must be > 0")
    return 1.0 / bandwidth


def waveform_for_bandwidth(target_bandwidth, filters=(), bin_width=10e-12, span_factor=12.0):
    """Filtered exponential waveform whose FWHM maps to ``target_bandwidth``.

    Solves for the bare decay rate; returns ``(waveform, decay_rate)``.
    """
    target = width_from_bandwidth(target_bandwidth)
    active = [f for f in filters if f is not None]

    def build(rate):
        bare = ideal_waveform(rate, bin_width, span_factor * max(1.0 / rate, target))
        return filter_channels(bare, active)

    def mismatch(log_rate):
        return fwhm(build(math.exp(log_rate))) - target

    if not active:
        rate = LN2 / target
        return build(rate), rate
    lo = math.log(LN2 / target)  # bare width alone equals the target; filters only widen
    hi = math.log(LN2 / (20.0 * bin_width))
    if mismatch(hi) > 0:
        raise InfeasibleError(
            f"target bandwidth {target_bandwidth:.4g} Hz exceeds what the filters pass"
        )
    log_rate = brentq(mismatch, lo, hi, xtol=1e-12, rtol=1e-12)
    rate = math.exp(log_rate)
    return build(rate), rate
