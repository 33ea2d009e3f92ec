"""Normalised g2(tau) histograms from sorted timestamp streams.

Every pair (t_i in s1, t_j in s2) with ``tau = t_j - t_i`` inside the range
is counted (all pairs in window, not start-stop). Bin ``k`` covers
``[tau_min + k w, tau_min + (k + 1) w)``; a delay exactly on an edge lands in
the upper bin. A scalar ``tau_range`` gives bins centred on multiples of the
bin width, the zero-delay bin centred on 0.

Arithmetic is done on doubled picosecond integers so half-picosecond bin
edges stay exact.
"""

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DomainError, NoPeakError, StreamFormatError
from .montecarlo import PS, hbt_split


@njit(cache=True, nogil=True)
def _count_pairs(a, b, tmin2, bin2, nbins, counts):
    nb = b.size
    span2 = bin2 * nbins
    lo = 0
    for i in range(a.size):
        t2 = 2 * a[i] + tmin2
        # first b with 2 b - t2 >= 0, i.e. tau >= tau_min
        while lo < nb and 2 * b[lo] < t2:
            lo += 1
        j = lo
        while j < nb:
            d = 2 * b[j] - t2
            if d >= span2:
                break
            counts[d // bin2] += 1
            j += 1


@dataclass(frozen=True, eq=False)
class CorrelationHistogram:
    bin_width: float  # s
    tau_min: float  # s
    tau_max: float  # s
    counts: np.ndarray
    normalized: np.ndarray
    stderr: np.ndarray
    rates: tuple  # (R_1, R_2) Hz
    duration: float  # s
    empty: bool = False

    @property
    def taus(self):
        """Bin centres [s]."""
        return self.tau_min + self.bin_width * (np.arange(self.counts.size) + 0.5)

    @property
    def edges(self):
        return self.tau_min + self.bin_width * np.arange(self.counts.size + 1)

    @property
    def accidentals_per_bin(self):
        return self.rates[0] * self.rates[1] * self.bin_width * self.duration

    def bin_of(self, tau):
        return int(math.floor((tau - self.tau_min) / self.bin_width))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["tau_seconds", "counts", "g2", "stderr"])
            for row in zip(self.taus, self.counts, self.normalized, self.stderr):
                writer.writerow([repr(float(row[0])), int(row[1]), repr(float(row[2])), repr(float(row[3]))])


def _ps(value, name):
    x = value * PS
    r = round(x)
    if r <= 0 and name == "bin width":
        raise DomainError("bin width must be >= 1 ps")
    if abs(x - r) > 1e-6 * max(1.0, abs(x)):
        raise DomainError(f"{name} must be a whole number of picoseconds")
    return int(r)


def _grid(bin_width, tau_range):
    bin_ps = _ps(bin_width, "bin width")
    if np.ndim(tau_range) == 0:
        if tau_range <= 0:
            raise DomainError("tau_range must be > 0")
        k = max(0, math.ceil(tau_range / bin_width - 0.5 - 1e-9))
        nbins = 2 * k + 1
        tmin2 = -(2 * k + 1) * bin_ps
    else:
        lo, hi = tau_range
        if hi <= lo:
            raise DomainError("tau_range must have tau_max > tau_min")
        tmin2 = 2 * _ps(lo, "tau_min")
        nbins = math.ceil((hi - lo) / bin_width - 1e-9)
    return bin_ps, tmin2, nbins


def histogram_from_counts(counts, bin_width, tau_min, rates, duration, empty=False):
    counts = np.asarray(counts, dtype=np.int64)
    r1, r2 = rates
    scale = r1 * r2 * bin_width * duration
    if scale > 0:
        normalized = counts / scale
        with np.errstate(divide="ignore", invalid="ignore"):
            stderr = np.where(counts > 0, normalized / np.sqrt(counts), 1.0 / scale)
    else:
        normalized = np.zeros(counts.size)
        stderr = np.zeros(counts.size)
    return CorrelationHistogram(
        bin_width=bin_width,
        tau_min=tau_min,
        tau_max=tau_min + bin_width * counts.size,
        counts=counts,
        normalized=normalized,
        stderr=stderr,
        rates=(r1, r2),
        duration=duration,
        empty=empty,
    )


def _as_int64(s):
    t = s.timestamps.astype(np.int64)
    if t.size > 1 and np.any(t[1:] < t[:-1]):
        bad = int(np.flatnonzero(t[1:] < t[:-1])[0]) + 1
        raise StreamFormatError(f"stream not time-sorted at record {bad}")
    return t


def cross_correlate(s1, s2, bin_width, tau_range, workers=1):
    """Histogram of delays t2 - t1 over all pairs within ``tau_range``."""
    if bin_width <= 0:
        raise DomainError("bin width must be > 0")
    a, b = _as_int64(s1), _as_int64(s2)
    bin_ps, tmin2, nbins = _grid(bin_width, tau_range)
    duration = max(s1.duration, s2.duration)
    counts = np.zeros(nbins, dtype=np.int64)
    tau_min = tmin2 / (2.0 * PS)
    if a.size == 0 or b.size == 0:
        return histogram_from_counts(counts, bin_width, tau_min, (a.size / duration, b.size / duration), duration, True)

    bin2 = 2 * bin_ps
    if workers <= 1 or a.size < 2 * workers:
        _count_pairs(a, b, tmin2, bin2, nbins, counts)
    else:
        # Split s1 into contiguous slices; each sees only the s2 records it can pair with.
        cuts = np.linspace(0, a.size, workers + 1).astype(np.int64)
        lo_tau = tmin2 // 2 - 1
        hi_tau = (tmin2 + bin2 * nbins) // 2 + 1

        def job(k):
            part = a[cuts[k]:cuts[k + 1]]
            local = np.zeros(nbins, dtype=np.int64)
            if part.size:
                j0 = np.searchsorted(b, part[0] + lo_tau, side="left")
                j1 = np.searchsorted(b, part[-1] + hi_tau, side="right")
                _count_pairs(part, b[j0:j1], tmin2, bin2, nbins, local)
            return local

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for local in pool.map(job, range(workers)):
                counts += local
    return histogram_from_counts(counts, bin_width, tau_min, (a.size / duration, b.size / duration), duration)


def auto_correlate(s, bin_width, tau_range, seed, workers=1):
    """Autocorrelation via a 50/50 split of ``s`` onto two virtual detectors."""
    a, b = hbt_split(s, seed)
    return cross_correlate(a, b, bin_width, tau_range, workers=workers)


def zero_delay(h):
    """(g2, stderr) in the bin containing tau = 0."""
    k = h.bin_of(0.0)
    if not 0 <= k < h.counts.size:
        raise DomainError("histogram does not cover tau = 0")
    return float(h.normalized[k]), float(h.stderr[k])


@dataclass(frozen=True)
class PeakSummary:
    g2_peak: float
    g2_peak_stderr: float
    peak_tau: float  # s
    fwhm_window: float  # s
    window: tuple  # (start, stop) s
    coincidences_in_window: float  # Hz


def _crossing(x, y, i, step, half):
    # Move from the peak bin i until y drops below half, interpolate linearly.
    n = y.size
    while 0 <= i + step < n and y[i + step] >= half:
        i += step
    j = i + step
    if j < 0 or j >= n:
        return x[i]
    return x[i] + (x[j] - x[i]) * (y[i] - half) / (y[i] - y[j])


def peak_and_window(h, significance=5.0, smooth=3):
    """Peak g2, its delay, the FWHM of the excess g2 - 1 and the coincidence rate inside it.

    The width is read off the excess after a ``smooth``-bin moving average:
    taking the half level from the single largest noisy bin biases the width
    low. ``smooth=1`` uses the raw bins.
    """
    if h.empty:
        raise NoPeakError("empty histogram")
    if smooth < 1 or smooth % 2 == 0:
        raise DomainError("smooth must be a positive odd number of bins")
    k = int(np.argmax(h.normalized))
    if not h.normalized[k] > 1.0 + significance * h.stderr[k]:
        raise NoPeakError(
            f"no bin exceeds 1 + {significance:g} sigma (max g2 = {h.normalized[k]:.4g})"
        )
    x = h.taus
    excess = np.convolve(h.normalized - 1.0, np.ones(smooth) / smooth, mode="same")
    ks = int(np.argmax(excess))
    half = 0.5 * excess[ks]
    left = _crossing(x, excess, ks, -1, half)
    right = _crossing(x, excess, ks, +1, half)
    edges = h.edges
    overlap = np.clip(np.minimum(edges[1:], right) - np.maximum(edges[:-1], left), 0.0, None)
    in_window = float(np.sum(h.counts * overlap / h.bin_width))
    return PeakSummary(
        g2_peak=float(h.normalized[k]),
        g2_peak_stderr=float(h.stderr[k]),
        peak_tau=float(x[k]),
        fwhm_window=float(right - left),
        window=(float(left), float(right)),
        coincidences_in_window=in_window / h.duration,
    )


def window_g2(h, start, stop):
    """Normalised g2 averaged over the delay window [start, stop)."""
    edges = h.edges
    overlap = np.clip(np.minimum(edges[1:], stop) - np.maximum(edges[:-1], start), 0.0, None)
    frac = overlap / h.bin_width
    counts = float(np.sum(h.counts * frac))
    expected = h.accidentals_per_bin * float(np.sum(frac))
    if expected <= 0:
        raise NoPeakError("no accidental baseline to normalise against")
    return counts / expected, math.sqrt(max(counts, 1.0)) / expected


def signal_to_accidental_g2(h, window, signal_range=None):
    """Histogram estimate of 1 + C_sg / C_ns for coincidence window ``window`` [s].

    C_sg is the excess over the accidental baseline summed across
    ``signal_range`` (default: whole histogram); C_ns is the accidental count
    expected in ``window``. Returns (g2, stderr).
    """
    if window <= 0:
        raise DomainError("window must be > 0")
    lo, hi = signal_range if signal_range is not None else (h.tau_min, h.tau_max)
    edges = h.edges
    overlap = np.clip(np.minimum(edges[1:], hi) - np.maximum(edges[:-1], lo), 0.0, None)
    frac = overlap / h.bin_width
    base = h.accidentals_per_bin
    if base <= 0:
        raise NoPeakError("no accidental baseline to normalise against")
    total = float(np.sum(h.counts * frac))
    signal = total - base * float(np.sum(frac))
    accidentals = base * window / h.bin_width
    return 1.0 + signal / accidentals, math.sqrt(max(total, 1.0)) / accidentals


def tail_mean(h, beyond):
    """Mean g2 over bins with |tau| > ``beyond`` and the standard error of that mean."""
    sel = np.abs(h.taus) > beyond
    if not np.any(sel):
        raise DomainError("no bins beyond the requested delay")
    n = int(np.count_nonzero(sel))
    counts = float(np.sum(h.counts[sel]))
    mean = counts / (h.accidentals_per_bin * n)
    return mean, math.sqrt(max(counts, 1.0)) / (h.accidentals_per_bin * n)
