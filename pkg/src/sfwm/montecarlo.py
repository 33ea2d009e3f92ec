"""Synthetic detector timestamp streams for a rate budget and biphoton waveform.

Time is split into fixed-length chunks, each drawn from its own generator
seeded by ``SeedSequence(seed, spawn_key=(chunk,))``. Chunk boundaries do not
depend on the worker count, so any number of threads yields the same stream.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError, ShapeError

PS = 1e12
STOKES, ANTISTOKES = 0, 1
DEFAULT_MAX_EVENTS = 50_000_000
DEFAULT_CHUNK = 1.0  # s


@dataclass(frozen=True, eq=False)
class TimestampStream:
    timestamps: np.ndarray  # uint64 picoseconds, sorted
    channels: np.ndarray  # uint8
    duration: float  # s
    seed: int | None = None

    def __post_init__(self):
        t = np.ascontiguousarray(self.timestamps, dtype=np.uint64)
        c = np.ascontiguousarray(self.channels, dtype=np.uint8)
        if t.shape != c.shape or t.ndim != 1:
            raise ShapeError("timestamps and channels must be 1D arrays of equal length")
        t.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "timestamps", t)
        object.__setattr__(self, "channels", c)

    def __len__(self):
        return self.timestamps.size

    @property
    def duration_ps(self):
        return int(round(self.duration * PS))

    def channel(self, ch):
        """Sub-stream holding only records tagged ``ch``."""
        keep = self.channels == ch
        return TimestampStream(self.timestamps[keep], self.channels[keep], self.duration, self.seed)

    def counts(self):
        return {ch: int(np.count_nonzero(self.channels == ch)) for ch in (STOKES, ANTISTOKES)}

    def rate(self):
        return len(self) / self.duration

    def is_sorted(self):
        t = self.timestamps
        if t.size < 2:
            return True
        return bool(np.all(t[1:] >= t[:-1]))

    def same_as(self, other):
        return (
            np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.channels, other.channels)
        )


@dataclass(frozen=True)
class ThermalNoise:
    """Bunched (thermal-like) share of the detected noise in each channel.

    ``bunching`` is the zero-delay autocorrelation of the noise component
    alone, 1 for Poissonian noise. Bunched photons come in pairs whose
    separation is exponential with mean ``coherence_time``.
    """

    bunching_stokes: float = 1.0
    bunching_antistokes: float = 1.0
    coherence_time: float = 1e-9  # s

    def __post_init__(self):
        if self.bunching_stokes < 1 or self.bunching_antistokes < 1:
            raise DomainError("bunching factors must be >= 1")
        if self.coherence_time <= 0:
            raise DomainError("coherence time must be > 0")


def expected_events(b, duration):
    p = b.pair_rate * (b.eta_stokes + b.eta_antistokes)
    noise = b.eta_stokes * b.noise_stokes + b.eta_antistokes * b.noise_antistokes
    return duration * (p + noise + b.background_stokes + b.background_antistokes)


def _cluster_rate(rate, bunching, coherence_time):
    # Pairs at rate q add q (f(tau) + f(-tau)) / R^2 to g2; f(0) = 1 / coherence_time.
    q = (bunching - 1.0) * coherence_time * rate * rate
    if 2.0 * q > rate:
        raise DomainError("bunching too strong for this rate and coherence time")
    return q


def _delay_sampler(w):
    weights = np.asarray(w.intensity, dtype=float)
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]

    def sample(rng, n):
        u = rng.random(n)
        k = np.searchsorted(cdf, u, side="right")
        k = np.minimum(k, cdf.size - 1)
        jitter = rng.random(n)
        tau = w.origin + (k + jitter) * w.bin_width
        return np.floor(tau * PS).astype(np.int64)

    return sample


def _uniform_times(rng, n, start, stop):
    return rng.integers(start, stop, size=n, dtype=np.int64)


def _chunk(b, sample_delay, thermal, seed, index, start, stop, end):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    span = (stop - start) / PS
    times, chans = [], []

    def emit(t, ch):
        t = t[(t >= 0) & (t < end)]
        times.append(t)
        chans.append(np.full(t.size, ch, dtype=np.uint8))

    # Pairs: Stokes at emission, anti-Stokes delayed by the waveform.
    n_pairs = rng.poisson(b.pair_rate * span)
    t_pair = _uniform_times(rng, n_pairs, start, stop)
    keep_s = rng.random(n_pairs) < b.eta_stokes
    keep_as = rng.random(n_pairs) < b.eta_antistokes
    emit(t_pair[keep_s], STOKES)
    t_as = t_pair[keep_as]
    emit(t_as + sample_delay(rng, t_as.size), ANTISTOKES)

    for ch, rate, bunching in (
        (STOKES, b.eta_stokes * b.noise_stokes, thermal.bunching_stokes),
        (ANTISTOKES, b.eta_antistokes * b.noise_antistokes, thermal.bunching_antistokes),
    ):
        q = _cluster_rate(rate, bunching, thermal.coherence_time) if bunching > 1 else 0.0
        n_single = rng.poisson((rate - 2.0 * q) * span)
        emit(_uniform_times(rng, n_single, start, stop), ch)
        if q > 0:
            n_cl = rng.poisson(q * span)
            first = _uniform_times(rng, n_cl, start, stop)
            gap = np.floor(rng.exponential(thermal.coherence_time, n_cl) * PS).astype(np.int64)
            emit(first, ch)
            emit(first + gap, ch)

    for ch, rate in ((STOKES, b.background_stokes), (ANTISTOKES, b.background_antistokes)):
        n_bg = rng.poisson(rate * span)
        emit(_uniform_times(rng, n_bg, start, stop), ch)

    return np.concatenate(times), np.concatenate(chans)


def _merge(parts, duration, seed):
    if parts:
        t = np.concatenate([p[0] for p in parts])
        c = np.concatenate([p[1] for p in parts])
    else:
        t = np.empty(0, dtype=np.int64)
        c = np.empty(0, dtype=np.uint8)
    order = np.lexsort((c, t))
    return TimestampStream(t[order].astype(np.uint64), c[order], duration, seed)


def simulate_stream(
    b,
    w,
    duration,
    seed,
    *,
    thermal=None,
    max_events=DEFAULT_MAX_EVENTS,
    chunk_duration=DEFAULT_CHUNK,
    workers=1,
):
    """Draw a two-channel click stream realising budget ``b`` with pair waveform ``w``.

    Pairs form a Poisson process of rate P; each pair gives a Stokes click
    with probability eta_S and an anti-Stokes click with probability eta_AS,
    delayed by a draw from ``w``. Noise is thinned by eta, backgrounds are not.
    """
    if duration <= 0:
        raise DomainError("duration must be > 0")
    if chunk_duration <= 0:
        raise DomainError("chunk_duration must be > 0")
    if abs(w.total - 1.0) > 1e-6:
        raise ShapeError("waveform must be normalised")
    expected = expected_events(b, duration)
    if expected > max_events:
        raise CapacityError(f"expected {expected:.3g} events exceeds the cap of {max_events}")
    thermal = thermal or ThermalNoise()
    seed = int(seed)
    end = int(round(duration * PS))
    step = int(round(chunk_duration * PS))
    bounds = [(i, s, min(s + step, end)) for i, s in enumerate(range(0, end, step))]
    sample_delay = _delay_sampler(w)

    def run(bound):
        return _chunk(b, sample_delay, thermal, seed, *bound, end)

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, bounds))
    else:
        parts = [run(bound) for bound in bounds]
    return _merge(parts, duration, seed)


def poisson_stream(rate, duration, seed, channel=STOKES):
    """Single-channel Poisson click stream (no pairs)."""
    rng = np.random.default_rng(seed)
    end = int(round(duration * PS))
    n = rng.poisson(rate * duration)
    t = np.sort(rng.integers(0, end, size=n, dtype=np.int64))
    return TimestampStream(t.astype(np.uint64), np.full(n, channel, np.uint8), duration, seed)


def hbt_split(s, seed):
    """Route each record to output A or B with probability 1/2 (50/50 beam splitter)."""
    rng = np.random.default_rng(seed)
    to_a = rng.random(len(s)) < 0.5
    a = TimestampStream(s.timestamps[to_a], s.channels[to_a], s.duration, s.seed)
    b = TimestampStream(s.timestamps[~to_a], s.channels[~to_a], s.duration, s.seed)
    return a, b


def merge_streams(*streams):
    """Time-ordered union of several streams sharing a duration."""
    duration = max(s.duration for s in streams)
    parts = [(s.timestamps.astype(np.int64), s.channels) for s in streams]
    return _merge(parts, duration, None)

