import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from sfwm.biphoton import fwhm, ideal_waveform
from sfwm.budget import RateBudget, g2_peak
from sfwm.correlate import (
    auto_correlate,
    cross_correlate,
    histogram_from_counts,
    peak_and_window,
    signal_to_accidental_g2,
    tail_mean,
    window_g2,
    zero_delay,
)
from sfwm.errors import DomainError, NoPeakError, StreamFormatError
from sfwm.montecarlo import ANTISTOKES, STOKES, ThermalNoise, TimestampStream, poisson_stream, simulate_stream

# exact bin average of 1 + (b - 1) exp(-|tau| / tc) over [-243, 243] ps, b = 2, tc = 1 ns
THERMAL_486PS = 1.8877715482651998


def _stream(times, duration=1.0):
    t = np.sort(np.asarray(times, dtype=np.uint64))
    return TimestampStream(t, np.zeros(t.size, np.uint8), duration)


def _brute(a, b, bin_ps, tmin_ps2, nbins):
    # doubled-picosecond integers keep half-picosecond edges exact
    d2 = 2 * (b[None, :].astype(np.int64) - a[:, None].astype(np.int64)) - tmin_ps2
    k = np.floor_divide(d2, 2 * bin_ps).ravel()
    k = k[(k >= 0) & (k < nbins)]
    return np.bincount(k, minlength=nbins)


@settings(deadline=None, max_examples=100)
@given(
    st.lists(st.integers(0, 20_000), max_size=60),
    st.lists(st.integers(0, 20_000), max_size=60),
    st.integers(1, 700),
    st.integers(1, 5000),
)
def test_counts_match_brute_force(ta, tb, bin_ps, range_ps):
    s1, s2 = _stream(ta), _stream(tb)
    h = cross_correlate(s1, s2, bin_ps * 1e-12, range_ps * 1e-12)
    nbins = h.counts.size
    tmin2 = round(h.tau_min * 2e12)
    expected = _brute(s1.timestamps, s2.timestamps, bin_ps, tmin2, nbins)
    assert np.array_equal(h.counts, expected)
    assert nbins % 2 == 1
    assert h.taus[nbins // 2] == pytest.approx(0.0, abs=1e-18)


@settings(deadline=None, max_examples=60)
@given(
    st.lists(st.integers(0, 50_000), max_size=80),
    st.lists(st.integers(0, 50_000), max_size=80),
    st.integers(-3000, 3000),
    st.integers(1, 4000),
    st.integers(1, 300),
)
def test_tuple_range_matches_brute_force(ta, tb, lo_ps, span_ps, bin_ps):
    s1, s2 = _stream(ta), _stream(tb)
    h = cross_correlate(s1, s2, bin_ps * 1e-12, (lo_ps * 1e-12, (lo_ps + span_ps) * 1e-12))
    expected = _brute(s1.timestamps, s2.timestamps, bin_ps, 2 * lo_ps, h.counts.size)
    assert np.array_equal(h.counts, expected)


def test_edge_goes_to_upper_bin():
    s1, s2 = _stream([1000]), _stream([1100])
    h = cross_correlate(s1, s2, 100e-12, (0.0, 300e-12))
    assert list(h.counts) == [0, 1, 0]


@settings(deadline=None, max_examples=60)
@given(
    st.lists(st.integers(0, 30_000), max_size=80),
    st.lists(st.integers(0, 30_000), max_size=80),
    st.integers(0, 400).map(lambda k: 2 * k + 1),
    st.integers(1, 6000),
)
def test_swap_mirrors_odd_bins(ta, tb, bin_ps, range_ps):
    s1, s2 = _stream(ta), _stream(tb)
    h12 = cross_correlate(s1, s2, bin_ps * 1e-12, range_ps * 1e-12)
    h21 = cross_correlate(s2, s1, bin_ps * 1e-12, range_ps * 1e-12)
    assert np.array_equal(h12.counts, h21.counts[::-1])


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_parallel_equals_serial(reference_budget, reference_waveform, workers):
    s = simulate_stream(reference_budget, reference_waveform, 5.0, 5)
    a, b = s.channel(STOKES), s.channel(ANTISTOKES)
    serial = cross_correlate(a, b, 200e-12, 200e-9)
    par = cross_correlate(a, b, 200e-12, 200e-9, workers=workers)
    assert np.array_equal(serial.counts, par.counts)


def test_normalisation_invariants(reference_budget, reference_waveform):
    s = simulate_stream(reference_budget, reference_waveform, 3.0, 9)
    h = cross_correlate(s.channel(STOKES), s.channel(ANTISTOKES), 200e-12, 50e-9)
    r1, r2 = h.rates
    assert np.allclose(h.normalized, h.counts / (r1 * r2 * 200e-12 * 3.0), rtol=1e-14)
    nz = h.counts > 0
    assert np.allclose(h.stderr[nz], h.normalized[nz] / np.sqrt(h.counts[nz]), rtol=1e-14)


def test_independent_poisson_is_flat():
    a = poisson_stream(1e3, 100.0, 1)
    b = poisson_stream(1e3, 100.0, 2)
    h = cross_correlate(a, b, 1e-6, 200e-6)
    expected = h.accidentals_per_bin
    chi2 = float(np.sum((h.counts - expected) ** 2 / expected))
    p = stats.chi2.sf(chi2, h.counts.size)
    assert p > 1e-3
    with pytest.raises(NoPeakError):
        peak_and_window(h)


def test_delta_shift_single_bin():
    s1 = poisson_stream(1e3, 10.0, 4)
    shifted = TimestampStream(s1.timestamps + np.uint64(5000), s1.channels, s1.duration)
    h = cross_correlate(s1, shifted, 100e-12, 10e-9)
    k = h.bin_of(5e-9)
    assert h.taus[k] == pytest.approx(5e-9)
    assert h.counts[k] == len(s1)
    # at 1 kHz the chance pairs within 10 ns are rare
    assert np.delete(h.counts, k).sum() <= 2


def test_unsorted_and_empty():
    bad = TimestampStream(np.array([5, 3]), np.array([0, 0]), 1.0)
    with pytest.raises(StreamFormatError):
        cross_correlate(bad, bad, 1e-12, 1e-9)
    empty = TimestampStream(np.array([], np.uint64), np.array([], np.uint8), 1.0)
    h = cross_correlate(empty, _stream([1, 2]), 1e-12, 1e-9)
    assert h.empty and h.counts.sum() == 0
    with pytest.raises(NoPeakError):
        peak_and_window(h)


def test_grid_guards():
    s = _stream([1, 2])
    with pytest.raises(DomainError):
        cross_correlate(s, s, 0.5e-12, 1e-9)
    with pytest.raises(DomainError):
        cross_correlate(s, s, 1e-12, -1e-9)
    with pytest.raises(DomainError):
        cross_correlate(s, s, 1e-12, (1e-9, 0.0))


def test_poisson_auto_is_one():
    s = poisson_stream(2e5, 20.0, 8)
    h = auto_correlate(s, 486e-12, 10e-9, seed=3)
    g, err = zero_delay(h)
    assert abs(g - 1.0) < 3 * err


def _thermal_stream(duration, seed):
    b = RateBudget(1e4, 5e6, 0.0, 0.2, 1.0, 100.0, 0.0, 1e-9)
    th = ThermalNoise(2.0, 1.0, 1e-9)
    w = ideal_waveform(1e9, 10e-12, 12e-9)
    return b, simulate_stream(b, w, duration, seed, thermal=th).channel(STOKES)


def test_thermal_bunching_oracle():
    b, s = _thermal_stream(10.0, 21)
    share = 0.2 * 5e6 / (0.2 * (1e4 + 5e6) + 100.0)
    expected = 1 + share**2 * (THERMAL_486PS - 1)
    h = auto_correlate(s, 486e-12, 20e-9, seed=5)
    g, err = zero_delay(h)
    assert 1.0 < g <= 2.0 + 3 * err
    assert abs(g - expected) < 3 * err
    wide = auto_correlate(s, 2000e-12, 20e-9, seed=5)
    assert zero_delay(wide)[0] < g
    # symmetric within statistics
    k0 = h.bin_of(0.0)
    left, right = h.normalized[:k0], h.normalized[k0 + 1 :][::-1]
    z = (left - right) / np.hypot(h.stderr[:k0], h.stderr[k0 + 1 :][::-1])
    assert np.mean(np.abs(z) < 3) > 0.95


def test_periodic_stream_antibunched():
    t = np.arange(0, 10_000_000_000, 1_000_000, dtype=np.uint64)
    s = _stream(t, duration=0.01)
    h = auto_correlate(s, 100e-12, 5e-9, seed=1)
    assert zero_delay(h)[0] == 0.0
    assert h.counts.sum() == 0


def test_triangle_peak_width():
    counts = np.full(401, 1000, dtype=np.int64)
    k = np.arange(401)
    counts += np.maximum(0, 100 - np.abs(k - 200)) * 1000
    # R1 R2 w T = 1000 accidental counts per bin
    h = histogram_from_counts(counts, 1e-12, -200.5e-12, (1e6, 1e6), 1000.0)
    assert np.allclose(h.normalized, counts / 1000.0)
    p = peak_and_window(h, smooth=1)
    assert p.fwhm_window == pytest.approx(100e-12, abs=1e-12)
    # a 3-bin boxcar leaves a triangle this wide within one bin
    assert peak_and_window(h).fwhm_window == pytest.approx(100e-12, abs=1e-12)
    with pytest.raises(DomainError):
        peak_and_window(h, smooth=2)
    assert p.peak_tau == pytest.approx(0.0, abs=1e-18)


def test_closed_loop_single_seed(reference_budget, reference_waveform):
    s = simulate_stream(reference_budget, reference_waveform, 300.0, 1)
    h = cross_correlate(s.channel(STOKES), s.channel(ANTISTOKES), 200e-12, 200e-9)
    g, err = signal_to_accidental_g2(h, reference_budget.window)
    assert abs(g - g2_peak(reference_budget)) < 3 * err
    mean, sem = tail_mean(h, 20e-9)
    assert abs(mean - 1.0) < 3 * sem
    p = peak_and_window(h)
    assert p.fwhm_window == pytest.approx(fwhm(reference_waveform), rel=0.10)
    assert p.g2_peak > 10
    wg, werr = window_g2(h, *p.window)
    assert wg > 10 and werr > 0


def test_duration_scaling_of_stderr():
    short = cross_correlate(poisson_stream(2e3, 50.0, 1), poisson_stream(2e3, 50.0, 2), 1e-6, 100e-6)
    long = cross_correlate(poisson_stream(2e3, 200.0, 1), poisson_stream(2e3, 200.0, 2), 1e-6, 100e-6)
    ratio = np.mean(short.stderr) / np.mean(long.stderr)
    assert ratio == pytest.approx(2.0, rel=0.2)


def test_histogram_csv(tmp_path):
    h = cross_correlate(_stream([0, 10]), _stream([5, 20]), 10e-12, 30e-12)
    path = tmp_path / "h.csv"
    h.to_csv(path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["tau_seconds", "counts", "g2", "stderr"]
    assert len(rows) == h.counts.size + 1
    assert [int(r[1]) for r in rows[1:]] == list(h.counts)
