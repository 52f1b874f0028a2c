import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from concrete_rc.errors import ArgumentError
from concrete_rc.signals import (DEFAULT_SAMPLE_RATE, Shape, TimeSeries, WaveformSpec,
                                 mix_reference, ratio_repetend_length, synthesize)


def test_sine_closed_form_sample():
    ts = synthesize(WaveformSpec("sine", 300), 1 / 3000, 10)
    assert ts.samples[2] == pytest.approx(5 * math.sin(2 * math.pi * 300 * 2 / 3000), abs=1e-12)
    assert ts.samples[2] == pytest.approx(4.755, abs=5e-4)


def test_square_first_quarter_is_high():
    f = 275
    n = int(DEFAULT_SAMPLE_RATE / (4 * f))
    ts = synthesize(WaveformSpec("square", f), 1 / DEFAULT_SAMPLE_RATE, n)
    assert np.all(ts.samples == 5.0)


def test_triangle_peak_at_quarter_period():
    f = 280
    ts = synthesize(WaveformSpec("triangle", f), 1 / (4 * f), 2)
    assert ts.samples[1] == pytest.approx(5.0, abs=1e-12)
    assert ts.samples[0] == 0.0


@pytest.mark.parametrize("shape", list(Shape))
def test_bounds_and_peak(shape):
    spec = WaveformSpec(shape, 290, amplitude_pp=4.0, dc_offset=1.5)
    ts = synthesize(spec, 1 / DEFAULT_SAMPLE_RATE, 5000)
    dev = np.abs(ts.samples - 1.5)
    assert dev.max() <= 2.0 + 1e-12
    # within one sample of a peak the full amplitude is reached
    slope = 4 * 2.0 * 290 / DEFAULT_SAMPLE_RATE * (2 * math.pi / 4 if shape is Shape.SINE else 1)
    assert dev.max() >= 2.0 - slope


def test_synthesize_is_deterministic():
    spec = WaveformSpec("triangle", 275, phase=0.3)
    a = synthesize(spec, 2e-5, 777)
    b = synthesize(spec, 2e-5, 777)
    assert a.samples.tobytes() == b.samples.tobytes()


@pytest.mark.parametrize("kwargs", [dict(frequency=0), dict(frequency=-1),
                                    dict(frequency=300, amplitude_pp=0),
                                    dict(frequency=float("nan"))])
def test_invalid_spec(kwargs):
    with pytest.raises(ArgumentError):
        WaveformSpec("sine", **kwargs)


def test_invalid_synth_args():
    spec = WaveformSpec("sine", 300)
    with pytest.raises(ArgumentError):
        synthesize(spec, 1e-3, 1)
    with pytest.raises(ArgumentError):
        synthesize(spec, 0.0, 10)
    with pytest.raises(ValueError):
        WaveformSpec("sawtooth", 300)


def test_label():
    assert WaveformSpec("sine", 290).label == "sine290"
    assert WaveformSpec("square", 275.5).label == "square275.5"


def test_timeseries_validation_and_window():
    with pytest.raises(ArgumentError):
        TimeSeries([1.0], 1.0)
    with pytest.raises(ArgumentError):
        TimeSeries([1.0, np.inf], 1.0)
    with pytest.raises(ArgumentError):
        TimeSeries([1.0, 2.0], -1.0)
    ts = TimeSeries(np.arange(10.0), 0.5, {"terminal": "out1"})
    w = ts.window(3, 4)
    assert list(w.samples) == [3, 4, 5, 6] and w.meta == {"terminal": "out1"}
    assert ts.times[-1] == 4.5
    with pytest.raises(ArgumentError):
        ts.window(8, 4)
    with pytest.raises(ValueError):
        ts.samples[0] = 1.0


@pytest.mark.parametrize("f1,f2,expected", [(300, 290, 28), (300, 275, 2), (300, 280, 6),
                                            (1, 3, 1), (1, 7, 6), (1, 8, 0), ("0.1", "0.3", 1)])
def test_repetend(f1, f2, expected):
    assert ratio_repetend_length(f1, f2) == expected


def _long_division_period(num: int, den: int) -> int:
    seen, r, k = {}, num % den, 0
    while r and r not in seen:
        seen[r] = k
        r = (r * 10) % den
        k += 1
    return 0 if r == 0 else k - seen[r]


@given(st.integers(1, 2000), st.integers(1, 2000))
def test_repetend_matches_long_division(a, b):
    assert ratio_repetend_length(a, b) == _long_division_period(a, b)


@given(st.floats(0.01, 1e5, allow_nan=False))
def test_repetend_self_ratio_is_zero(f):
    assert ratio_repetend_length(f, f) == 0


def test_repetend_errors():
    with pytest.raises(ArgumentError):
        ratio_repetend_length(300, 0)
    with pytest.raises(ArgumentError):
        ratio_repetend_length(-1, 3)


def test_mix_reference_examples():
    dt, n = 1 / DEFAULT_SAMPLE_RATE, 50000
    zero = TimeSeries(np.zeros(n), dt)
    assert np.all(mix_reference(zero, zero).samples == 0)
    a = synthesize(WaveformSpec("sine", 300), dt, n)
    neg = a.with_samples(-a.samples)
    assert np.all(mix_reference(a, neg).samples == 0)
    b = synthesize(WaveformSpec("sine", 290), dt, n)
    spec = np.abs(np.fft.rfft(mix_reference(a, b).samples)) / n
    freqs = np.fft.rfftfreq(n, dt)
    lines = set(freqs[spec > 1e-6 * spec.max()].round(6))
    assert lines == {290.0, 300.0}


def test_mix_reference_mismatch():
    a = TimeSeries(np.zeros(10), 1.0)
    with pytest.raises(ArgumentError):
        mix_reference(a, TimeSeries(np.zeros(11), 1.0))
    with pytest.raises(ArgumentError):
        mix_reference(a, TimeSeries(np.zeros(10), 2.0))


@settings(max_examples=30)
@given(st.sampled_from(list(Shape)), st.floats(1, 2000), st.floats(0.1, 20),
       st.floats(-3, 3), st.floats(-5, 5))
def test_synth_bounded(shape, f, app, phase, offset):
    ts = synthesize(WaveformSpec(shape, f, app, phase, offset), 1 / DEFAULT_SAMPLE_RATE, 400)
    assert np.all(np.abs(ts.samples - offset) <= app / 2 * (1 + 1e-12) + 1e-12)
