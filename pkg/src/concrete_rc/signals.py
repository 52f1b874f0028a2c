"""Drive waveforms and stimulus diagnostics."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import ArgumentError

DEFAULT_SAMPLE_RATE = 50_000.0


class Shape(str, enum.Enum):
    SINE = "sine"
    TRIANGLE = "triangle"
    SQUARE = "square"


@dataclass(frozen=True)
class WaveformSpec:
    shape: Shape
    frequency: float
    amplitude_pp: float = 10.0
    phase: float = 0.0
    dc_offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "shape", Shape(self.shape))
        if not np.isfinite(self.frequency) or self.frequency <= 0:
            raise ArgumentError(f"frequency must be > 0, got {self.frequency!r}")
        if not np.isfinite(self.amplitude_pp) or self.amplitude_pp <= 0:
            raise ArgumentError(f"amplitude_pp must be > 0, got {self.amplitude_pp!r}")

    @property
    def amplitude(self) -> float:
        return self.amplitude_pp / 2.0

    @property
    def label(self) -> str:
        return f"{self.shape.value}{self.frequency:g}"


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled voltage trace.

    ``samples`` is stored as a read-only float64 array; ``meta`` carries free
    form provenance (terminal, stimulus, substrate).
    """

    samples: np.ndarray
    dt: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.array(self.samples, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise ArgumentError("a time series needs at least 2 samples")
        if not np.all(np.isfinite(x)):
            raise ArgumentError("time series samples must be finite")
        if not np.isfinite(self.dt) or self.dt <= 0:
            raise ArgumentError(f"dt must be > 0, got {self.dt!r}")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "meta", dict(self.meta))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) * self.dt

    def with_samples(self, samples, **meta) -> "TimeSeries":
        return TimeSeries(samples, self.dt, {**self.meta, **meta})

    def window(self, start: int, length: int) -> "TimeSeries":
        if start < 0 or length < 2 or start + length > len(self):
            raise ArgumentError(
                f"window [{start}, {start + length}) outside series of length {len(self)}"
            )
        return self.with_samples(self.samples[start:start + length])


def as_array(ts) -> np.ndarray:
    """Accept a TimeSeries or any 1-d array-like and return a float array."""
    if isinstance(ts, TimeSeries):
        return ts.samples
    x = np.asarray(ts, dtype=float)
    if x.ndim != 1:
        raise ArgumentError("expected a one-dimensional series")
    return x


def _cycle_fraction(spec: WaveformSpec, t: np.ndarray) -> np.ndarray:
    return np.mod(spec.frequency * t + spec.phase / (2 * np.pi), 1.0)


def synthesize(spec: WaveformSpec, dt: float, n: int) -> TimeSeries:
    """Sample an ideal (band-unlimited) waveform.

    All three shapes share the phase convention of ``A*sin(2*pi*f*t + phase)``:
    the triangle peaks and the square is high during the first half cycle.
    """
    if n < 2:
        raise ArgumentError(f"need n >= 2 samples, got {n}")
    if not np.isfinite(dt) or dt <= 0:
        raise ArgumentError(f"dt must be > 0, got {dt!r}")
    t = np.arange(n) * dt
    a = spec.amplitude
    if spec.shape is Shape.SINE:
        y = a * np.sin(2 * np.pi * spec.frequency * t + spec.phase)
    else:
        u = _cycle_fraction(spec, t)
        if spec.shape is Shape.SQUARE:
            y = np.where(u < 0.5, a, -a)
        else:
            y = np.where(u < 0.25, 4 * a * u,
                         np.where(u < 0.75, a * (2 - 4 * u), a * (4 * u - 4)))
    meta = {"source": "synth", "shape": spec.shape.value, "frequency_hz": spec.frequency}
    return TimeSeries(y + spec.dc_offset, dt, meta)


def _to_fraction(value) -> Fraction:
    if isinstance(value, (Rational, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    # decimal reading of floats: 0.1 -> 1/10, not the binary expansion
    return Fraction(repr(float(value)))


def ratio_repetend_length(f1, f2) -> int:
    """Length of the repeating block in the decimal expansion of f1/f2.

    Returns 0 when the expansion terminates.
    """
    num, den = _to_fraction(f1), _to_fraction(f2)
    if den == 0:
        raise ArgumentError("f2 must be nonzero")
    if num <= 0 or den < 0:
        raise ArgumentError("frequencies must be positive")
    q = (num / den).denominator
    for p in (2, 5):
        while q % p == 0:
            q //= p
    if q == 1:
        return 0
    # multiplicative order of 10 mod q
    k, r = 1, 10 % q
    while r != 1:
        r = (r * 10) % q
        k += 1
    return k


def mix_reference(a: TimeSeries, b: TimeSeries) -> TimeSeries:
    """Linear sum of two drives; the null model the substrate is compared to."""
    if len(a) != len(b):
        raise ArgumentError(f"length mismatch: {len(a)} vs {len(b)}")
    if not np.isclose(a.dt, b.dt, rtol=1e-12, atol=0):
        raise ArgumentError(f"dt mismatch: {a.dt} vs {b.dt}")
    return TimeSeries(a.samples + b.samples, a.dt, {"source": "linear_mix"})
