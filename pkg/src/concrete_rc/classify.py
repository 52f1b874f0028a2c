"""Doped-versus-undoped trend ledgers and the waveform/doping classifiers."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from .errors import ArgumentError, IncompleteError, ParseError

DEFAULT_EPSILON = 0.005
ALPHA_HI = 0.50
ALPHA_LO = 0.25
CALIBRATION_VERSION = 1

LEDGER_PARAMETERS = ("perm_entropy", "katz_fd", "petrosian_fd_out1", "petrosian_fd_out2",
                     "corr_dim", "mle", "dfa_alpha", "sampen")


class Trend(str, enum.Enum):
    INCREASES = "Increases"
    DECREASES = "Decreases"
    MIXED = "Mixed"
    FLAT = "Flat"


class WaveformClass(str, enum.Enum):
    SINE = "Sine"
    TRIANGLE = "Triangle"
    SQUARE = "Square"
    UNKNOWN = "Unknown"


class DopingClass(str, enum.Enum):
    UNDOPED = "Undoped"
    DOPED = "Doped"
    INDETERMINATE = "Indeterminate"


def _direction(undoped: float, doped: float, epsilon_rel: float) -> int:
    delta = doped - undoped
    if abs(delta) <= epsilon_rel * abs(undoped):
        return 0
    return 1 if delta > 0 else -1


def aggregate(directions) -> Trend:
    """Combine per-frequency directions (+1, -1, 0 for dead-band)."""
    signs = {d for d in directions if d != 0}
    if not signs:
        return Trend.FLAT
    if signs == {1}:
        return Trend.INCREASES
    if signs == {-1}:
        return Trend.DECREASES
    return Trend.MIXED


@dataclass(frozen=True)
class ParameterTrend:
    """Per-frequency doped-minus-undoped deltas and their aggregate."""

    deltas: dict
    directions: dict
    trend: Trend

    def to_dict(self) -> dict:
        return {
            "deltas": {f"{f:g}": v for f, v in sorted(self.deltas.items())},
            "directions": {f"{f:g}": v for f, v in sorted(self.directions.items())},
            "trend": self.trend.value,
        }


@dataclass(frozen=True)
class TrendLedger:
    entries: dict
    epsilon_rel: float = DEFAULT_EPSILON

    def trend(self, parameter: str) -> Trend:
        try:
            return self.entries[parameter].trend
        except KeyError:
            raise IncompleteError(f"ledger has no trend for {parameter!r}") from None

    def __contains__(self, parameter: str) -> bool:
        return parameter in self.entries

    def to_dict(self) -> dict:
        return {"epsilon_rel": self.epsilon_rel,
                "parameters": {k: self.entries[k].to_dict() for k in sorted(self.entries)}}


def build_ledger(pairs: Mapping, epsilon_rel: float = DEFAULT_EPSILON) -> TrendLedger:
    """Aggregate doped-versus-undoped directions per parameter.

    ``pairs`` maps ``(frequency, parameter)`` to ``(undoped, doped)``. A change
    with ``|doped - undoped| <= epsilon_rel * |undoped|`` counts as flat. Pairs
    with a missing or non-finite value are skipped, so a parameter that never
    has a usable pair is absent from the ledger.
    """
    if not pairs:
        raise ArgumentError("build_ledger needs at least one (frequency, parameter) pair")
    if not epsilon_rel >= 0:
        raise ArgumentError(f"epsilon_rel must be >= 0, got {epsilon_rel!r}")
    grouped: dict = {}
    for (freq, name), (undoped, doped) in pairs.items():
        if undoped is None or doped is None:
            continue
        if not (math.isfinite(undoped) and math.isfinite(doped)):
            continue
        grouped.setdefault(name, {})[float(freq)] = (float(undoped), float(doped))
    entries = {}
    for name, by_freq in grouped.items():
        directions = {f: _direction(u, d, epsilon_rel) for f, (u, d) in by_freq.items()}
        entries[name] = ParameterTrend(
            deltas={f: d - u for f, (u, d) in by_freq.items()},
            directions=directions,
            trend=aggregate(directions.values()),
        )
    return TrendLedger(entries, epsilon_rel)


def decision_tree_a(ledger: TrendLedger) -> WaveformClass:
    """Single-terminal tree: entropy/Katz test for triangle, then Petrosian."""
    sp = ledger.trend("perm_entropy")
    dk = ledger.trend("katz_fd")
    dp = ledger.trend("petrosian_fd_out1")
    if sp is Trend.DECREASES and dk is Trend.MIXED:
        return WaveformClass.TRIANGLE
    if dp is Trend.INCREASES:
        return WaveformClass.SINE
    if dp is Trend.DECREASES:
        return WaveformClass.SQUARE
    return WaveformClass.UNKNOWN


def decision_tree_b(ledger: TrendLedger) -> WaveformClass:
    """Dual-terminal tree on the Petrosian trends of OUT1 and OUT2."""
    out1 = ledger.trend("petrosian_fd_out1")
    out2 = ledger.trend("petrosian_fd_out2")
    if out1 is Trend.INCREASES:
        return WaveformClass.SINE
    if out2 is Trend.INCREASES:
        return WaveformClass.TRIANGLE
    if out1 is Trend.DECREASES and out2 is Trend.DECREASES:
        return WaveformClass.SQUARE
    return WaveformClass.UNKNOWN


def _feature(fv, name: str) -> float:
    value = fv.get(name) if isinstance(fv, Mapping) else getattr(fv, name, None)
    if value is None or not math.isfinite(value):
        raise IncompleteError(f"feature vector lacks {name}")
    return float(value)


def classify_doping(fv, alpha_hi: float = ALPHA_HI, alpha_lo: float = ALPHA_LO) -> DopingClass:
    """Doping state from the DFA exponent alone."""
    if not alpha_lo < alpha_hi:
        raise ArgumentError(f"need alpha_lo < alpha_hi, got {alpha_lo} and {alpha_hi}")
    alpha = _feature(fv, "dfa_alpha")
    if alpha > alpha_hi:
        return DopingClass.UNDOPED
    if alpha < alpha_lo:
        return DopingClass.DOPED
    return DopingClass.INDETERMINATE


@dataclass(frozen=True)
class ParallelThresholds:
    """Band boundaries for the parallel-coordinate classifier.

    A series is Square when its Petrosian dimension exceeds ``square_petrosian``.
    Otherwise permutation entropy below ``sine_triangle_entropy`` is Sine and at
    or above it Triangle. Confidence grows linearly from 0.5 on a boundary to 1
    at one ``*_width`` away from it.
    """

    square_petrosian: float
    petrosian_width: float
    sine_triangle_entropy: float
    entropy_width: float
    version: int = CALIBRATION_VERSION
    fit: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("petrosian_width", "entropy_width"):
            if not getattr(self, name) > 0:
                raise ArgumentError(f"{name} must be > 0")

    def to_dict(self) -> dict:
        return {"version": self.version, "square_petrosian": self.square_petrosian,
                "petrosian_width": self.petrosian_width,
                "sine_triangle_entropy": self.sine_triangle_entropy,
                "entropy_width": self.entropy_width, "fit": self.fit}

    @classmethod
    def from_dict(cls, data: dict) -> "ParallelThresholds":
        if data.get("version") != CALIBRATION_VERSION:
            raise ParseError(f"unsupported calibration version {data.get('version')!r}")
        try:
            return cls(float(data["square_petrosian"]), float(data["petrosian_width"]),
                       float(data["sine_triangle_entropy"]), float(data["entropy_width"]),
                       fit=dict(data.get("fit", {})))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed calibration: {exc}") from None


def default_calibration_path() -> Path:
    return Path(str(resources.files("concrete_rc") / "data" / "calibration.json"))


def load_thresholds(path=None) -> ParallelThresholds:
    path = default_calibration_path() if path is None else Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(f"cannot read calibration {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"calibration {path} is not JSON: {exc}") from None
    return ParallelThresholds.from_dict(data)


def _confidence(distance: float, width: float) -> float:
    return 0.5 + 0.5 * min(1.0, abs(distance) / width)


def classify_parallel(fv, thresholds: ParallelThresholds | None = None):
    """Banded waveform label from Petrosian dimension and permutation entropy.

    Returns ``(WaveformClass, confidence)`` with confidence in [0.5, 1].
    """
    th = load_thresholds() if thresholds is None else thresholds
    dp = _feature(fv, "petrosian_fd")
    sp = _feature(fv, "perm_entropy")
    if dp > th.square_petrosian:
        return WaveformClass.SQUARE, _confidence(dp - th.square_petrosian, th.petrosian_width)
    dist = sp - th.sine_triangle_entropy
    label = WaveformClass.SINE if dist < 0 else WaveformClass.TRIANGLE
    return label, _confidence(dist, th.entropy_width)


def fit_thresholds(rows) -> ParallelThresholds:
    """Fit band boundaries to labelled ``(shape, petrosian_fd, perm_entropy)`` rows.

    Each boundary is the midpoint of the cut that misclassifies the fewest
    rows; the width is the distance from the boundary to the nearest row.
    """
    rows = [(WaveformClass(s), float(dp), float(sp)) for s, dp, sp in rows]
    if not rows:
        raise ArgumentError("no rows to fit")

    def best_cut(values_lo, values_hi):
        cands = sorted(set(values_lo) | set(values_hi))
        mids = [(a + b) / 2 for a, b in zip(cands, cands[1:])] or [cands[0]]
        scored = []
        for c in mids:
            errors = sum(v >= c for v in values_lo) + sum(v < c for v in values_hi)
            margin = min(abs(v - c) for v in values_lo + values_hi)
            scored.append((errors, -margin, c))
        errors, neg_margin, c = min(scored)
        return c, max(-neg_margin, 1e-6), errors

    square = [dp for s, dp, _ in rows if s is WaveformClass.SQUARE]
    other = [dp for s, dp, _ in rows if s is not WaveformClass.SQUARE]
    sines = [sp for s, _, sp in rows if s is WaveformClass.SINE]
    tris = [sp for s, _, sp in rows if s is WaveformClass.TRIANGLE]
    if not (square and other and sines and tris):
        raise ArgumentError("fit needs rows of every shape")
    dp_cut, dp_width, dp_err = best_cut(other, square)
    sp_cut, sp_width, sp_err = best_cut(sines, tris)
    return ParallelThresholds(dp_cut, dp_width, sp_cut, sp_width,
                              fit={"rows": len(rows), "square_errors": dp_err,
                                   "sine_triangle_errors": sp_err})
