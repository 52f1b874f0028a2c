"""Delay estimation, embedding-dimension tests and delay-coordinate embedding."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ArgumentError, DegenerateInputError, InsufficientDataError, NotFoundError
from .neighbors import nearest_neighbors
from .signals import as_array

DMI_BINS = 64
R_TOL = 15.0
A_TOL = 2.0
FNN_THRESHOLD = 0.01
E1_THRESHOLD = 0.05


@dataclass(frozen=True)
class EmbeddingConfig:
    tau: int
    dim: int
    flags: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if int(self.tau) != self.tau or self.tau < 1:
            raise ArgumentError(f"tau must be an integer >= 1, got {self.tau!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ArgumentError(f"dim must be an integer >= 1, got {self.dim!r}")
        object.__setattr__(self, "tau", int(self.tau))
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def span(self) -> int:
        return (self.dim - 1) * self.tau

    def check(self, n: int) -> None:
        if self.span >= n:
            raise ArgumentError(
                f"embedding span (dim-1)*tau = {self.span} needs more than {n} samples"
            )


@dataclass(frozen=True, eq=False)
class EmbeddedTrajectory:
    """Row k is (x[k], x[k+tau], ..., x[k+(dim-1)*tau])."""

    points: np.ndarray
    config: EmbeddingConfig


class DelayEstimate(NamedTuple):
    tau: int
    local_minimum: bool


class AcfZero(NamedTuple):
    tau: int
    crossing: float


class FnnRow(NamedTuple):
    dim: int
    ratio: float      # Kennel distance-ratio test
    size: float       # attractor-size test
    combined: float   # point flagged by either test


class CaoRow(NamedTuple):
    dim: int
    e1: float
    e2: float


def delay_matrix(x: np.ndarray, tau: int, dim: int, rows: int | None = None) -> np.ndarray:
    n = x.size - (dim - 1) * tau
    if rows is not None:
        n = min(n, rows)
    return np.stack([x[j * tau:j * tau + n] for j in range(dim)], axis=1)


def embed(ts, config: EmbeddingConfig) -> EmbeddedTrajectory:
    x = as_array(ts)
    config.check(x.size)
    return EmbeddedTrajectory(delay_matrix(x, config.tau, config.dim), config)


def _mutual_information(a: np.ndarray, b: np.ndarray, edges: np.ndarray) -> float:
    joint, _, _ = np.histogram2d(a, b, bins=[edges, edges])
    p = joint / joint.sum()
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz] / np.outer(px, py)[nz])))


def delayed_mutual_information(ts, max_tau: int, bins: int = DMI_BINS):
    """Histogram estimate of I(x_t; x_{t+tau}) in nats for tau = 1..max_tau.

    Bins are equal-width over the full data range, shared by both coordinates.
    """
    x = as_array(ts)
    if bins < 2:
        raise ArgumentError("need at least 2 bins")
    if max_tau < 1 or x.size < 10 * max_tau:
        raise ArgumentError(f"series of length {x.size} too short for max_tau={max_tau}")
    lo, hi = x.min(), x.max()
    if lo == hi:
        raise DegenerateInputError("mutual information of a constant series")
    edges = np.linspace(lo, hi, bins + 1)
    return [(tau, _mutual_information(x[:-tau], x[tau:], edges))
            for tau in range(1, max_tau + 1)]


def first_dmi_minimum(curve) -> DelayEstimate:
    """First interior local minimum of a (tau, value) curve, else its argmin."""
    curve = list(curve)
    if len(curve) < 3:
        raise ArgumentError("need at least 3 curve points")
    taus = [int(t) for t, _ in curve]
    vals = [float(v) for _, v in curve]
    for k in range(1, len(vals) - 1):
        if vals[k - 1] > vals[k] < vals[k + 1]:
            return DelayEstimate(taus[k], True)
    return DelayEstimate(taus[int(np.argmin(vals))], False)


def autocorrelation(x: np.ndarray, max_tau: int) -> np.ndarray:
    """Biased sample autocorrelation r(0..max_tau)."""
    y = x - x.mean()
    den = float(y @ y)
    if den == 0:
        raise DegenerateInputError("autocorrelation of a constant series")
    return np.array([float(y[:y.size - k] @ y[k:]) / den for k in range(max_tau + 1)])


def autocorrelation_first_zero(ts, max_tau: int, tol: float = 1e-12) -> AcfZero:
    """First lag at which the autocorrelation has dropped to or below zero.

    ``crossing`` is the linearly interpolated zero and ``tau`` its floor (at
    least 1); values within ``tol`` of zero count as an exact zero at that lag.
    """
    x = as_array(ts)
    if max_tau < 1 or x.size < 10 * max_tau:
        raise ArgumentError(f"series of length {x.size} too short for max_tau={max_tau}")
    r = autocorrelation(x, max_tau)
    for k in range(1, max_tau + 1):
        if r[k] <= tol:
            if abs(r[k]) <= tol:
                return AcfZero(k, float(k))
            crossing = k - 1 + r[k - 1] / (r[k - 1] - r[k])
            return AcfZero(max(1, int(math.floor(crossing))), crossing)
    raise NotFoundError(f"autocorrelation stays positive up to lag {max_tau}")


def false_nearest_neighbors(ts, tau: int, max_dim: int, r_tol: float = R_TOL,
                            a_tol: float = A_TOL, theiler: int | None = None):
    """Kennel's false-nearest-neighbour fractions for dim = 1..max_dim.

    Neighbours are Euclidean, searched in dimension d among the points that
    still have a (d+1)-th delay coordinate.
    """
    x = as_array(ts)
    if x.size < 100:
        raise ArgumentError("FNN needs at least 100 samples")
    if tau < 1:
        raise ArgumentError("tau must be >= 1")
    theiler = tau if theiler is None else theiler
    r_a = x.std()
    if r_a == 0:
        raise DegenerateInputError("FNN of a constant series")
    out = []
    for d in range(1, max_dim + 1):
        m = x.size - d * tau
        if m <= 2 * theiler + 2:
            raise InsufficientDataError(f"too few points for FNN at dim {d}")
        pts = delay_matrix(x, tau, d, rows=m)
        nn, r = nearest_neighbors(pts, theiler)
        extra = np.abs(x[np.arange(m) + d * tau] - x[nn + d * tau])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(r > 0, extra / r, np.where(extra > 0, np.inf, 0.0)) > r_tol
        size = np.sqrt(r**2 + extra**2) / r_a > a_tol
        out.append(FnnRow(d, float(ratio.mean()), float(size.mean()),
                          float((ratio | size).mean())))
    return out


def cao_afn(ts, tau: int, max_dim: int, theiler: int | None = None):
    """Cao's averaged false-neighbour statistics E1(d), E2(d), d = 1..max_dim."""
    x = as_array(ts)
    if x.size < 100:
        raise ArgumentError("Cao's method needs at least 100 samples")
    if tau < 1:
        raise ArgumentError("tau must be >= 1")
    if np.ptp(x) == 0:
        raise DegenerateInputError("Cao's method on a constant series")
    theiler = tau if theiler is None else theiler
    e, estar = [], []
    for d in range(1, max_dim + 2):
        m = x.size - d * tau
        if m <= 2 * theiler + 2:
            raise InsufficientDataError(f"too few points for Cao's method at dim {d}")
        pts = delay_matrix(x, tau, d, rows=m)
        nn, r = nearest_neighbors(pts, theiler, metric="chebyshev", skip_within=0.0)
        extra = np.abs(x[np.arange(m) + d * tau] - x[nn + d * tau])
        e.append(float(np.mean(np.maximum(r, extra) / r)))
        estar.append(float(np.mean(extra)))
    return [CaoRow(d, e[d] / e[d - 1], estar[d] / estar[d - 1] if estar[d - 1] > 0 else np.nan)
            for d in range(1, max_dim + 1)]


def minimal_dimension(fnn_rows, cao_rows, fnn_threshold: float = FNN_THRESHOLD,
                      e1_threshold: float = E1_THRESHOLD):
    """Smallest d whose FNN fraction is below threshold and whose E1 has saturated.

    Returns None when no tested dimension qualifies.
    """
    e1 = {row.dim: row.e1 for row in cao_rows}
    for row in fnn_rows:
        d = row.dim
        if d + 1 not in e1:
            break
        if row.combined < fnn_threshold and abs(e1[d + 1] - e1[d]) < e1_threshold:
            return d
    return None


def select_embedding(ts, max_tau: int | None = None, max_dim: int = 8,
                     bins: int = DMI_BINS, fnn_threshold: float = FNN_THRESHOLD,
                     e1_threshold: float = E1_THRESHOLD, theiler: int | None = None
                     ) -> EmbeddingConfig:
    """Pick tau from the delayed mutual information and dim from FNN + Cao.

    Fallbacks (recorded in ``flags``): autocorrelation first zero when the DMI
    curve has no interior minimum, then tau = 1; dim = max_dim when no
    dimension passes both tests.
    """
    x = as_array(ts)
    if x.size < 500:
        raise ArgumentError("embedding selection needs at least 500 samples")
    if max_tau is None:
        max_tau = min(50, x.size // 10)
    flags = []
    est = first_dmi_minimum(delayed_mutual_information(x, max_tau, bins))
    tau = est.tau
    if not est.local_minimum:
        try:
            tau = autocorrelation_first_zero(x, max_tau).tau
            flags.append("tau_from_autocorrelation")
        except NotFoundError:
            tau = 1
            flags.append("tau_default_1")
    fnn = false_nearest_neighbors(x, tau, max_dim, theiler=theiler)
    cao = cao_afn(x, tau, max_dim + 1, theiler=theiler)
    dim = minimal_dimension(fnn, cao, fnn_threshold, e1_threshold)
    if dim is None:
        dim = max_dim
        flags.append("dim_not_saturated")
    return EmbeddingConfig(tau, dim, tuple(flags))
