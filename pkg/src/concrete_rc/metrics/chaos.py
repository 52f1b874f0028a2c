"""Largest Lyapunov exponent, detrended fluctuation analysis, correlation dimension."""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import cdist

from ..embedding import EmbeddingConfig, delay_matrix
from ..errors import ArgumentError, InsufficientDataError, NumericalError
from ..neighbors import nearest_neighbors
from ..signals import as_array

SLOPE_SPREAD = 0.15


class Estimate(NamedTuple):
    value: float
    fit_quality: float
    flags: tuple = ()


def _linear_fit(x: np.ndarray, y: np.ndarray):
    """Least-squares slope, intercept and R^2."""
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 0.0
    return float(slope), float(intercept), r2


def mean_period(x: np.ndarray) -> float:
    """Reciprocal of the power-weighted mean frequency, in samples."""
    p = np.abs(np.fft.rfft(x - x.mean())) ** 2
    f = np.fft.rfftfreq(x.size)
    if p[1:].sum() == 0:
        return float(x.size)
    return 1.0 / float(np.sum(f[1:] * p[1:]) / np.sum(p[1:]))


def divergence_curve(x, config: EmbeddingConfig, trajectory_len: int = 20,
                     theiler: int | None = None) -> np.ndarray:
    """Mean log distance between initially nearest orbit points, k = 0..len-1."""
    x = as_array(x)
    config.check(x.size)
    if theiler is None:
        theiler = int(math.ceil(mean_period(x)))
    orbit = delay_matrix(x, config.tau, config.dim)
    n_traj = orbit.shape[0] - trajectory_len + 1
    if n_traj <= 2 * theiler + 2:
        raise InsufficientDataError(
            f"{orbit.shape[0]} orbit points too few for trajectory_len={trajectory_len} "
            f"and Theiler window {theiler}"
        )
    # exact recurrences (periodic input) carry only rounding noise
    coincident = 1e-9 * float(x.std())
    nn, _ = nearest_neighbors(orbit, theiler, skip_within=coincident, limit=n_traj)
    i = np.arange(n_traj)
    curve = np.empty(trajectory_len)
    for k in range(trajectory_len):
        d = np.linalg.norm(orbit[i + k] - orbit[nn + k], axis=1)
        d = d[d > 0]
        if d.size == 0:
            raise InsufficientDataError(f"all neighbour pairs coincide at step {k}")
        curve[k] = np.mean(np.log(d))
    return curve


def max_lyapunov(ts, config: EmbeddingConfig, trajectory_len: int = 20,
                 theiler: int | None = None, fit_fraction: float = 0.8) -> Estimate:
    """Rosenstein estimate of the largest Lyapunov exponent, per sample.

    The initial linear region runs from k = 0 until the divergence curve first
    covers ``fit_fraction`` of its total rise (at least three points).
    """
    curve = divergence_curve(ts, config, trajectory_len, theiler)
    rise = float(curve.max() - curve[0])
    if rise <= 1e-9 * max(1.0, abs(curve[0])):
        return Estimate(0.0, 0.0, ("flat_divergence",))
    end = int(np.argmax(curve >= curve[0] + fit_fraction * rise))
    end = max(end, 2)
    k = np.arange(end + 1, dtype=float)
    slope, _, r2 = _linear_fit(k, curve[:end + 1])
    flags = ("low_fit_quality",) if r2 < 0.5 else ()
    return Estimate(slope, r2, flags)


def dfa_window_sizes(n: int, min_window: int = 4, max_window: int | None = None,
                     count: int = 16) -> np.ndarray:
    if max_window is None:
        max_window = n // 4
    if min_window < 3 or max_window <= min_window:
        raise ArgumentError(f"bad DFA window range [{min_window}, {max_window}]")
    if n < 4 * max_window:
        raise ArgumentError(f"DFA needs len >= 4*max_window ({4 * max_window}), got {n}")
    sizes = np.unique(np.round(np.geomspace(min_window, max_window, count)).astype(int))
    return sizes


def fluctuation(profile: np.ndarray, n: int) -> float:
    """RMS residual of a linear fit in non-overlapping windows of size n."""
    k = profile.size // n
    seg = profile[:k * n].reshape(k, n)
    t = np.arange(n, dtype=float)
    tc = t - t.mean()
    slope = (seg - seg.mean(axis=1, keepdims=True)) @ tc / (tc @ tc)
    resid = seg - seg.mean(axis=1, keepdims=True) - np.outer(slope, tc)
    return float(np.sqrt(np.mean(resid**2)))


def dfa(ts, min_window: int = 4, max_window: int | None = None,
        count: int = 16) -> Estimate:
    """First-order DFA exponent: log-log slope of F(n) against window size n."""
    x = as_array(ts)
    sizes = dfa_window_sizes(x.size, min_window, max_window, count)
    profile = np.cumsum(x - x.mean())
    f = np.array([fluctuation(profile, n) for n in sizes])
    if np.any(f <= 0) or sizes.size < 2:
        raise NumericalError("degenerate DFA fluctuation function")
    alpha, _, r2 = _linear_fit(np.log(sizes), np.log(f))
    return Estimate(alpha, r2)


def _pair_distances(points: np.ndarray, theiler: int) -> np.ndarray:
    """Euclidean distances over pairs i < j with j - i > theiler."""
    m = points.shape[0]
    out = []
    step = max(1, 2_000_000 // max(m, 1))
    for start in range(0, m, step):
        stop = min(m, start + step)
        d = cdist(points[start:stop], points)
        rows = np.arange(start, stop)[:, None]
        keep = np.arange(m)[None, :] > rows + theiler
        out.append(d[keep])
    return np.concatenate(out) if out else np.empty(0)


def correlation_sum(distances: np.ndarray, r_grid: np.ndarray) -> np.ndarray:
    """Fraction of pairs with distance <= r, for each r in the grid."""
    idx = np.searchsorted(r_grid, distances, side="left")
    counts = np.cumsum(np.bincount(idx, minlength=r_grid.size + 1)[:r_grid.size])
    return counts / distances.size


def default_r_grid(distances: np.ndarray, size: int = 20,
                   q_lo: float = 1e-3, q_hi: float = 0.2) -> np.ndarray:
    pos = distances[distances > 0]
    lo, hi = np.quantile(pos, [q_lo, q_hi])
    if not hi > lo:
        hi = lo * 10
    return np.geomspace(lo, hi, size)


def scaling_region(log_r: np.ndarray, log_c: np.ndarray, spread: float = SLOPE_SPREAD):
    """Longest run of consecutive radii whose local slopes agree within ``spread``.

    Agreement is (max - min) / |mean| of the local slopes. Returns (start,
    stop) radius indices, inclusive, or None when no run of two or more slopes
    qualifies.
    """
    slopes = np.diff(log_c) / np.diff(log_r)
    best = None
    for a in range(slopes.size):
        for b in range(a + 1, slopes.size):
            s = slopes[a:b + 1]
            mu = abs(s.mean())
            if mu == 0 or (s.max() - s.min()) / mu >= spread:
                break
            if best is None or b - a > best[1] - best[0]:
                best = (a, b)
    if best is None:
        return None
    return best[0], best[1] + 1


def correlation_dimension(ts, config: EmbeddingConfig, r_grid=None,
                          theiler: int | None = None, region=None,
                          spread: float = SLOPE_SPREAD) -> Estimate:
    """Grassberger-Procaccia slope of log C(r) against log r.

    ``region`` (r_lo, r_hi) overrides the automatic scaling-region search.
    """
    x = as_array(ts)
    config.check(x.size)
    theiler = config.tau if theiler is None else theiler
    points = delay_matrix(x, config.tau, config.dim)
    dist = _pair_distances(points, theiler)
    if dist.size < 10:
        raise InsufficientDataError("too few point pairs for a correlation sum")
    if r_grid is None:
        if not np.any(dist > 0):
            return Estimate(0.0, 1.0, ("degenerate_attractor",))
        r_grid = default_r_grid(dist)
    r_grid = np.sort(np.asarray(r_grid, dtype=float))
    if r_grid.size < 8 or r_grid[0] <= 0:
        raise ArgumentError("r_grid needs at least 8 positive radii")
    c = correlation_sum(dist, r_grid)
    ok = c > 0
    if ok.sum() < 2:
        raise InsufficientDataError("correlation sum empty over the radius grid")
    log_r, log_c = np.log(r_grid[ok]), np.log(c[ok])
    if np.all(log_c == log_c[0]):
        return Estimate(0.0, 1.0, ("constant_correlation_sum",))

    flags = []
    if region is not None:
        sel = (r_grid[ok] >= region[0]) & (r_grid[ok] <= region[1])
        if sel.sum() < 2:
            raise ArgumentError("manual scaling region holds fewer than 2 radii")
        flags.append("manual_region")
    else:
        found = scaling_region(log_r, log_c, spread)
        sel = np.zeros(log_r.size, dtype=bool)
        if found is None:
            sel[:] = True
            flags.append("no_scaling_region")
        else:
            sel[found[0]:found[1] + 1] = True
    nu, _, r2 = _linear_fit(log_r[sel], log_c[sel])
    return Estimate(nu, r2, tuple(flags))
