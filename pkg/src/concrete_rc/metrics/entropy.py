"""Template-matching and ordinal entropies.

Sample and approximate entropy use the Chebyshev distance between templates
and the tolerance ``r`` in units of the series' sample standard deviation;
a pair matches when its distance is ``<= r``. Pair counts are accumulated
one lag-diagonal at a time so memory stays linear in the series length.
"""
from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ArgumentError, UndefinedEntropyError
from ..signals import as_array


def _tolerance(x: np.ndarray, r: float) -> float:
    if not r > 0:
        raise ArgumentError(f"tolerance r must be > 0, got {r!r}")
    return r * float(x.std(ddof=1))


def _diagonal_distances(x: np.ndarray, k: int, m: int) -> np.ndarray:
    """Chebyshev distance between templates i and i+k, for every valid i."""
    a = np.abs(x[:-k] - x[k:])
    if m == 1:
        return a
    return sliding_window_view(a, m).max(axis=1)


def match_counts(x, m: int, r: float):
    """Numbers (B, A) of template pairs i < j matching at lengths m and m+1.

    Both lengths use the same N - m template starts, as in Richman & Moorman.
    """
    x = as_array(x)
    tol = _tolerance(x, r)
    n_t = x.size - m
    b = a = 0
    for k in range(1, n_t):
        dm = _diagonal_distances(x, k, m)[:n_t - k]
        hit = dm <= tol
        b += int(np.count_nonzero(hit))
        dm1 = np.maximum(dm, np.abs(x[m:m + n_t - k] - x[m + k:m + n_t]))
        a += int(np.count_nonzero(dm1 <= tol))
    return b, a


def _check_series(x: np.ndarray, m: int) -> None:
    if m < 1:
        raise ArgumentError("template length m must be >= 1")
    if x.size < 100:
        raise ArgumentError("template entropies need at least 100 samples")


def sample_entropy(ts, m: int = 2, r: float = 0.2) -> float:
    """-ln(A/B); ``inf`` when no (m+1)-length pair matches."""
    x = as_array(ts)
    _check_series(x, m)
    b, a = match_counts(x, m, r)
    if b == 0:
        raise UndefinedEntropyError(f"no template pairs match at m={m}")
    if a == 0:
        return math.inf
    return -math.log(a / b)


def approximate_entropy(ts, m: int = 2, r: float = 0.2) -> float:
    """Pincus' ApEn, Phi_m(r) - Phi_{m+1}(r), self-matches included."""
    x = as_array(ts)
    _check_series(x, m)
    tol = _tolerance(x, r)
    n = x.size
    n_m, n_m1 = n - m + 1, n - m
    c_m = np.ones(n_m)
    c_m1 = np.ones(n_m1)
    for k in range(1, n_m):
        dk = _diagonal_distances(x, k, m)
        hit = dk <= tol
        c_m[:n_m - k] += hit
        c_m[k:] += hit
        if k < n_m1:
            d1 = np.maximum(dk[:n_m1 - k],
                            np.abs(x[m:n - k] - x[m + k:]))
            hit1 = d1 <= tol
            c_m1[:n_m1 - k] += hit1
            c_m1[k:] += hit1
    phi_m = float(np.mean(np.log(c_m / n_m)))
    phi_m1 = float(np.mean(np.log(c_m1 / n_m1)))
    return phi_m - phi_m1


def ordinal_distribution(ts, m: int = 3, tau: int = 1) -> dict:
    """Relative frequency of each ordinal pattern.

    Keys are tuples of the 0-based positions in ascending value order; equal
    values are ranked by their position in time.
    """
    x = as_array(ts)
    if not 2 <= m <= 7:
        raise ArgumentError(f"pattern length m must be in [2, 7], got {m}")
    if tau < 1:
        raise ArgumentError("tau must be >= 1")
    rows = x.size - (m - 1) * tau
    if rows < 1:
        raise ArgumentError("series shorter than one ordinal template")
    windows = np.stack([x[j * tau:j * tau + rows] for j in range(m)], axis=1)
    patterns = np.argsort(windows, axis=1, kind="stable")
    uniq, counts = np.unique(patterns, axis=0, return_counts=True)
    return {tuple(int(v) for v in u): c / rows for u, c in zip(uniq, counts)}


def permutation_entropy(ts, m: int = 3, tau: int = 1) -> float:
    """Shannon entropy (natural log) of ordinal patterns, normalised by ln(m!)."""
    x = as_array(ts)
    if 2 <= m <= 7 and x.size < 10 * math.factorial(m):
        raise ArgumentError(f"need at least {10 * math.factorial(m)} samples for m={m}")
    p = np.array(list(ordinal_distribution(x, m, tau).values()))
    h = -float(np.sum(p * np.log(p)))
    return max(0.0, h) / math.log(math.factorial(m))
