"""Waveform-domain fractal dimensions (Katz, Petrosian)."""
from __future__ import annotations

import numpy as np

from ..errors import ArgumentError, DegenerateInputError
from ..signals import as_array


def _check(x: np.ndarray) -> None:
    if x.size < 3:
        raise ArgumentError("fractal dimension needs at least 3 samples")


def katz_fd(ts) -> float:
    """Katz dimension of the curve (k, x[k]) drawn with unit abscissa steps.

    Not amplitude invariant: rescaling x changes the path length L.
    """
    x = as_array(ts)
    _check(x)
    if np.ptp(x) == 0:
        raise DegenerateInputError("Katz dimension of a constant series")
    k = np.arange(x.size, dtype=float)
    L = float(np.sum(np.hypot(1.0, np.diff(x))))
    a = L / (x.size - 1)
    n = L / a
    d = float(np.max(np.hypot(k, x - x[0])))
    ln = np.log10(n)
    return float(ln / (np.log10(d / L) + ln))


def derivative_sign_changes(x: np.ndarray) -> int:
    """Sign changes of the first difference; zero steps keep the previous sign."""
    s = np.sign(np.diff(x))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def petrosian_fd(ts) -> float:
    x = as_array(ts)
    _check(x)
    n = x.size
    n_delta = derivative_sign_changes(x)
    ln = np.log10(n)
    return float(ln / (ln + np.log10(n / (n + 0.4 * n_delta))))
