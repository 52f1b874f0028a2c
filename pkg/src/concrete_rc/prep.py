"""Series standardisation and the augmented Dickey-Fuller stationarity check."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import norm

from .errors import ArgumentError, DegenerateInputError, NumericalError
from .signals import TimeSeries

ADF_MIN_LENGTH = 20

# MacKinnon (1994), "Approximate asymptotic distribution functions for
# unit-root and cointegration tests", J. Bus. Econ. Stat. 12(2), table for a
# single I(1) series with constant and no trend.  Polynomials in the test
# statistic, evaluated under the standard normal CDF.
_TAU_MAX = 2.74
_TAU_MIN = -18.83
_TAU_STAR = -1.61
_SMALL_P = (2.1659, 1.4412, 0.038269)
_LARGE_P = (1.7339, 0.93202, -0.12745, -0.010368)

# MacKinnon (2010), "Critical values for cointegration tests", Queen's
# Economics Department WP 1227, table 2 (constant, N=1): finite-sample
# response surface crit = b0 + b1/T + b2/T^2 + b3/T^3.
_CRIT_2010 = {
    "1%": (-3.43035, -6.5393, -16.786, -79.433),
    "5%": (-2.86154, -2.8903, -4.234, -40.04),
    "10%": (-2.56677, -1.5384, -2.809, 0.0),
}


@dataclass(frozen=True)
class StationarityReport:
    adf_statistic: float
    p_value: float
    lags_used: int
    nobs: int
    critical_values: dict
    reject_unit_root: bool

    def to_dict(self) -> dict:
        return asdict(self)


def normalize(ts: TimeSeries) -> TimeSeries:
    """Zero mean, unit sample (ddof=1) standard deviation."""
    x = ts.samples
    sd = x.std(ddof=1)
    if not sd > 0 or np.ptp(x) == 0:
        raise DegenerateInputError("cannot normalize a constant series")
    z = (x - x.mean()) / sd
    return ts.with_samples(z)


def default_max_lag(n: int) -> int:
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def mackinnon_p(stat: float) -> float:
    if stat > _TAU_MAX:
        return 1.0
    if stat < _TAU_MIN:
        return 0.0
    coef = _SMALL_P if stat <= _TAU_STAR else _LARGE_P
    return float(norm.cdf(np.polyval(coef[::-1], stat)))


def mackinnon_crit(nobs: int) -> dict:
    return {k: float(b0 + b1 / nobs + b2 / nobs**2 + b3 / nobs**3)
            for k, (b0, b1, b2, b3) in _CRIT_2010.items()}


def _design(x: np.ndarray, lags: int, nobs: int):
    """Response and regressors [x_{t-1}, dx_{t-1..t-lags}, 1] over the last nobs rows."""
    dx = np.diff(x)
    n = dx.size
    y = dx[n - nobs:]
    cols = [x[n - nobs:n]]
    for k in range(1, lags + 1):
        cols.append(dx[n - nobs - k:n - k])
    cols.append(np.ones(nobs))
    return y, np.column_stack(cols)


def _ols(y, X):
    coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1]:
        raise NumericalError("singular ADF regression")
    resid = y - X @ coef
    return coef, float(resid @ resid)


def adf_test(ts, max_lag: int | None = None, alpha: float = 0.05) -> StationarityReport:
    """ADF regression with constant; lag order chosen by AIC up to ``max_lag``.

    All candidate lag orders are compared on a common sample (the one left by
    the largest lag); the chosen order is then refit on the longest sample it
    permits.
    """
    x = ts.samples if isinstance(ts, TimeSeries) else np.asarray(ts, dtype=float)
    n = x.size
    if n < ADF_MIN_LENGTH:
        raise ArgumentError(f"ADF needs at least {ADF_MIN_LENGTH} samples, got {n}")
    if max_lag is None:
        max_lag = default_max_lag(n)
    max_lag = max(0, min(int(max_lag), n // 2 - 3))
    # the statistic is affine invariant; standardising keeps the regression well conditioned
    scale = float(x.std())
    if scale == 0:
        raise DegenerateInputError("ADF test of a constant series")
    x = (x - x.mean()) / scale

    common = n - 1 - max_lag
    best = None
    for lag in range(max_lag + 1):
        y, X = _design(x, lag, common)
        _, ssr = _ols(y, X)
        if ssr <= 0:
            raise NumericalError("perfect fit in ADF regression")
        k = X.shape[1]
        aic = common * math.log(ssr / common) + 2 * k
        if best is None or aic < best[0]:
            best = (aic, lag)
    lag = best[1]

    nobs = n - 1 - lag
    y, X = _design(x, lag, nobs)
    coef, ssr = _ols(y, X)
    dof = nobs - X.shape[1]
    if dof <= 0 or ssr <= 0:
        raise NumericalError("ADF regression has no residual degrees of freedom")
    cov = np.linalg.inv(X.T @ X) * (ssr / dof)
    stat = float(coef[0] / math.sqrt(cov[0, 0]))
    p = mackinnon_p(stat)
    return StationarityReport(
        adf_statistic=stat,
        p_value=p,
        lags_used=lag,
        nobs=nobs,
        critical_values=mackinnon_crit(nobs),
        reject_unit_root=bool(p < alpha),
    )
