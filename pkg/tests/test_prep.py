import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from statsmodels.tsa.stattools import adfuller

from concrete_rc.errors import ArgumentError, DegenerateInputError
from concrete_rc.prep import adf_test, default_max_lag, mackinnon_p, normalize
from concrete_rc.signals import TimeSeries


def test_normalize_three_points():
    z = normalize(TimeSeries([1.0, 2.0, 3.0], 0.1, {"terminal": "out2"}))
    assert np.allclose(z.samples, [-1, 0, 1], atol=1e-15)
    assert z.dt == 0.1 and z.meta["terminal"] == "out2"


def test_normalize_constant():
    with pytest.raises(DegenerateInputError):
        normalize(TimeSeries([2.0, 2.0, 2.0], 1.0))


@settings(max_examples=50)
@given(st.integers(0, 10_000), st.integers(3, 400))
def test_normalize_idempotent(seed, n):
    x = np.random.default_rng(seed).normal(3, 7, n)
    z = normalize(TimeSeries(x, 1.0))
    zz = normalize(z)
    assert abs(z.samples.mean()) < 1e-12 and abs(z.samples.std(ddof=1) - 1) < 1e-12
    assert np.max(np.abs(zz.samples - z.samples)) < 1e-12


@pytest.mark.parametrize("seed", range(10))
def test_adf_matches_statsmodels(seed):
    x = np.random.default_rng(seed).normal(size=500)
    for series in (x, np.cumsum(x), np.sin(np.arange(500) / 7) + 0.3 * x):
        ours = adf_test(series)
        ref = adfuller(series, maxlag=default_max_lag(series.size), regression="c",
                       autolag="AIC")
        assert ours.adf_statistic == pytest.approx(ref[0], rel=1e-6)
        assert ours.lags_used == ref[2]
        assert abs(ours.p_value - ref[1]) <= 0.02


def test_adf_white_noise_and_random_walk():
    x = np.random.default_rng(42).normal(size=500)
    assert adf_test(TimeSeries(x, 1.0)).reject_unit_root
    assert not adf_test(np.cumsum(x)).reject_unit_root


def test_adf_report_fields():
    rep = adf_test(np.random.default_rng(1).normal(size=300))
    assert 0 <= rep.p_value <= 1
    assert rep.reject_unit_root == (rep.p_value < 0.05)
    assert set(rep.critical_values) == {"1%", "5%", "10%"}
    d = rep.to_dict()
    assert d["reject_unit_root"] == rep.reject_unit_root


def test_adf_too_short():
    with pytest.raises(ArgumentError):
        adf_test(np.arange(10.0))


def test_default_max_lag():
    assert default_max_lag(500) == 17
    assert default_max_lag(100) == 12


@given(st.floats(-30, 10))
def test_mackinnon_p_in_unit_interval(stat):
    assert 0.0 <= mackinnon_p(stat) <= 1.0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 1000), st.floats(0.01, 100), st.floats(-50, 50))
def test_adf_affine_invariance(seed, a, b):
    x = np.random.default_rng(seed).normal(size=200)
    r0, r1 = adf_test(x), adf_test(a * x + b)
    assert abs(r0.adf_statistic - r1.adf_statistic) < 1e-8
    assert r0.lags_used == r1.lags_used
