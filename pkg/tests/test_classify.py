import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from concrete_rc.classify import (DopingClass, ParallelThresholds, Trend, WaveformClass,
                                  aggregate, build_ledger, classify_doping, classify_parallel,
                                  decision_tree_a, decision_tree_b, fit_thresholds,
                                  load_thresholds)
from concrete_rc.errors import ArgumentError, IncompleteError, ParseError
from concrete_rc.metrics import FeatureVector

FREQS = (290.0, 280.0, 275.0)
SIGN_VALUES = {1: (1.0, 1.5), -1: (1.0, 0.5), 0: (1.0, 1.001)}


def ledger_for(trends: dict):
    """Build a ledger whose parameters aggregate to the requested trends."""
    patterns = {Trend.INCREASES: (1, 1, 1), Trend.DECREASES: (-1, -1, -1),
                Trend.MIXED: (-1, -1, 1), Trend.FLAT: (0, 0, 0)}
    pairs = {}
    for name, trend in trends.items():
        for f, sign in zip(FREQS, patterns[trend]):
            pairs[f, name] = SIGN_VALUES[sign]
    return build_ledger(pairs)


def test_ledger_examples():
    assert ledger_for({"x": Trend.INCREASES}).trend("x") is Trend.INCREASES
    pairs = {(290, "corr_dim"): (2.0, 1.5), (280, "corr_dim"): (2.0, 1.9),
             (275, "corr_dim"): (2.0, 2.3)}
    assert build_ledger(pairs).trend("corr_dim") is Trend.MIXED
    flat = {(f, "mle"): (1.0, 1.004) for f in FREQS}
    assert build_ledger(flat).trend("mle") is Trend.FLAT


def test_ledger_dead_band_edges():
    assert build_ledger({(290, "a"): (2.0, 2.01)}, 0.005).trend("a") is Trend.FLAT
    assert build_ledger({(290, "a"): (2.0, 2.0101)}, 0.005).trend("a") is Trend.INCREASES
    assert build_ledger({(290, "a"): (2.0, 2.0)}, 0.0).trend("a") is Trend.FLAT
    mixed_flat = {(290, "a"): (1.0, 1.5), (280, "a"): (1.0, 1.0)}
    assert build_ledger(mixed_flat).trend("a") is Trend.INCREASES


def test_ledger_errors_and_skips():
    with pytest.raises(ArgumentError):
        build_ledger({})
    with pytest.raises(ArgumentError):
        build_ledger({(290, "a"): (1.0, 2.0)}, -0.1)
    led = build_ledger({(290, "a"): (1.0, None), (280, "a"): (float("nan"), 1.0),
                        (290, "b"): (1.0, 2.0)})
    assert "a" not in led and "b" in led
    with pytest.raises(IncompleteError):
        led.trend("a")


def test_ledger_serialises():
    led = ledger_for({"perm_entropy": Trend.MIXED})
    d = json.loads(json.dumps(led.to_dict()))
    entry = d["parameters"]["perm_entropy"]
    assert entry["trend"] == "Mixed"
    assert entry["directions"] == {"275": 1, "280": -1, "290": -1}


@settings(max_examples=60)
@given(st.lists(st.tuples(st.floats(-10, 10).filter(lambda v: abs(v) > 1e-3),
                          st.floats(-10, 10)), min_size=1, max_size=6),
       st.randoms(use_true_random=False))
def test_ledger_permutation_invariant(values, rnd):
    pairs = {(200.0 + i, "p"): v for i, v in enumerate(values)}
    items = list(pairs.items())
    rnd.shuffle(items)
    assert build_ledger(dict(items)).trend("p") is build_ledger(pairs).trend("p")


@given(st.lists(st.sampled_from([-1, 0, 1]), min_size=1, max_size=8))
def test_aggregate_consistent(dirs):
    t = aggregate(dirs)
    nonflat = {d for d in dirs if d}
    if not nonflat:
        assert t is Trend.FLAT
    elif nonflat == {1}:
        assert t is Trend.INCREASES
    elif nonflat == {-1}:
        assert t is Trend.DECREASES
    else:
        assert t is Trend.MIXED and len(dirs) >= 2


def test_tree_a_examples():
    tri = ledger_for({"perm_entropy": Trend.DECREASES, "katz_fd": Trend.MIXED,
                      "petrosian_fd_out1": Trend.DECREASES})
    assert decision_tree_a(tri) is WaveformClass.TRIANGLE
    sine = ledger_for({"perm_entropy": Trend.INCREASES, "katz_fd": Trend.INCREASES,
                       "petrosian_fd_out1": Trend.INCREASES})
    assert decision_tree_a(sine) is WaveformClass.SINE
    sq = ledger_for({"perm_entropy": Trend.INCREASES, "katz_fd": Trend.INCREASES,
                     "petrosian_fd_out1": Trend.DECREASES})
    assert decision_tree_a(sq) is WaveformClass.SQUARE


def test_tree_b_examples():
    cases = {(Trend.INCREASES, Trend.DECREASES): WaveformClass.SINE,
             (Trend.DECREASES, Trend.INCREASES): WaveformClass.TRIANGLE,
             (Trend.DECREASES, Trend.DECREASES): WaveformClass.SQUARE}
    for (o1, o2), label in cases.items():
        led = ledger_for({"petrosian_fd_out1": o1, "petrosian_fd_out2": o2})
        assert decision_tree_b(led) is label


def _tree_a_rule(sp, dk, dp):
    if sp is Trend.DECREASES and dk is Trend.MIXED:
        return WaveformClass.TRIANGLE
    return {Trend.INCREASES: WaveformClass.SINE,
            Trend.DECREASES: WaveformClass.SQUARE}.get(dp, WaveformClass.UNKNOWN)


def _tree_b_rule(o1, o2):
    if o1 is Trend.INCREASES:
        return WaveformClass.SINE
    if o2 is Trend.INCREASES:
        return WaveformClass.TRIANGLE
    if o1 is Trend.DECREASES and o2 is Trend.DECREASES:
        return WaveformClass.SQUARE
    return WaveformClass.UNKNOWN


def test_trees_total_over_trend_space():
    for sp, dk, dp in itertools.product(Trend, repeat=3):
        led = ledger_for({"perm_entropy": sp, "katz_fd": dk, "petrosian_fd_out1": dp})
        assert decision_tree_a(led) is _tree_a_rule(sp, dk, dp)
    for o1, o2 in itertools.product(Trend, repeat=2):
        led = ledger_for({"petrosian_fd_out1": o1, "petrosian_fd_out2": o2})
        assert decision_tree_b(led) is _tree_b_rule(o1, o2)


def test_trees_need_complete_ledger():
    led = ledger_for({"perm_entropy": Trend.INCREASES})
    with pytest.raises(IncompleteError):
        decision_tree_a(led)
    with pytest.raises(IncompleteError):
        decision_tree_b(led)


@pytest.mark.parametrize("alpha,label", [(0.62, DopingClass.UNDOPED), (0.18, DopingClass.DOPED),
                                         (0.40, DopingClass.INDETERMINATE),
                                         (0.50, DopingClass.INDETERMINATE),
                                         (0.25, DopingClass.INDETERMINATE)])
def test_doping_examples(alpha, label):
    assert classify_doping({"dfa_alpha": alpha}) is label
    assert classify_doping(FeatureVector(1, 2, dfa_alpha=alpha)) is label


def test_doping_errors():
    with pytest.raises(IncompleteError):
        classify_doping({})
    with pytest.raises(IncompleteError):
        classify_doping(FeatureVector(1, 2))
    with pytest.raises(ArgumentError):
        classify_doping({"dfa_alpha": 0.3}, alpha_hi=0.2, alpha_lo=0.4)


@given(st.floats(-1, 3), st.floats(-1, 3))
def test_doping_monotone(a, b):
    order = [DopingClass.DOPED, DopingClass.INDETERMINATE, DopingClass.UNDOPED]
    lo, hi = sorted((a, b))
    assert order.index(classify_doping({"dfa_alpha": lo})) <= \
        order.index(classify_doping({"dfa_alpha": hi}))


TH = ParallelThresholds(square_petrosian=1.03, petrosian_width=0.01,
                        sine_triangle_entropy=0.6, entropy_width=0.1)


def test_parallel_examples():
    label, conf = classify_parallel({"petrosian_fd": 1.0, "perm_entropy": 0.3}, TH)
    assert label is WaveformClass.SINE and conf == 1.0
    assert classify_parallel({"petrosian_fd": 1.05, "perm_entropy": 0.3}, TH)[0] \
        is WaveformClass.SQUARE
    label, conf = classify_parallel({"petrosian_fd": 1.0, "perm_entropy": 0.6}, TH)
    assert label is WaveformClass.TRIANGLE and conf == 0.5
    _, conf = classify_parallel({"petrosian_fd": 1.0, "perm_entropy": 0.65}, TH)
    assert conf == pytest.approx(0.75)
    with pytest.raises(IncompleteError):
        classify_parallel({"petrosian_fd": 1.0}, TH)


@given(st.floats(1.0, 1.2), st.floats(0, 1))
def test_parallel_confidence_range(dp, sp):
    _, conf = classify_parallel({"petrosian_fd": dp, "perm_entropy": sp}, TH)
    assert 0.5 <= conf <= 1.0


def test_thresholds_round_trip(tmp_path):
    path = tmp_path / "cal.json"
    path.write_text(json.dumps(TH.to_dict()))
    assert load_thresholds(path) == TH
    assert load_thresholds().version == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**TH.to_dict(), "version": 9}))
    with pytest.raises(ParseError):
        load_thresholds(bad)
    bad.write_text("{")
    with pytest.raises(ParseError):
        load_thresholds(bad)
    with pytest.raises(ParseError):
        load_thresholds(tmp_path / "missing.json")
    with pytest.raises(ArgumentError):
        ParallelThresholds(1.0, 0.0, 0.5, 0.1)


def test_fit_thresholds_separable():
    rows = [("Sine", 1.00, 0.30), ("Sine", 1.01, 0.35), ("Triangle", 1.01, 0.55),
            ("Triangle", 1.00, 0.60), ("Square", 1.10, 0.90), ("Square", 1.12, 0.80)]
    th = fit_thresholds(rows)
    assert th.square_petrosian == pytest.approx(1.055)
    assert th.sine_triangle_entropy == pytest.approx(0.45)
    assert th.fit == {"rows": 6, "square_errors": 0, "sine_triangle_errors": 0}
    for shape, dp, sp in rows:
        assert classify_parallel({"petrosian_fd": dp, "perm_entropy": sp}, th)[0].value == shape
    with pytest.raises(ArgumentError):
        fit_thresholds(rows[:2])
