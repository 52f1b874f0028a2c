import json

import numpy as np
import pytest

from concrete_rc import csvio
from concrete_rc.cli import main
from concrete_rc.errors import ParseError
from concrete_rc.pipeline import load_manifest
from concrete_rc.signals import WaveformSpec, synthesize


def write(path, text):
    path.write_text(text)
    return path


def test_synth_and_ingest_round_trip(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["synth", "--shape", "sine", "--freq", "300", "--n", "1000", "-o", str(out)]) == 0
    ts = csvio.ingest_csv(out)
    assert len(ts) == 1000 and ts.dt == pytest.approx(2e-5)
    assert ts.samples.max() == pytest.approx(5.0, abs=1e-3)
    ref = synthesize(WaveformSpec("sine", 300), 2e-5, 1000)
    assert np.max(np.abs(ts.samples - ref.samples)) <= 1e-9


def test_ingest_three_rows(tmp_path):
    ts = csvio.ingest_csv(write(tmp_path / "a.csv", "t_s,v_volts\n0,1.5\n0.001,2\n0.002,-1\n"))
    assert len(ts) == 3 and ts.dt == pytest.approx(1e-3) and ts.samples.tolist() == [1.5, 2, -1]


@pytest.mark.parametrize("text,needle", [
    ("", "empty"),
    ("time,volts\n0,1\n", "header"),
    ("t_s,v_volts\n", "no data"),
    ("t_s,v_volts\n0,1\n1,x\n", "row 3"),
    ("t_s,v_volts\n0,1\n1,2,3\n", "row 3"),
    ("t_s,v_volts\n0,1\n1,inf\n", "row 3"),
    ("t_s,v_volts\n0,1\n1,2\n1,3\n", "strictly increasing"),
    ("t_s,v_volts\n0,1\n1,2\n2,3\n3.5,4\n4.5,5\n", "rows [5]"),
])
def test_ingest_errors(tmp_path, text, needle):
    with pytest.raises(ParseError, match=needle.replace("[", r"\[").replace("]", r"\]")):
        csvio.ingest_csv(write(tmp_path / "bad.csv", text))


def test_ingest_exit_code(tmp_path, capsys):
    bad = write(tmp_path / "bad.csv", "nope\n")
    assert main(["analyze", str(bad)]) == 3
    assert "error:" in capsys.readouterr().err


def test_argument_exit_codes(tmp_path):
    assert main([]) == 2
    assert main(["synth", "--shape", "saw", "--freq", "1", "--n", "5", "-o", "x"]) == 2
    assert main(["synth", "--shape", "sine", "--freq", "-1", "--n", "5",
                 "-o", str(tmp_path / "x.csv")]) == 2


def test_missing_file_exit_code(tmp_path):
    assert main(["analyze", str(tmp_path / "missing.csv")]) == 3


def test_degenerate_exit_code(tmp_path):
    # a constant series is degenerate input, a data error
    path = tmp_path / "c.csv"
    csvio.write_matrix(path, ("t_s", "v_volts"), [(k * 1e-3, 1.0) for k in range(600)])
    assert main(["analyze", str(path)]) == 3


def test_simulate_analyze_classify(tmp_path):
    files = {}
    for shape, f in (("sine", 300), ("square", 290)):
        files[shape] = tmp_path / f"{shape}.csv"
        assert main(["synth", "--shape", shape, "--freq", str(f), "--n", "2667",
                     "-o", str(files[shape])]) == 0
    feats = {}
    for kind in ("undoped", "doped"):
        o1, o2 = tmp_path / f"{kind}_1.csv", tmp_path / f"{kind}_2.csv"
        assert main(["simulate", "--in1", str(files["sine"]), "--in2", str(files["square"]),
                     "--kind", kind, "--out1", str(o1), "--out2", str(o2)]) == 0
        for t, path in (("1", o1), ("2", o2)):
            feats[kind, t] = tmp_path / f"fv_{kind}_{t}.json"
            assert main(["analyze", str(path), "--start", "1667", "--length", "500",
                         "--tau", "4", "--dim", "4", "-o", str(feats[kind, t])]) == 0
    fv = json.loads(feats["undoped", "1"].read_text())
    assert fv["tau"] == 4 and "stationarity" in fv and "dfa_alpha" in fv
    report = tmp_path / "report.json"
    pair = ":".join(["290", str(feats["undoped", "1"]), str(feats["doped", "1"]),
                     str(feats["undoped", "2"]), str(feats["doped", "2"])])
    assert main(["classify", "--pair", pair, "-o", str(report)]) == 0
    rep = json.loads(report.read_text())
    assert rep["tree_a"] in {"Sine", "Triangle", "Square", "Unknown"}
    assert rep["tree_b"] in {"Sine", "Triangle", "Square", "Unknown"}
    assert rep["doping"]["290"] == {"undoped": "Undoped", "doped": "Doped"}
    assert main(["classify", "--pair", "290:only"]) == 2


def test_tau_without_dim(tmp_path):
    path = tmp_path / "s.csv"
    main(["synth", "--shape", "sine", "--freq", "300", "--n", "600", "-o", str(path)])
    assert main(["analyze", str(path), "--tau", "3"]) == 2


def test_pipeline_manifest_wins(tmp_path, capsys):
    data = load_manifest().to_dict()
    data["stimuli"] = data["stimuli"][:1]
    data["output_dir"] = str(tmp_path / "from_manifest")
    data["params"] = {k: str(load_manifest().resolve(v)) for k, v in data["params"].items()}
    data["calibration"] = str(load_manifest().resolve(data["calibration"]))
    path = tmp_path / "m.json"
    path.write_text(json.dumps(data))
    with pytest.warns(UserWarning, match="overrides command line"):
        code = main(["pipeline", "--manifest", str(path), "--output-dir", str(tmp_path / "flag")])
    assert code == 0
    assert (tmp_path / "from_manifest" / "summary.json").exists()
    assert not (tmp_path / "flag").exists()


def test_plotdata_cli(tmp_path):
    path = tmp_path / "s.csv"
    main(["synth", "--shape", "triangle", "--freq", "280", "--n", "1000", "-o", str(path)])
    out = tmp_path / "ret.csv"
    assert main(["plotdata", "ReturnPlot", "--series", str(path), "--tau", "5",
                 "-o", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "x_t,x_t_minus_tau" and len(rows) == 996
    assert main(["plotdata", "ReturnPlot", "-o", str(out)]) == 2


def test_error_exit_codes(monkeypatch, capsys):
    from concrete_rc import cli, errors
    assert errors.ConfigurationError.exit_code == 2
    assert errors.IncompleteError.exit_code == 3
    assert errors.InsufficientDataError.exit_code == 4

    def boom(_args):
        raise errors.NotFoundError("no crossing")

    parser = cli.build_parser
    monkeypatch.setattr(cli, "build_parser", lambda: _rebind(parser(), boom))
    assert cli.main(["synth", "--shape", "sine", "--freq", "1", "--n", "5", "-o", "x"]) == 4


def _rebind(parser, func):
    parser._subparsers._group_actions[0].choices["synth"].set_defaults(func=func)
    return parser
