"""Command line entry point.

Exit codes: 0 success, 2 argument error, 3 data error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import csvio
from .classify import (build_ledger, classify_doping, classify_parallel, decision_tree_a,
                       decision_tree_b, load_thresholds)
from .embedding import EmbeddingConfig
from .errors import ArgumentError, ConcreteRCError
from .metrics import AnalysisSettings
from .pipeline import (RunManifest, analyze_window, clean_json, load_manifest, run_pipeline,
                       write_json)
from .plotdata import PLOT_KINDS, plotdata
from .reservoir import SubstrateKind, default_params, load_params, simulate
from .signals import DEFAULT_SAMPLE_RATE, WaveformSpec, synthesize


def _emit(obj, out: str | None) -> None:
    if out:
        write_json(out, obj)
    else:
        print(json.dumps(clean_json(obj), indent=2, sort_keys=True))


def cmd_synth(args) -> None:
    spec = WaveformSpec(args.shape, args.freq, args.amplitude_pp, args.phase, args.offset)
    dt = 1.0 / args.rate
    n = args.n if args.n is not None else int(round(args.duration * args.rate))
    csvio.write_csv(synthesize(spec, dt, n), args.output)


def cmd_simulate(args) -> None:
    in1 = csvio.ingest_csv(args.in1)
    in2 = csvio.ingest_csv(args.in2)
    params = load_params(args.params) if args.params else default_params(args.kind)
    if args.seed is not None:
        params = params.replace(seed=args.seed)
    outs = simulate(in1, in2, params)
    csvio.write_csv(outs.out1, args.out1)
    csvio.write_csv(outs.out2, args.out2)


def _analysis_from_args(args):
    config = None
    if args.tau is not None or args.dim is not None:
        if args.tau is None or args.dim is None:
            raise ArgumentError("--tau and --dim must be given together")
        config = EmbeddingConfig(args.tau, args.dim)
    settings = AnalysisSettings(entropy_m=args.entropy_m, entropy_r=args.entropy_r,
                                dfa_min_window=args.dfa_min,
                                dfa_max_window=args.dfa_max)
    return config, settings


def cmd_analyze(args) -> None:
    ts = csvio.ingest_csv(args.series)
    config, settings = _analysis_from_args(args)
    length = args.length if args.length is not None else len(ts) - args.start
    _, fv = analyze_window(ts, args.start, length, config, settings)
    _emit(fv.to_dict(), args.output)


def _read_features(path):
    return json.loads(Path(path).read_text())


def cmd_classify(args) -> None:
    pairs = {}
    doping = {}
    parallel = {}
    thresholds = load_thresholds(args.calibration)
    for item in args.pair:
        parts = item.split(":")
        if len(parts) not in (3, 5):
            raise ArgumentError(f"--pair wants FREQ:U_OUT1:D_OUT1[:U_OUT2:D_OUT2], got {item!r}")
        freq = float(parts[0])
        u1, d1 = _read_features(parts[1]), _read_features(parts[2])
        for name in ("perm_entropy", "katz_fd", "corr_dim", "mle", "dfa_alpha", "sampen"):
            pairs[(freq, name)] = (u1.get(name), d1.get(name))
        pairs[(freq, "petrosian_fd_out1")] = (u1.get("petrosian_fd"), d1.get("petrosian_fd"))
        if len(parts) == 5:
            u2, d2 = _read_features(parts[3]), _read_features(parts[4])
            pairs[(freq, "petrosian_fd_out2")] = (u2.get("petrosian_fd"), d2.get("petrosian_fd"))
        key = f"{freq:g}"
        doping[key] = {"undoped": classify_doping(u1).value, "doped": classify_doping(d1).value}
        parallel[key] = {k: dict(zip(("label", "confidence"),
                                     (lambda r: (r[0].value, r[1]))(classify_parallel(fv, thresholds))))
                         for k, fv in (("undoped", u1), ("doped", d1))}
    ledger = build_ledger(pairs, args.epsilon)
    report = {"tree_a": decision_tree_a(ledger).value, "ledger": ledger.to_dict(),
              "doping": doping, "parallel": parallel}
    report["tree_b"] = (decision_tree_b(ledger).value if "petrosian_fd_out2" in ledger
                        else None)
    _emit(report, args.output)


_PIPELINE_FLAGS = {"output_dir": "output_dir", "epsilon": "epsilon_rel"}


def cmd_pipeline(args) -> None:
    manifest = load_manifest(args.manifest)
    data = manifest.to_dict()
    explicit = args.manifest is not None
    overrides = {}
    for flag, key in _PIPELINE_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            overrides[key] = value
    for kind in ("undoped", "doped"):
        value = getattr(args, f"{kind}_params")
        if value is not None:
            overrides[("params", kind)] = str(Path(value).resolve())
        value = getattr(args, f"{kind}_seed")
        if value is not None:
            overrides[("seeds", kind)] = value
    for key, value in overrides.items():
        section, name = key if isinstance(key, tuple) else (None, key)
        current = data[section].get(name) if section else data.get(name)
        if explicit and current is not None and current != value:
            warnings.warn(f"manifest value {current!r} for {'.'.join(filter(None, (section, name)))} "
                          f"overrides command line value {value!r}")
            continue
        if section:
            data[section][name] = value
        else:
            data[name] = value
    manifest = RunManifest.from_dict(data, manifest.base_dir)
    result = run_pipeline(manifest, None)
    for label, rep in result["summary"]["labels"].items():
        print(f"{label}: tree_a={rep['tree_a']} tree_b={rep['tree_b']}")
    print(f"outputs in {result['output_dir']}")


def cmd_plotdata(args) -> None:
    inputs = {k: v for k, v in (("series", args.series), ("run_dir", args.run_dir),
                                ("tau", args.tau), ("dim", args.dim),
                                ("max_tau", args.max_tau), ("max_dim", args.max_dim))
              if v is not None}
    plotdata(args.kind, inputs, args.output)


def _add_analysis_flags(p) -> None:
    p.add_argument("--tau", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--entropy-m", type=int, default=2)
    p.add_argument("--entropy-r", type=float, default=0.2)
    p.add_argument("--dfa-min", type=int, default=4)
    p.add_argument("--dfa-max", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="concrete-rc",
                                     description="Reservoir-computing waveform classifier.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a drive waveform as CSV")
    p.add_argument("--shape", required=True, choices=["sine", "triangle", "square"])
    p.add_argument("--freq", type=float, required=True)
    p.add_argument("--amplitude-pp", type=float, default=10.0)
    p.add_argument("--phase", type=float, default=0.0)
    p.add_argument("--offset", type=float, default=0.0)
    p.add_argument("--rate", type=float, default=DEFAULT_SAMPLE_RATE)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--n", type=int)
    g.add_argument("--duration", type=float)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("simulate", help="drive a substrate with two CSV inputs")
    p.add_argument("--in1", required=True)
    p.add_argument("--in2", required=True)
    p.add_argument("--kind", type=SubstrateKind, choices=list(SubstrateKind),
                   default=SubstrateKind.DOPED)
    p.add_argument("--params", help="substrate parameter file (overrides --kind defaults)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out1", required=True)
    p.add_argument("--out2", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="feature vector of one CSV series")
    p.add_argument("series")
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--length", type=int)
    _add_analysis_flags(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("classify", help="trend ledger and labels from feature files")
    p.add_argument("--pair", action="append", required=True,
                   metavar="FREQ:U_OUT1:D_OUT1[:U_OUT2:D_OUT2]")
    p.add_argument("--epsilon", type=float, default=0.005)
    p.add_argument("--calibration")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("pipeline", help="run the full experiment matrix")
    p.add_argument("--manifest", help="run manifest (JSON); shipped default if omitted")
    p.add_argument("--output-dir")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--undoped-params")
    p.add_argument("--doped-params")
    p.add_argument("--undoped-seed", type=int)
    p.add_argument("--doped-seed", type=int)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("plotdata", help="CSV matrices for figure regeneration")
    p.add_argument("kind", choices=PLOT_KINDS)
    p.add_argument("--series")
    p.add_argument("--run-dir")
    p.add_argument("--tau", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--max-tau", type=int)
    p.add_argument("--max-dim", type=int)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with np.errstate(all="ignore"):
            args.func(args)
    except ConcreteRCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
