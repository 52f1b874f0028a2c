"""End-to-end run: synthesize, simulate, analyze, classify, write everything."""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import csvio
from .classify import (DEFAULT_EPSILON, ParallelThresholds, TrendLedger, build_ledger,
                       classify_doping, classify_parallel, decision_tree_a, decision_tree_b,
                       load_thresholds)
from .embedding import EmbeddingConfig, select_embedding
from .errors import ArgumentError, ConcreteRCError, ParseError
from .metrics import AnalysisSettings, feature_vector
from .prep import adf_test, normalize
from .reservoir import SubstrateKind, SubstrateParams, load_params, simulate
from .signals import DEFAULT_SAMPLE_RATE, Shape, TimeSeries, WaveformSpec, synthesize

MANIFEST_VERSION = 1
OUTPUT_DIR_ENV = "CONCRETE_RC_OUTPUT_DIR"
ENSEMBLE = "ensemble"
EMBEDDING_MODES = (ENSEMBLE, "per_series")
WINDOW = 500
SETTLE_PERIODS = 10
SUBSTRATES = (SubstrateKind.UNDOPED, SubstrateKind.DOPED)
TERMINALS = ("out1", "out2")


def data_path(name: str) -> Path:
    return Path(str(resources.files("concrete_rc") / "data" / name))


def default_manifest_path() -> Path:
    return data_path("manifest_default.json")


def clean_json(obj):
    """Round floats to 12 significant digits; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): clean_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean_json(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return float(f"{v:.12g}") if math.isfinite(v) else None
    if hasattr(obj, "value") and isinstance(obj.value, str):
        return obj.value
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(clean_json(obj), indent=2, sort_keys=True) + "\n")
    return path


def _spec(data: dict, where: str) -> WaveformSpec:
    try:
        return WaveformSpec(**data)
    except TypeError as exc:
        raise ParseError(f"{where}: {exc}") from None


@dataclass(frozen=True)
class RunManifest:
    """Experiment matrix plus everything needed to reproduce it.

    Relative paths are resolved against ``base_dir`` (the manifest's folder).
    """

    probe: WaveformSpec
    stimuli: tuple
    params_paths: dict
    seeds: dict = field(default_factory=dict)
    analysis: dict = field(default_factory=dict)
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE
    settle_periods: float = SETTLE_PERIODS
    window: int = WINDOW
    duration_s: float | None = None
    epsilon_rel: float = DEFAULT_EPSILON
    calibration: str | None = None
    output_dir: str = "run"
    base_dir: Path = Path(".")

    _ANALYSIS_KEYS = ("tau", "dim", "embedding", "entropy_m", "entropy_r", "perm_m",
                      "perm_tau", "dfa_min_window", "dfa_max_window")

    def __post_init__(self):
        if not self.stimuli:
            raise ArgumentError("manifest lists no stimuli")
        unknown = set(self.analysis) - set(self._ANALYSIS_KEYS)
        if unknown:
            raise ArgumentError(f"unknown analysis keys: {', '.join(sorted(unknown))}")
        for kind in SUBSTRATES:
            if kind.value not in self.params_paths:
                raise ArgumentError(f"manifest lacks a {kind.value} parameter file")
        if self.analysis.get("embedding", ENSEMBLE) not in EMBEDDING_MODES:
            raise ArgumentError(f"analysis.embedding must be one of {', '.join(EMBEDDING_MODES)}")
        if self.window < 500:
            raise ArgumentError("analysis window must hold at least 500 samples")
        labels = [s.label for s in self.stimuli]
        if len(set(labels)) != len(labels):
            raise ArgumentError("stimulus labels (shape + frequency) must be unique")

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate_hz

    @property
    def settle_samples(self) -> int:
        return int(math.ceil(self.settle_periods * self.sample_rate_hz / self.probe.frequency))

    @property
    def n_samples(self) -> int:
        need = self.settle_samples + self.window
        if self.duration_s is None:
            return need
        n = int(round(self.duration_s * self.sample_rate_hz))
        if n < need:
            raise ArgumentError(f"duration gives {n} samples, need at least {need}")
        return n

    def resolve(self, path) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    def substrate_params(self, kind: SubstrateKind) -> SubstrateParams:
        params = load_params(self.resolve(self.params_paths[kind.value]))
        if params.kind is not kind:
            raise ArgumentError(f"{kind.value} parameter file describes a {params.kind.value} substrate")
        seed = self.seeds.get(kind.value)
        return params if seed is None else params.replace(seed=int(seed))

    def embedding(self) -> EmbeddingConfig | None:
        tau, dim = self.analysis.get("tau"), self.analysis.get("dim")
        if tau is None and dim is None:
            return None
        if tau is None or dim is None:
            raise ArgumentError("analysis overrides need both tau and dim")
        return EmbeddingConfig(tau, dim)

    def settings(self) -> AnalysisSettings:
        keys = ("entropy_m", "entropy_r", "perm_m", "perm_tau", "dfa_min_window", "dfa_max_window")
        return AnalysisSettings(**{k: self.analysis[k] for k in keys if k in self.analysis})

    def thresholds(self) -> ParallelThresholds:
        return load_thresholds(None if self.calibration is None else self.resolve(self.calibration))

    def to_dict(self) -> dict:
        def spec(s):
            return {"shape": s.shape.value, "frequency": s.frequency,
                    "amplitude_pp": s.amplitude_pp, "phase": s.phase, "dc_offset": s.dc_offset}
        return {
            "version": MANIFEST_VERSION, "probe": spec(self.probe),
            "stimuli": [spec(s) for s in self.stimuli], "params": dict(self.params_paths),
            "seeds": dict(self.seeds), "analysis": dict(self.analysis),
            "sample_rate_hz": self.sample_rate_hz, "settle_periods": self.settle_periods,
            "window": self.window, "duration_s": self.duration_s,
            "epsilon_rel": self.epsilon_rel, "calibration": self.calibration,
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, data: dict, base_dir=".") -> "RunManifest":
        if data.get("version") != MANIFEST_VERSION:
            raise ParseError(f"unsupported manifest version {data.get('version')!r}")
        known = {"version", "probe", "stimuli", "params", "seeds", "analysis", "sample_rate_hz",
                 "settle_periods", "window", "duration_s", "epsilon_rel", "calibration",
                 "output_dir"}
        unknown = set(data) - known
        if unknown:
            raise ParseError(f"unknown manifest keys: {', '.join(sorted(unknown))}")
        try:
            return cls(
                probe=_spec(data["probe"], "probe"),
                stimuli=tuple(_spec(s, f"stimuli[{i}]") for i, s in enumerate(data["stimuli"])),
                params_paths=dict(data["params"]),
                seeds={k: int(v) for k, v in data.get("seeds", {}).items()},
                analysis=dict(data.get("analysis", {})),
                sample_rate_hz=float(data.get("sample_rate_hz", DEFAULT_SAMPLE_RATE)),
                settle_periods=float(data.get("settle_periods", SETTLE_PERIODS)),
                window=int(data.get("window", WINDOW)),
                duration_s=data.get("duration_s"),
                epsilon_rel=float(data.get("epsilon_rel", DEFAULT_EPSILON)),
                calibration=data.get("calibration"),
                output_dir=str(data.get("output_dir", "run")),
                base_dir=Path(base_dir),
            )
        except KeyError as exc:
            raise ParseError(f"manifest lacks required key {exc}") from None


def load_manifest(path=None) -> RunManifest:
    path = default_manifest_path() if path is None else Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(f"cannot read manifest {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"manifest {path} is not JSON: {exc}") from None
    return RunManifest.from_dict(data, base_dir=path.parent)


def stimulus_seed(base_seed: int, index: int) -> int:
    """Independent noise seed for stimulus ``index`` derived from a base seed."""
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1)[0])


def series_name(kind: SubstrateKind, spec: WaveformSpec) -> str:
    return f"{kind.value}_{spec.label}"


@dataclass
class SeriesResult:
    features: dict = field(default_factory=dict)
    stationarity: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)


def analyze_window(ts: TimeSeries, settle: int, window: int, config=None,
                   settings: AnalysisSettings = AnalysisSettings()):
    """Window, ADF-check and feature-extract one terminal trace."""
    w = ts.window(settle, window)
    report = adf_test(w)
    fv = feature_vector(normalize(w), config, settings, report.to_dict())
    return w, fv


def ensemble_embedding(configs) -> EmbeddingConfig:
    """Rounded mean delay and dimension over per-series selections."""
    configs = list(configs)
    if not configs:
        raise ArgumentError("no per-series embeddings to average")
    tau = int(round(float(np.mean([c.tau for c in configs]))))
    dim = int(round(float(np.mean([c.dim for c in configs]))))
    return EmbeddingConfig(max(1, tau), max(1, dim), ("ensemble",))


def _pairs_for(results, stimuli, terminal_map):
    pairs = {}
    for spec in stimuli:
        for param, (terminal, feature) in terminal_map.items():
            vals = []
            for kind in SUBSTRATES:
                fv = results.get((kind, spec.label, terminal))
                vals.append(None if fv is None else fv.get(feature))
            pairs[(spec.frequency, param)] = tuple(vals)
    return pairs


LEDGER_SOURCES = {
    "perm_entropy": ("out1", "perm_entropy"),
    "katz_fd": ("out1", "katz_fd"),
    "petrosian_fd_out1": ("out1", "petrosian_fd"),
    "petrosian_fd_out2": ("out2", "petrosian_fd"),
    "corr_dim": ("out1", "corr_dim"),
    "mle": ("out1", "mle"),
    "dfa_alpha": ("out1", "dfa_alpha"),
    "sampen": ("out1", "sampen"),
}


def _try(errors: list, where: str, fn):
    try:
        return fn()
    except ConcreteRCError as exc:
        errors.append({"stage": where, "error": type(exc).__name__, "message": str(exc)})
        return None


def _tree(fn, ledger, errors, where):
    if ledger is None:
        return None
    return _try(errors, where, lambda: fn(ledger).value)


def run_pipeline(manifest: RunManifest, output_dir=None) -> dict:
    """Run the full experiment matrix and write every intermediate file.

    Output layout (all names deterministic)::

        series/out1/<substrate>_<stimulus>.csv   analysis windows, OUT1
        series/out2/<substrate>_<stimulus>.csv   analysis windows, OUT2
        features/<substrate>_<stimulus>_<terminal>.json
        ledgers/<shape>.json                      trends across frequencies
        reports/<stimulus>.json                   one report per stimulus
        summary.json

    Errors inside one stimulus are recorded in its report and the run goes on.
    Returns the summary mapping.
    """
    out = Path(os.environ.get(OUTPUT_DIR_ENV) or output_dir or manifest.output_dir)
    config = manifest.embedding()
    mode = manifest.analysis.get("embedding", ENSEMBLE)
    settings = manifest.settings()
    thresholds = manifest.thresholds()
    params = {kind: manifest.substrate_params(kind) for kind in SUBSTRATES}
    n, dt = manifest.n_samples, manifest.dt
    settle, window = manifest.settle_samples, manifest.window
    probe = synthesize(manifest.probe, dt, n)
    shape_spec = {s.label: s for s in manifest.stimuli}

    errors: dict = {s.label: [] for s in manifest.stimuli}
    seeds: dict = {s.label: {} for s in manifest.stimuli}
    windows: dict = {}
    for index, spec in enumerate(manifest.stimuli):
        second = synthesize(spec, dt, n)
        for kind in SUBSTRATES:
            p = params[kind].replace(seed=stimulus_seed(params[kind].seed, index))
            seeds[spec.label][kind.value] = {"base": params[kind].seed, "stimulus": p.seed}
            outs = _try(errors[spec.label], f"simulate:{kind.value}",
                        lambda: simulate(probe, second, p))
            if outs is None:
                continue
            for terminal in TERMINALS:
                w = getattr(outs, terminal).window(settle, window)
                name = series_name(kind, spec)
                csvio.write_csv(w, out / "series" / terminal / f"{name}.csv")
                windows[(kind, spec.label, terminal)] = w

    per_series: dict = {}
    if config is None:
        for key, w in windows.items():
            cfg = _try(errors[key[1]], f"embedding:{key[0].value}:{key[2]}",
                       lambda: select_embedding(normalize(w)))
            if cfg is not None:
                per_series[key] = cfg
        if mode == ENSEMBLE and per_series:
            config = ensemble_embedding(per_series.values())

    features: dict = {}
    for key, w in windows.items():
        kind, label, terminal = key
        cfg = config if config is not None else per_series.get(key)
        if cfg is None:
            continue
        fv = _try(errors[label], f"analyze:{kind.value}:{terminal}",
                  lambda: feature_vector(normalize(w), cfg, settings, adf_test(w).to_dict()))
        if fv is None:
            continue
        data = fv.to_dict()
        write_json(out / "features" / f"{series_name(kind, shape_spec[label])}_{terminal}.json",
                   data)
        features[key] = data

    by_shape: dict = {}
    for spec in manifest.stimuli:
        by_shape.setdefault(spec.shape, []).append(spec)
    ledgers: dict = {}
    for shape, specs in by_shape.items():
        pairs = _pairs_for(features, specs, LEDGER_SOURCES)
        ledger = _try(errors[specs[0].label], "ledger",
                      lambda: build_ledger(pairs, manifest.epsilon_rel))
        ledgers[shape] = ledger
        if ledger is not None:
            write_json(out / "ledgers" / f"{shape.value}.json",
                       {"shape": shape.value,
                        "frequencies_hz": [s.frequency for s in specs], **ledger.to_dict()})

    reports = {}
    for spec in manifest.stimuli:
        errs = errors[spec.label]
        ledger: TrendLedger | None = ledgers.get(spec.shape)
        report = {
            "stimulus": spec.label,
            "shape": spec.shape.value,
            "frequency_hz": spec.frequency,
            "probe_hz": manifest.probe.frequency,
            "seeds": seeds[spec.label],
            "tree_a": _tree(decision_tree_a, ledger, errs, "tree_a"),
            "tree_b": _tree(decision_tree_b, ledger, errs, "tree_b"),
            "parallel": {},
            "doping": {},
            "stationarity": {},
            "ledger": None if ledger is None else ledger.to_dict(),
        }
        for kind in SUBSTRATES:
            fv = features.get((kind, spec.label, "out1"))
            if fv is None:
                continue
            par = _try(errs, f"parallel:{kind.value}", lambda: classify_parallel(fv, thresholds))
            if par is not None:
                report["parallel"][kind.value] = {"label": par[0].value, "confidence": par[1]}
            dop = _try(errs, f"doping:{kind.value}", lambda: classify_doping(fv))
            if dop is not None:
                report["doping"][kind.value] = dop.value
            for terminal in TERMINALS:
                st = features.get((kind, spec.label, terminal), {}).get("stationarity")
                if st is not None:
                    report["stationarity"][f"{kind.value}_{terminal}"] = st["reject_unit_root"]
        report["errors"] = errs
        write_json(out / "reports" / f"{spec.label}.json", report)
        reports[spec.label] = report

    echo = manifest.to_dict()
    echo.pop("output_dir")  # location, not content: keeps trees comparable
    summary = {
        "manifest": echo,
        "labels": {k: {"expected": r["shape"], "tree_a": r["tree_a"], "tree_b": r["tree_b"]}
                   for k, r in reports.items()},
        "substrate_seeds": {k.value: params[k].seed for k in SUBSTRATES},
        "embedding": {
            "mode": "manifest" if manifest.embedding() is not None else mode,
            "tau": None if config is None else config.tau,
            "dim": None if config is None else config.dim,
            "per_series": {f"{k[0].value}_{k[1]}_{k[2]}": [c.tau, c.dim]
                           for k, c in sorted(per_series.items(),
                                              key=lambda kv: (kv[0][0].value, kv[0][1], kv[0][2]))},
        },
    }
    write_json(out / "summary.json", summary)
    return {"output_dir": out, "reports": reports, "features": features,
            "ledgers": ledgers, "summary": summary}


def feature_table(run_dir) -> list:
    """(substrate, stimulus, FeatureVector dict) rows for OUT1 of a finished run."""
    rows = []
    for path in sorted(Path(run_dir, "features").glob("*_out1.json")):
        kind, label, _ = path.stem.split("_")
        rows.append((kind, label, json.loads(path.read_text())))
    if not rows:
        raise ParseError(f"no OUT1 feature files under {run_dir}")
    return rows


def shape_of(label: str) -> Shape:
    for shape in Shape:
        if label.startswith(shape.value):
            return shape
    raise ParseError(f"cannot tell the shape of stimulus {label!r}")
