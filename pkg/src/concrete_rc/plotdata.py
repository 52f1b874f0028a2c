"""Plain CSV matrices from which the usual figures can be redrawn."""
from __future__ import annotations

from pathlib import Path

from . import csvio
from .embedding import (EmbeddingConfig, cao_afn, delay_matrix, delayed_mutual_information,
                        false_nearest_neighbors, select_embedding)
from .errors import ArgumentError
from .prep import normalize

PLOT_KINDS = ("Trajectory3D", "ReturnPlot", "DmiCurve", "FnnCurve", "ParallelCoords")


def _series(inputs):
    ts = inputs.get("series")
    if ts is None:
        raise ArgumentError("this plot kind needs a 'series' input")
    if isinstance(ts, (str, Path)):
        ts = csvio.ingest_csv(ts)
    return normalize(ts) if inputs.get("normalize", True) else ts


def trajectory_rows(inputs):
    """Delay vectors truncated to their first three coordinates."""
    ts = _series(inputs)
    if "tau" in inputs and "dim" in inputs:
        cfg = EmbeddingConfig(inputs["tau"], inputs["dim"])
    else:
        cfg = select_embedding(ts)
    cfg.check(len(ts))
    pts = delay_matrix(ts.samples, cfg.tau, cfg.dim)[:, :3]
    header = [f"x{j}" for j in range(pts.shape[1])]
    return header, pts.tolist()


def return_rows(inputs):
    """Pairs (x[t], x[t - tau]) for t = tau .. N-1."""
    ts = _series(inputs)
    tau = int(inputs.get("tau", 0))
    if tau < 1 or tau >= len(ts):
        raise ArgumentError("ReturnPlot needs 1 <= tau < series length")
    x = ts.samples
    return ["x_t", "x_t_minus_tau"], list(zip(x[tau:], x[:-tau]))


def dmi_rows(inputs):
    ts = _series(inputs)
    max_tau = int(inputs.get("max_tau", min(50, len(ts) // 10)))
    return ["tau", "mi_nats"], delayed_mutual_information(ts, max_tau)


def fnn_rows(inputs):
    ts = _series(inputs)
    tau = int(inputs["tau"]) if "tau" in inputs else select_embedding(ts).tau
    max_dim = int(inputs.get("max_dim", 8))
    fnn = false_nearest_neighbors(ts, tau, max_dim)
    cao = {row.dim: row for row in cao_afn(ts, tau, max_dim)}
    rows = [(r.dim, r.ratio, r.size, r.combined, cao[r.dim].e1, cao[r.dim].e2) for r in fnn]
    return ["dim", "fnn_ratio", "fnn_size", "fnn_combined", "cao_e1", "cao_e2"], rows


def parallel_rows(inputs):
    """One row per OUT1 series of a pipeline run: alpha, S_s, D_P, S_p, label."""
    from .pipeline import feature_table
    run_dir = inputs.get("run_dir")
    if run_dir is None:
        raise ArgumentError("ParallelCoords needs a 'run_dir' input")
    rows = []
    for kind, label, fv in feature_table(run_dir):
        rows.append([fv.get("dfa_alpha", float("nan")), fv.get("sampen", float("nan")),
                     fv.get("petrosian_fd", float("nan")), fv.get("perm_entropy", float("nan")),
                     f"{kind}:{label}"])
    return ["dfa_alpha", "sampen", "petrosian_fd", "perm_entropy", "label"], rows


_BUILDERS = {
    "Trajectory3D": trajectory_rows,
    "ReturnPlot": return_rows,
    "DmiCurve": dmi_rows,
    "FnnCurve": fnn_rows,
    "ParallelCoords": parallel_rows,
}


def plotdata(kind: str, inputs: dict, path) -> Path:
    """Write the CSV matrix for ``kind`` to ``path`` and return the path."""
    try:
        builder = _BUILDERS[kind]
    except KeyError:
        raise ArgumentError(f"unknown plot kind {kind!r}; choose from {', '.join(PLOT_KINDS)}") from None
    header, rows = builder(inputs)
    return csvio.write_matrix(path, header, rows)
