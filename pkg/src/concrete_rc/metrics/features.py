"""Per-series bundle of every dynamic parameter."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..embedding import EmbeddingConfig, select_embedding
from ..errors import ArgumentError, ConcreteRCError, DegenerateInputError, IncompleteError
from ..signals import TimeSeries, as_array
from .chaos import correlation_dimension, dfa, max_lyapunov
from .entropy import approximate_entropy, permutation_entropy, sample_entropy
from .fractal import katz_fd, petrosian_fd

METRIC_FIELDS = ("mle", "dfa_alpha", "corr_dim", "sampen", "sampen_m_dim", "apen",
                 "perm_entropy", "katz_fd", "petrosian_fd")


@dataclass(frozen=True)
class AnalysisSettings:
    entropy_m: int = 2
    entropy_r: float = 0.2
    perm_m: int = 3
    perm_tau: int = 1
    dfa_min_window: int = 4
    dfa_max_window: int | None = None
    mle_trajectory_len: int = 20


@dataclass
class FeatureVector:
    tau: int
    dim: int
    mle: float | None = None
    mle_per_second: float | None = None
    dfa_alpha: float | None = None
    corr_dim: float | None = None
    sampen: float | None = None
    sampen_m_dim: float | None = None
    apen: float | None = None
    perm_entropy: float | None = None
    katz_fd: float | None = None
    petrosian_fd: float | None = None
    fit_quality: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    stationarity: dict | None = None

    def to_dict(self) -> dict:
        """JSON-ready mapping; metrics that failed are absent (see ``flags``)."""
        out = {"tau": self.tau, "dim": self.dim}
        for name in ("mle", "mle_per_second", *METRIC_FIELDS[1:]):
            v = getattr(self, name)
            if v is not None and math.isfinite(v):
                out[name] = v
        out["fit_quality"] = dict(self.fit_quality)
        out["flags"] = {k: list(v) for k, v in sorted(self.flags.items())}
        if self.stationarity is not None:
            out["stationarity"] = dict(self.stationarity)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureVector":
        known = {f for f in cls.__dataclass_fields__}
        fv = cls(**{k: v for k, v in data.items() if k in known})
        fv.flags = {k: tuple(v) for k, v in fv.flags.items()}
        return fv

    def require(self, *names) -> None:
        missing = [n for n in names if getattr(self, n, None) is None]
        if missing:
            raise IncompleteError(f"feature vector lacks {', '.join(missing)}")


def feature_vector(ts, config: EmbeddingConfig | None = None,
                   settings: AnalysisSettings = AnalysisSettings(),
                   stationarity: dict | None = None) -> FeatureVector:
    """Run every metric on one (normalised) series.

    With ``config=None`` the delay and dimension come from ``select_embedding``.
    A metric that raises is recorded under ``flags`` and skipped; only a
    degenerate (constant) input aborts.
    """
    x = as_array(ts)
    if x.size < 2 or np.ptp(x) == 0:
        raise DegenerateInputError("feature vector of a constant series")
    if x.size < 500:
        raise ArgumentError(f"feature vector needs at least 500 samples, got {x.size}")
    dt = ts.dt if isinstance(ts, TimeSeries) else None

    flags: dict = {}
    if config is None:
        config = select_embedding(x)
    if config.flags:
        flags["embedding"] = tuple(config.flags)
    fv = FeatureVector(tau=config.tau, dim=config.dim, stationarity=stationarity)

    def attempt(name, fn):
        try:
            return fn()
        except ConcreteRCError as exc:
            flags[name] = (type(exc).__name__, str(exc))
            return None

    s = settings
    est = attempt("mle", lambda: max_lyapunov(x, config, s.mle_trajectory_len))
    if est is not None:
        fv.mle = est.value
        fv.fit_quality["mle"] = est.fit_quality
        if dt is not None:
            fv.mle_per_second = est.value / dt
        if est.flags:
            flags["mle"] = est.flags

    est = attempt("dfa_alpha", lambda: dfa(x, s.dfa_min_window, s.dfa_max_window))
    if est is not None:
        fv.dfa_alpha = est.value
        fv.fit_quality["dfa_alpha"] = est.fit_quality

    est = attempt("corr_dim", lambda: correlation_dimension(x, config))
    if est is not None:
        fv.corr_dim = est.value
        fv.fit_quality["corr_dim"] = est.fit_quality
        if est.flags:
            flags["corr_dim"] = est.flags

    for name, m in (("sampen", s.entropy_m), ("sampen_m_dim", config.dim)):
        val = attempt(name, lambda m=m: sample_entropy(x, m, s.entropy_r))
        if val is not None and math.isinf(val):
            flags[name] = ("no_matches_at_m_plus_1",)
            val = None
        setattr(fv, name, val)

    fv.apen = attempt("apen", lambda: approximate_entropy(x, s.entropy_m, s.entropy_r))
    fv.perm_entropy = attempt("perm_entropy",
                              lambda: permutation_entropy(x, s.perm_m, s.perm_tau))
    fv.katz_fd = attempt("katz_fd", lambda: katz_fd(x))
    fv.petrosian_fd = attempt("petrosian_fd", lambda: petrosian_fd(x))
    fv.flags = flags
    return fv
