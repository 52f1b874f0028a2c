"""Lumped-element stand-in for the two-input, two-output concrete block.

The block is a 3x3 grid of electrodes. Neighbouring electrodes are joined by
a branch: a resistor in parallel with a capacitor and, for the doped
material, a memristor with conductance ``g_min + w*(g_max - g_min)`` whose
state follows ``dw/dt = mobility * i * w * (1 - w)``. The two drives enter
through a source resistance, one electrode is ground, and each output
electrode is read through a first-order stage (low-pass for undoped concrete,
capacitive high-pass for doped). Terminal noise is added at the output
electrode, ahead of the readout stage.

Nodes are numbered row-major, ``node = 3*row + col``.
"""
from __future__ import annotations

import configparser
import dataclasses
import enum
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .errors import ArgumentError, ConfigurationError, ParseError
from .signals import TimeSeries

GRID = 3
PARAMS_VERSION = 1
STABILITY_FACTOR = 0.1


class SubstrateKind(str, enum.Enum):
    UNDOPED = "undoped"
    DOPED = "doped"

    def __str__(self) -> str:
        return self.value


class OutputStage(str, enum.Enum):
    NONE = "none"
    LOWPASS = "lowpass"
    HIGHPASS = "highpass"


def grid_branches(n: int = GRID) -> tuple:
    """Nearest-neighbour electrode pairs, horizontal ones first."""
    h = [(r * n + c, r * n + c + 1) for r in range(n) for c in range(n - 1)]
    v = [(r * n + c, (r + 1) * n + c) for r in range(n - 1) for c in range(n)]
    return tuple(h + v)


BRANCHES = grid_branches()


@dataclass(frozen=True)
class SubstrateParams:
    kind: SubstrateKind
    seed: int
    in1: int = 0
    in2: int = 5
    out1: int = 2
    out2: int = 3
    gnd: int = 1
    branch_resistance: float = 1e5
    branch_capacitance: float = 2.2e-7
    source_resistance: float = 1e3
    load_resistance: float = 1e6
    mem_branches: tuple = ()
    mem_g_min: float = 0.0
    mem_g_max: float = 0.0
    mem_mobility: float = 0.0
    mem_w0: float = 0.5
    output_stage: OutputStage = OutputStage.NONE
    output_corner_hz: float = 0.0
    noise_sigma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", SubstrateKind(self.kind))
        object.__setattr__(self, "output_stage", OutputStage(self.output_stage))
        object.__setattr__(self, "mem_branches", tuple(int(b) for b in self.mem_branches))
        roles = (self.in1, self.in2, self.out1, self.out2, self.gnd)
        if len(set(roles)) != 5 or not all(0 <= r < GRID * GRID for r in roles):
            raise ConfigurationError(f"terminal roles must be 5 distinct nodes in 0..8, got {roles}")
        for name in ("branch_resistance", "branch_capacitance", "source_resistance",
                     "load_resistance"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be > 0")
        if self.noise_sigma < 0:
            raise ConfigurationError("noise_sigma must be >= 0")
        if any(not 0 <= b < len(BRANCHES) for b in self.mem_branches):
            raise ConfigurationError(f"memristive branch index outside 0..{len(BRANCHES) - 1}")
        if len(set(self.mem_branches)) != len(self.mem_branches):
            raise ConfigurationError("duplicate memristive branch")
        if self.kind is SubstrateKind.DOPED and not self.mem_g_min < self.mem_g_max:
            raise ConfigurationError("doped substrate needs mem_g_min < mem_g_max")
        if self.mem_branches and (self.mem_g_min < 0 or self.mem_mobility < 0):
            raise ConfigurationError("memristor constants must be non-negative")
        if not 0.0 <= self.mem_w0 <= 1.0:
            raise ConfigurationError("mem_w0 must lie in [0, 1]")
        if self.output_stage is not OutputStage.NONE and not self.output_corner_hz > 0:
            raise ConfigurationError("output stage needs output_corner_hz > 0")

    def replace(self, **changes) -> "SubstrateParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True, eq=False)
class TerminalOutputs:
    out1: TimeSeries
    out2: TimeSeries
    states: np.ndarray | None = None  # memristor w per step, shape (n, branches)


# -- parameter files ---------------------------------------------------------

_INT_KEYS = {"seed", "in1", "in2", "out1", "out2", "gnd", "version"}
_STR_KEYS = {"kind", "output_stage"}


def _parse_branches(text: str) -> tuple:
    text = text.strip()
    if text in ("", "none"):
        return ()
    if text == "all":
        return tuple(range(len(BRANCHES)))
    return tuple(int(t) for t in text.split(","))


def load_params(path) -> SubstrateParams:
    """Read a flat ``key = value`` parameter file (SI units, ``#`` comments).

    ``seed`` is mandatory.
    """
    path = Path(path)
    return parse_params(path.read_text(), str(path))


def parse_params(text: str, source: str = "<string>") -> SubstrateParams:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        cp.read_string("[substrate]\n" + text, source=source)
    except configparser.Error as exc:
        raise ParseError(f"{source}: {exc}") from None
    raw = dict(cp["substrate"])
    if "seed" not in raw:
        raise ConfigurationError(f"{source}: 'seed' is required")
    version = int(raw.pop("version", PARAMS_VERSION))
    if version != PARAMS_VERSION:
        raise ConfigurationError(f"{source}: unsupported parameter file version {version}")
    fields = {f.name for f in dataclasses.fields(SubstrateParams)}
    kwargs = {}
    for key, val in raw.items():
        if key not in fields:
            raise ConfigurationError(f"{source}: unknown key {key!r}")
        try:
            if key == "mem_branches":
                kwargs[key] = _parse_branches(val)
            elif key in _INT_KEYS:
                kwargs[key] = int(val)
            elif key in _STR_KEYS:
                kwargs[key] = val.strip().lower()
            else:
                kwargs[key] = float(val)
        except ValueError:
            raise ParseError(f"{source}: bad value for {key}: {val!r}") from None
    try:
        return SubstrateParams(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{source}: {exc}") from None


def dump_params(params: SubstrateParams) -> str:
    lines = [f"version = {PARAMS_VERSION}"]
    for f in dataclasses.fields(params):
        v = getattr(params, f.name)
        if isinstance(v, enum.Enum):
            v = v.value
        elif isinstance(v, tuple):
            v = ",".join(str(b) for b in v) or "none"
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def default_params_path(kind) -> Path:
    kind = SubstrateKind(kind)
    return Path(str(resources.files("concrete_rc") / "data" / f"substrate_{kind.value}.cfg"))


def default_params(kind) -> SubstrateParams:
    """Shipped calibrated parameter set for ``kind``."""
    return load_params(default_params_path(kind))


# -- network -----------------------------------------------------------------

class _Network:
    def __init__(self, params: SubstrateParams):
        p = params
        n_nodes = GRID * GRID
        self.free = np.array([k for k in range(n_nodes) if k != p.gnd])
        col = {node: i for i, node in enumerate(self.free)}
        # incidence over free nodes; ground column dropped
        inc = np.zeros((len(BRANCHES), self.free.size))
        for b, (u, v) in enumerate(BRANCHES):
            if u in col:
                inc[b, col[u]] = 1.0
            if v in col:
                inc[b, col[v]] = -1.0
        self.inc = inc
        g_fixed = np.full(len(BRANCHES), 1.0 / p.branch_resistance)
        lap_c = p.branch_capacitance * inc.T @ inc
        self.c_inv = np.linalg.inv(lap_c)
        self.g_static = inc.T @ (g_fixed[:, None] * inc)
        self.i_in1, self.i_in2 = col[p.in1], col[p.in2]
        self.i_out1, self.i_out2 = col[p.out1], col[p.out2]
        for k in (self.i_in1, self.i_in2):
            self.g_static[k, k] += 1.0 / p.source_resistance
        for k in (self.i_out1, self.i_out2):
            self.g_static[k, k] += 1.0 / p.load_resistance
        self.g_src = 1.0 / p.source_resistance
        self.mem = np.array(p.mem_branches, dtype=int)
        self.mem_inc = inc[self.mem] if self.mem.size else np.zeros((0, self.free.size))
        self.g_min, self.g_span = p.mem_g_min, p.mem_g_max - p.mem_g_min
        self.mobility = p.mem_mobility

    def min_time_constant(self) -> float:
        """Fastest mode of the network with every memristor fully on."""
        g = self.g_static.copy()
        if self.mem.size:
            g_on = self.g_min + self.g_span
            g += g_on * self.mem_inc.T @ self.mem_inc
        rates = np.linalg.eigvals(self.c_inv @ g).real
        return 1.0 / float(np.max(rates))

    def rhs(self, v, w, src1, src2):
        i_node = -(self.g_static @ v)
        i_node[self.i_in1] += self.g_src * src1
        i_node[self.i_in2] += self.g_src * src2
        if self.mem.size:
            drop = self.mem_inc @ v
            i_mem = (self.g_min + self.g_span * w) * drop
            i_node -= self.mem_inc.T @ i_mem
            dw = self.mobility * i_mem * w * (1.0 - w)
        else:
            dw = w
        return self.c_inv @ i_node, dw


def _readout(v: np.ndarray, stage: OutputStage, corner_hz: float, dt: float) -> np.ndarray:
    """First-order readout stage, discretised exactly for a held input."""
    if stage is OutputStage.NONE:
        return v
    a = np.exp(-2 * np.pi * corner_hz * dt)
    if stage is OutputStage.LOWPASS:
        return lfilter([1.0 - a], [1.0, -a], v)
    return lfilter([a, -a], [1.0, -a], v)


def check_step(params: SubstrateParams, dt: float) -> float:
    """Raise ConfigurationError unless dt <= 0.1 * fastest network time constant."""
    tau_min = _Network(params).min_time_constant()
    if dt > STABILITY_FACTOR * tau_min:
        raise ConfigurationError(
            f"dt={dt:.3g}s exceeds {STABILITY_FACTOR} x fastest time constant {tau_min:.3g}s"
        )
    return tau_min


def simulate(in1: TimeSeries, in2: TimeSeries, params: SubstrateParams,
             record_states: bool = False) -> TerminalOutputs:
    """Integrate the network with fixed-step RK4 at the input sample interval.

    Inputs are held constant across each step. The memristor states are
    clipped to [0, 1] after every step. Noise is drawn from ``params.seed``.
    """
    if len(in1) != len(in2):
        raise ArgumentError(f"input length mismatch: {len(in1)} vs {len(in2)}")
    if not np.isclose(in1.dt, in2.dt, rtol=1e-12, atol=0):
        raise ArgumentError(f"input dt mismatch: {in1.dt} vs {in2.dt}")
    dt = in1.dt
    check_step(params, dt)
    net = _Network(params)
    n = len(in1)
    s1, s2 = in1.samples, in2.samples

    v = np.zeros(net.free.size)
    w = np.full(net.mem.size, params.mem_w0)
    o1 = np.empty(n)
    o2 = np.empty(n)
    states = np.empty((n, net.mem.size)) if record_states else None
    h = dt
    for k in range(n):
        o1[k] = v[net.i_out1]
        o2[k] = v[net.i_out2]
        if states is not None:
            states[k] = w
        a, b = s1[k], s2[k]
        k1v, k1w = net.rhs(v, w, a, b)
        k2v, k2w = net.rhs(v + 0.5 * h * k1v, w + 0.5 * h * k1w, a, b)
        k3v, k3w = net.rhs(v + 0.5 * h * k2v, w + 0.5 * h * k2w, a, b)
        k4v, k4w = net.rhs(v + h * k3v, w + h * k3w, a, b)
        v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        if net.mem.size:
            w = np.clip(w + (h / 6.0) * (k1w + 2 * k2w + 2 * k3w + k4w), 0.0, 1.0)

    rng = np.random.default_rng(params.seed)
    if params.noise_sigma > 0:
        o1 = o1 + rng.normal(0.0, params.noise_sigma, n)
        o2 = o2 + rng.normal(0.0, params.noise_sigma, n)
    o1 = _readout(o1, params.output_stage, params.output_corner_hz, dt)
    o2 = _readout(o2, params.output_stage, params.output_corner_hz, dt)

    meta = {"substrate": params.kind.value, "seed": params.seed}
    return TerminalOutputs(
        TimeSeries(o1, dt, {**meta, "terminal": "out1"}),
        TimeSeries(o2, dt, {**meta, "terminal": "out2"}),
        states,
    )
