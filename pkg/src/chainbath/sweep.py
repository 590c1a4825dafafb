"""Configuration handling, (r, T) sweeps, time series, distance scans and file output.

A run diagonalizes the coupled model and the bare chain once, then
evaluates every grid cell from shared per-time tables: the reduced
system covariance at time t is a closed-form combination of
exp(-2r)/2, exp(+2r)/2 and the thermal bath weights, so sweeping r
costs nothing and sweeping T costs one weighted contraction.

Outputs are deterministic: identical configurations produce
byte-identical CSV/JSON files regardless of the worker count.
"""

from __future__ import annotations

import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .entanglement import (
    EntanglementTrace,
    PhaseLabel,
    classify_phase,
    log_negativity_series,
)
from .errors import ValidationError
from .gaussian import NormalModes, diagonalize, thermal_mode_variances
from .model import (
    DerivedQuantities,
    EdgePair,
    ModelParams,
    SymmetricPair,
    build_bath,
    build_coupled,
    derived_quantities,
    separation,
)
from .spectral import tune_epsilon

_SQRT2 = math.sqrt(2.0)

# (X+, P+, X-, P-) <- (X1, P1, X2, P2)
_PM_ROTATION = np.array(
    [[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, -1, 0], [0, 1, 0, -1]], dtype=float
) / _SQRT2

# symmetric 4x4 from the 10 unique entries
_IDX10 = np.array(
    [[0, 1, 2, 3], [1, 4, 5, 6], [2, 5, 7, 8], [3, 6, 8, 9]], dtype=np.intp
)

DEFAULT_R_GRID = tuple(np.linspace(-2.0, 2.0, 17).tolist())
DEFAULT_T_GRID = tuple(np.linspace(0.0, 2.0, 9).tolist())

PROFILE_N = {
    "desk": {"edge_pair": 150, "single_edge": 150, "symmetric_pair": 200},
    "paper": {"edge_pair": 1250, "single_edge": 1250, "symmetric_pair": 750},
}


@dataclass(frozen=True)
class SweepConfig:
    """Model, grids and analysis window for a sweep run.

    window holds fractions of the revival time; tol is the sign
    threshold separating SD/SDR/NSD.
    """

    model: ModelParams = field(default_factory=ModelParams)
    r_grid: tuple = DEFAULT_R_GRID
    T_grid: tuple = DEFAULT_T_GRID
    window: tuple = (0.6, 0.95)
    samples_per_period: int = 40
    tol: float = 1e-8
    output_dir: str = "out"

    def __post_init__(self):
        for name in ("r_grid", "T_grid"):
            grid = tuple(float(x) for x in getattr(self, name))
            if not grid:
                raise ValidationError(f"SweepConfig.{name} must be non-empty")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ValidationError(f"SweepConfig.{name} must be strictly increasing")
            object.__setattr__(self, name, grid)
        if min(self.T_grid) < 0:
            raise ValidationError("SweepConfig.T_grid entries must be >= 0")
        lo, hi = (float(x) for x in self.window)
        if not 0.0 < lo < hi < 1.0:
            raise ValidationError("SweepConfig.window must satisfy 0 < t_a < t_b < 1")
        object.__setattr__(self, "window", (lo, hi))
        if self.samples_per_period < 40:
            raise ValidationError("SweepConfig.samples_per_period must be >= 40")
        if self.tol < 0:
            raise ValidationError("SweepConfig.tol must be >= 0")

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "r_grid": list(self.r_grid),
            "T_grid": list(self.T_grid),
            "window": list(self.window),
            "samples_per_period": self.samples_per_period,
            "tol": self.tol,
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        if not isinstance(data, dict):
            raise ValidationError("config: expected a JSON object")
        known = {
            "model", "r_grid", "T_grid", "window", "samples_per_period", "tol",
            "output_dir",
        }
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"config: unknown field(s) {sorted(unknown)}")
        kwargs = {}
        if "model" in data:
            kwargs["model"] = ModelParams.from_dict(data["model"])
        for name in ("r_grid", "T_grid", "window"):
            if name in data:
                kwargs[name] = tuple(data[name])
        if "samples_per_period" in data:
            kwargs["samples_per_period"] = int(data["samples_per_period"])
        if "tol" in data:
            kwargs["tol"] = float(data["tol"])
        if "output_dir" in data:
            kwargs["output_dir"] = str(data["output_dir"])
        return cls(**kwargs)


PRESETS = {
    # canonical Ohmic configuration: both oscillators on the chain edge
    "ohmic-edge": lambda: SweepConfig(model=ModelParams(N=1250, attachment=EdgePair())),
    # oscillators nine spacings apart, detuned onto the first zero of the
    # relative-motion spectral density
    "distant-9a": lambda: SweepConfig(
        model=ModelParams(N=750, epsilon=-0.086, attachment=SymmetricPair(s=5))
    ),
}


def preset_config(name: str) -> SweepConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValidationError(
            f"unknown preset {name!r}; available: {sorted(PRESETS)}"
        ) from None


def apply_profile(config: SweepConfig, profile: str) -> SweepConfig:
    """Rescale the chain to desk or paper size for the attachment type."""
    if profile not in PROFILE_N:
        raise ValidationError(f"unknown profile {profile!r}; expected desk or paper")
    tag = {EdgePair: "edge_pair", SymmetricPair: "symmetric_pair"}.get(
        type(config.model.attachment), "single_edge"
    )
    n_new = PROFILE_N[profile][tag]
    model = config.model.with_updates(N=n_new)
    if isinstance(model.attachment, SymmetricPair) and model.attachment.s > n_new:
        raise ValidationError("profile: attachment site exceeds the rescaled chain")
    return replace(config, model=model)


def parse_config(source) -> SweepConfig:
    """Read a SweepConfig from a JSON document (path or file object)."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config: malformed JSON ({exc})") from None
    return SweepConfig.from_dict(data)


# ---------------------------------------------------------------------------
# shared per-run state


@dataclass(frozen=True)
class RunContext:
    """Diagonalized models and the overlap tables shared by all grid cells."""

    params: ModelParams
    derived: DerivedQuantities
    coupled_modes: NormalModes
    bath_modes: NormalModes
    o1: np.ndarray
    o2: np.ndarray
    overlap: np.ndarray        # (n, 2N) coupled-mode x bath-mode
    bath_q2: np.ndarray        # per bath mode: sum_k w_k^2 overlap^2
    bath_p2: np.ndarray
    sys_w2: float              # sum_k w_k^2 (o1^2 + o2^2)
    sys_norm: float


def prepare_run(params: ModelParams) -> RunContext:
    """One diagonalization of the coupled model and one of the bare chain."""
    if params.n_system != 2:
        raise ValidationError("sweeps require two system oscillators")
    modes = diagonalize(build_coupled(params))
    bath_modes = diagonalize(build_bath(params))
    sys_idx = modes.system_indices()
    chain_idx = np.asarray(modes.chain_indices())
    o1 = modes.modes[sys_idx[0], :].copy()
    o2 = modes.modes[sys_idx[1], :].copy()
    overlap = modes.modes[chain_idx, :].T @ bath_modes.modes
    w2 = modes.frequencies**2
    return RunContext(
        params=params,
        derived=derived_quantities(params),
        coupled_modes=modes,
        bath_modes=bath_modes,
        o1=o1,
        o2=o2,
        overlap=overlap,
        bath_q2=w2 @ overlap**2,
        bath_p2=np.sum(overlap**2, axis=0),
        sys_w2=float(w2 @ (o1**2 + o2**2)),
        sys_norm=float(np.sum(o1**2 + o2**2)),
    )


def time_grid(config: SweepConfig, derived) -> np.ndarray:
    """Uniform samples over the window, at the configured density."""
    t_a = config.window[0] * derived.t_rev
    t_b = config.window[1] * derived.t_rev
    period = math.pi / derived.Omega_gamma
    n = int(math.ceil(config.samples_per_period * (t_b - t_a) / period)) + 1
    return np.linspace(t_a, t_b, n)


@dataclass(frozen=True)
class WindowTables:
    """Per-time tables from which every (r, T) cell is assembled."""

    times: np.ndarray
    T_grid: tuple
    Gx: np.ndarray    # (nt, 10), multiplies exp(-2r)/2
    Gp: np.ndarray    # (nt, 10), multiplies exp(+2r)/2
    bath: np.ndarray  # (nt, nT, 10)


def _pair_products(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """(A @ B)[s, u] for stacks of symmetric 2x2 given as (.., 3) entries."""
    out = np.empty(A.shape[:-1] + (4,))
    out[..., 0] = A[..., 0] * B[..., 0] + A[..., 1] * B[..., 1]
    out[..., 1] = A[..., 0] * B[..., 1] + A[..., 1] * B[..., 2]
    out[..., 2] = A[..., 1] * B[..., 0] + A[..., 2] * B[..., 1]
    out[..., 3] = A[..., 1] * B[..., 1] + A[..., 2] * B[..., 2]
    return out


def _system_tables(mc: np.ndarray, ms: np.ndarray, md: np.ndarray):
    def assemble(xx, xp, pp):
        out = np.empty(xx.shape[:-1] + (10,))
        out[..., 0] = xx[..., 0]
        out[..., 1] = xp[..., 0]
        out[..., 2] = xx[..., 1]
        out[..., 3] = xp[..., 1]
        out[..., 4] = pp[..., 0]
        out[..., 5] = xp[..., 2]
        out[..., 6] = pp[..., 1]
        out[..., 7] = xx[..., 3]
        out[..., 8] = xp[..., 3]
        out[..., 9] = pp[..., 3]
        return out

    gx = assemble(_pair_products(mc, mc), _pair_products(mc, md), _pair_products(md, md))
    gp = assemble(_pair_products(ms, ms), _pair_products(ms, mc), _pair_products(mc, mc))
    return gx, gp


def thermal_weight_table(bath_modes: NormalModes, T_grid: Sequence[float]):
    """Position/momentum thermal weights, shape (2N, nT)."""
    freqs = bath_modes.frequencies
    wq = np.empty((freqs.size, len(T_grid)))
    wp = np.empty_like(wq)
    for j, T in enumerate(T_grid):
        wq[:, j], wp[:, j] = thermal_mode_variances(freqs, float(T))
    return wq, wp


def compute_window_tables(
    ctx: RunContext, times: np.ndarray, T_grid: Sequence[float], num_threads: int = 1
) -> WindowTables:
    wq, wp = thermal_weight_table(ctx.bath_modes, T_grid)
    mc, ms, md, bath = kernels.window_tables(
        ctx.coupled_modes.frequencies, ctx.o1, ctx.o2, ctx.overlap, times, wq, wp,
        num_threads,
    )
    gx, gp = _system_tables(mc, ms, md)
    return WindowTables(times=times, T_grid=tuple(T_grid), Gx=gx, Gp=gp, bath=bath)


def cell_entries(tables: WindowTables, r: float, t_index: int) -> np.ndarray:
    """Ten unique covariance entries per sample time for one (r, T) cell."""
    gx = 0.5 * math.exp(-2.0 * r)
    gp = 0.5 * math.exp(2.0 * r)
    return gx * tables.Gx + gp * tables.Gp + tables.bath[:, t_index, :]


def entries_to_matrices(entries: np.ndarray) -> np.ndarray:
    """Expand (.., 10) unique entries into symmetric (.., 4, 4) matrices."""
    return entries[..., _IDX10]


def mean_total_energy(ctx: RunContext, r: float, T: float) -> float:
    """<H> of the full model; conserved exactly by the propagator."""
    gx = 0.5 * math.exp(-2.0 * r)
    gp = 0.5 * math.exp(2.0 * r)
    wq, wp = thermal_mode_variances(ctx.bath_modes.frequencies, T)
    return 0.5 * (
        gx * ctx.sys_w2
        + gp * ctx.sys_norm
        + float(wq @ ctx.bath_q2)
        + float(wp @ ctx.bath_p2)
    )


# ---------------------------------------------------------------------------
# run results


@dataclass(frozen=True)
class TimeSeriesResult:
    trace: EntanglementTrace
    label: PhaseLabel
    columns: dict
    header: tuple
    metadata: dict


@dataclass(frozen=True)
class PhaseDiagram:
    """Window statistics of eN over the (r, T) grid.

    e_n holds the window mean of max(0, eN) with r along rows and T
    along columns; labels holds the SD/SDR/NSD classification.
    """

    r_grid: tuple
    T_grid: tuple
    e_n: np.ndarray
    labels: np.ndarray
    eN_min: np.ndarray
    eN_max: np.ndarray
    metadata: dict

    def __post_init__(self):
        shape = (len(self.r_grid), len(self.T_grid))
        for name in ("e_n", "labels", "eN_min", "eN_max"):
            if getattr(self, name).shape != shape:
                raise ValidationError(f"PhaseDiagram.{name} shape does not match grids")


@dataclass(frozen=True)
class DistanceScanResult:
    rows: tuple          # (s, d, epsilon, mean_E_N, label) per distance
    skipped: tuple       # s values without a real detuning solution
    fit: Optional[dict]  # linear fit of mean_E_N against d
    metadata: dict


def _config_metadata(config: SweepConfig) -> dict:
    # output location excluded: metadata describes the physics run only
    out = config.to_dict()
    del out["output_dir"]
    return out


def _base_metadata(config: SweepConfig, ctx: RunContext) -> dict:
    from . import __version__

    meta = {
        "config": _config_metadata(config),
        "derived": ctx.derived.to_dict(),
        "kernel_backend": kernels.BACKEND,
        "version": __version__,
    }
    d = separation(ctx.params)
    if d is not None:
        meta["separation_d"] = d
    return meta


def _evaluate_cell(tables: WindowTables, r: float, t_index: int, tol: float):
    entries = cell_entries(tables, r, t_index)
    e_series = log_negativity_series(entries_to_matrices(entries))
    trace = EntanglementTrace.from_samples(tables.times, e_series)
    return trace, classify_phase(trace, tol)


def run_time_series(config: SweepConfig, num_threads: int = 1) -> TimeSeriesResult:
    """Evolve a single (r, T) cell and emit the covariance time series.

    Writes timeseries.csv with columns t, eN, the widths of the
    centre-of-mass and relative quadratures, the symmetrized
    position-momentum covariance of the relative motion and the
    (constant) total mean energy.
    """
    if len(config.r_grid) != 1 or len(config.T_grid) != 1:
        raise ValidationError("run_time_series requires exactly one r and one T value")
    r, T = config.r_grid[0], config.T_grid[0]
    ctx = prepare_run(config.model)
    times = time_grid(config, ctx.derived)
    tables = compute_window_tables(ctx, times, config.T_grid, num_threads)
    entries = cell_entries(tables, r, 0)
    V = entries_to_matrices(entries)
    e_series = log_negativity_series(V)
    Vpm = np.einsum("ab,tbc,dc->tad", _PM_ROTATION, V, _PM_ROTATION)
    energy = mean_total_energy(ctx, r, T)

    trace = EntanglementTrace.from_samples(times, e_series)
    label = classify_phase(trace, config.tol)
    header = (
        "t", "eN", "var_x_plus", "var_p_plus", "var_x_minus", "var_p_minus",
        "cov_xp_minus", "mean_energy",
    )
    columns = {
        "t": times,
        "eN": e_series,
        "var_x_plus": Vpm[:, 0, 0],
        "var_p_plus": Vpm[:, 1, 1],
        "var_x_minus": Vpm[:, 2, 2],
        "var_p_minus": Vpm[:, 3, 3],
        "cov_xp_minus": Vpm[:, 2, 3],
        "mean_energy": np.full(times.size, energy),
    }
    metadata = _base_metadata(config, ctx)
    metadata["classification"] = label.value
    metadata["eN_min"] = trace.eN_min
    metadata["eN_max"] = trace.eN_max
    metadata["mean_E_N"] = trace.mean_clamped()

    result = TimeSeriesResult(
        trace=trace, label=label, columns=columns, header=header, metadata=metadata
    )
    _write_csv(
        os.path.join(config.output_dir, "timeseries.csv"),
        header,
        np.column_stack([columns[h] for h in header]),
    )
    _write_json(os.path.join(config.output_dir, "metadata.json"), metadata)
    return result


def run_phase_diagram(config: SweepConfig, num_threads: int = 1) -> PhaseDiagram:
    """Classify every (r, T) cell; one diagonalization per model, reused."""
    ctx = prepare_run(config.model)
    times = time_grid(config, ctx.derived)
    tables = compute_window_tables(ctx, times, config.T_grid, num_threads)

    n_r, n_t = len(config.r_grid), len(config.T_grid)
    e_n = np.empty((n_r, n_t))
    e_min = np.empty((n_r, n_t))
    e_max = np.empty((n_r, n_t))
    labels = np.empty((n_r, n_t), dtype=object)

    def work(cell):
        i, j = cell
        trace, label = _evaluate_cell(tables, config.r_grid[i], j, config.tol)
        return i, j, trace, label

    cells = [(i, j) for i in range(n_r) for j in range(n_t)]
    if num_threads > 1:
        with ThreadPoolExecutor(max_workers=num_threads) as pool:
            results = list(pool.map(work, cells))
    else:
        results = [work(c) for c in cells]
    for i, j, trace, label in results:
        e_n[i, j] = trace.mean_clamped()
        e_min[i, j] = trace.eN_min
        e_max[i, j] = trace.eN_max
        labels[i, j] = label.value

    metadata = _base_metadata(config, ctx)
    diagram = PhaseDiagram(
        r_grid=config.r_grid,
        T_grid=config.T_grid,
        e_n=e_n,
        labels=labels,
        eN_min=e_min,
        eN_max=e_max,
        metadata=metadata,
    )
    _write_grid_csv(os.path.join(config.output_dir, "e_n.csv"), diagram, diagram.e_n, _fmt)
    _write_grid_csv(
        os.path.join(config.output_dir, "labels.csv"), diagram, diagram.labels, str
    )
    _write_json(os.path.join(config.output_dir, "metadata.json"), metadata)
    return diagram


def run_distance_scan(
    config: SweepConfig, s_values: Sequence[int], num_threads: int = 1
) -> DistanceScanResult:
    """Window-mean E_N against attachment separation, re-detuned per distance.

    For every site index s the model is rebuilt with SymmetricPair(s)
    and epsilon tuned onto the first zero of the relative-motion
    spectral density; distances without a real solution are skipped.
    """
    if len(config.r_grid) != 1 or len(config.T_grid) != 1:
        raise ValidationError("run_distance_scan requires exactly one r and one T value")
    if not s_values:
        raise ValidationError("run_distance_scan: no attachment sites given")
    r = config.r_grid[0]
    rows = []
    skipped = []
    for s in s_values:
        params = config.model.with_updates(attachment=SymmetricPair(s=int(s)))
        try:
            eps = tune_epsilon(params, "minus", k=1)
        except ValidationError:
            skipped.append(int(s))
            continue
        params = params.with_updates(epsilon=eps)
        cell = replace(config, model=params)
        ctx = prepare_run(params)
        times = time_grid(cell, ctx.derived)
        tables = compute_window_tables(ctx, times, cell.T_grid, num_threads)
        trace, label = _evaluate_cell(tables, r, 0, config.tol)
        rows.append((int(s), separation(params), eps, trace.mean_clamped(), label.value))

    fit = None
    if len(rows) >= 2:
        d_vals = np.array([row[1] for row in rows])
        e_vals = np.array([row[3] for row in rows])
        coeffs = np.polyfit(d_vals, e_vals, 1)
        resid = e_vals - np.polyval(coeffs, d_vals)
        fit = {
            "slope": float(coeffs[0]),
            "intercept": float(coeffs[1]),
            "rms_residual": float(np.sqrt(np.mean(resid**2))),
        }

    metadata = {
        "config": _config_metadata(config),
        "kernel_backend": kernels.BACKEND,
        "skipped": skipped,
        "fit": fit,
    }
    result = DistanceScanResult(
        rows=tuple(rows), skipped=tuple(skipped), fit=fit, metadata=metadata
    )
    _write_csv(
        os.path.join(config.output_dir, "distance_scan.csv"),
        ("s", "d", "epsilon", "mean_E_N", "label"),
        [(row[0], _fmt(row[1]), _fmt(row[2]), _fmt(row[3]), row[4]) for row in rows],
        raw=True,
    )
    _write_json(os.path.join(config.output_dir, "metadata.json"), metadata)
    return result


# ---------------------------------------------------------------------------
# writers


def _fmt(x) -> str:
    return repr(float(x))


def _ensure_dir(path: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def _write_text(path: str, text: str):
    _ensure_dir(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _write_csv(path: str, header, rows, raw: bool = False):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        if raw:
            buf.write(",".join(str(x) for x in row) + "\n")
        else:
            buf.write(",".join(_fmt(x) for x in row) + "\n")
    _write_text(path, buf.getvalue())


def _write_grid_csv(path: str, diagram: PhaseDiagram, values, fmt):
    buf = io.StringIO()
    buf.write("r," + ",".join(_fmt(T) for T in diagram.T_grid) + "\n")
    for i, r in enumerate(diagram.r_grid):
        buf.write(_fmt(r) + "," + ",".join(fmt(v) for v in values[i]) + "\n")
    _write_text(path, buf.getvalue())


def _write_json(path: str, data: dict):
    _write_text(path, json.dumps(data, indent=2, sort_keys=True) + "\n")
