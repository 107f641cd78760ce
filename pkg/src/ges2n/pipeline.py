"""End-to-end filter design runs and parameter sweeps."""

from __future__ import annotations

import csv
import io
import itertools
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DegenerateObjectiveError, Ges2nError
from .io import atomic_write_text, dataclass_from_strings, write_json, write_ses, write_table
from .metrics import (
    DEFAULT_EXTRANEOUS_ORDER,
    MetricsReport,
    compute_metrics,
    filter_frequency_response,
    metrics_grid_max,
)
from .objective import BandSpec, variant_config
from .optimizer import OptimizationTrace, OptimizerConfig, minimize, objective_grid
from .signal_model import VibrationRecord, filtered_length, fir_filter, integrate_angle
from .vs_spectrum import SesResult, build_grid, default_resolution, squared_envelope_spectrum

log = logging.getLogger(__name__)

SWEEP_AXES = ("filter_length", "delta_alpha", "band_width")


@dataclass(frozen=True)
class RunConfig:
    input: str | None = None
    variant: str = "GES2N-Max-Np"
    alpha_c: float | None = None
    nh: int = 10
    band_width: float = 0.1
    delta_alpha: float | None = None
    alpha_max: float | None = None
    filter_length: int = 256
    tol: float = 1e-12
    max_iter: int = 1500
    init: str = "lpc"
    seed: int = 0
    extraneous_order: float | None = DEFAULT_EXTRANEOUS_ORDER
    out: str | None = None

    def validate(self) -> "RunConfig":
        if self.alpha_c is None:
            raise ConfigError("alpha_c is required")
        variant_config(self.variant, self.alpha_c, self.nh)
        self.bands()
        self.optimizer()
        if self.delta_alpha is not None and not self.delta_alpha > 0:
            raise ConfigError("delta_alpha must be positive")
        if self.alpha_max is not None and not self.alpha_max > 0:
            raise ConfigError("alpha_max must be positive")
        return self

    def bands(self) -> BandSpec:
        return BandSpec(self.alpha_c, self.nh, self.band_width)

    def optimizer(self) -> OptimizerConfig:
        return OptimizerConfig(tol=self.tol, max_iter=self.max_iter, filter_length=self.filter_length,
                               init=self.init, seed=self.seed)

    @classmethod
    def from_mapping(cls, values: dict) -> "RunConfig":
        return dataclass_from_strings(cls, values, "run")


@dataclass
class RunResult:
    config: RunConfig
    trace: OptimizationTrace
    y: np.ndarray
    ses_raw: SesResult
    ses_filtered: SesResult
    metrics_raw: MetricsReport
    metrics_filtered: MetricsReport
    frf: tuple

    @property
    def psi(self) -> float:
        return float(np.exp(-self.trace.f_final)) if self.trace.iterates else float("nan")

    def summary(self) -> dict:
        out = {
            "variant": self.config.variant,
            "status": self.trace.status,
            "reason": self.trace.reason,
            "n_iter": self.trace.n_iter,
            "n_evals": self.trace.n_evals,
            "psi": self.psi,
            "alpha_c": self.config.alpha_c,
            "alpha_extraneous": self.config.extraneous_order,
            "filter_length": self.config.filter_length,
            "n_h": self.config.nh,
            "band_width": self.config.band_width,
            "delta_alpha": self.ses_filtered.grid.delta_alpha,
        }
        for name, report in (("raw", self.metrics_raw), ("filtered", self.metrics_filtered)):
            for key in ("m1", "m2", "m3", "m4"):
                out[f"{key}_{name}"] = getattr(report, key)
        return out


def run_pipeline(cfg: RunConfig, record: VibrationRecord) -> RunResult:
    """Design a filter for ``record`` and evaluate raw and filtered SES metrics.

    The raw SES uses the first ``L_y`` samples of ``x`` on the same grid as
    the filtered SES, so the two are directly comparable.
    """
    cfg.validate()
    d = cfg.filter_length
    l_y = filtered_length(len(record.x), d)
    if len(record.x) < 4 * d:
        raise ConfigError(f"{len(record.x)} samples are too few for a filter of length {d}")
    theta = integrate_angle(record).theta
    bands = cfg.bands()
    variant = variant_config(cfg.variant, cfg.alpha_c, cfg.nh)
    delta = cfg.delta_alpha or default_resolution(theta, l_y)
    grid = objective_grid(theta, l_y, bands, delta, cfg.alpha_max)
    log.info("designing %s filter: D=%d, delta_alpha=%.6g, %d orders", cfg.variant, d, delta, grid.n_f)
    trace = minimize(record.x, record.omega, theta, record.fs, variant, bands, cfg.optimizer(), grid)
    if trace.status == "degenerate":
        raise DegenerateObjectiveError(trace.reason)

    g = trace.final.g
    y = fir_filter(record.x, g).y
    reach = max(metrics_grid_max(cfg.alpha_c, cfg.nh, cfg.band_width), cfg.alpha_max or 0.0)
    metrics_grid = build_grid(delta, reach)
    ses_raw = squared_envelope_spectrum(record.x[:l_y], record.omega, theta, record.fs, metrics_grid)
    ses_filtered = squared_envelope_spectrum(y, record.omega, theta, record.fs, metrics_grid)
    kwargs = dict(alpha_extraneous=cfg.extraneous_order, n_h=cfg.nh, band_width=cfg.band_width)
    return RunResult(
        config=cfg,
        trace=trace,
        y=y,
        ses_raw=ses_raw,
        ses_filtered=ses_filtered,
        metrics_raw=compute_metrics(ses_raw, cfg.alpha_c, **kwargs),
        metrics_filtered=compute_metrics(ses_filtered, cfg.alpha_c, **kwargs),
        frf=filter_frequency_response(g, record.fs),
    )


def write_trace(path, trace: OptimizationTrace) -> None:
    rows = trace.iterates
    write_table(path, ("iteration", "f", "grad_norm", "step", "switched"), [
        [e.iteration for e in rows], [e.f for e in rows], [e.grad_norm for e in rows],
        [e.step for e in rows], [int(e.switched) for e in rows],
    ])


def write_outputs(out_dir, result: RunResult) -> None:
    out = Path(out_dir)
    write_table(out / "filtered.csv", ("y",), [result.y])
    write_ses(out / "ses_raw.csv", result.ses_raw)
    write_ses(out / "ses_filtered.csv", result.ses_filtered)
    write_table(out / "frf.csv", ("frequency_hz", "magnitude"), list(result.frf))
    write_json(out / "metrics.json", result.summary())
    write_trace(out / "trace.csv", result.trace)


# --------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepCell:
    index: int
    config: RunConfig


def expand_sweep(base: RunConfig, axes: dict) -> list:
    """Cartesian product over the axis values, in the order of ``SWEEP_AXES``."""
    names = [a for a in SWEEP_AXES if a in axes]
    values = [axes[a] for a in names]
    cells = []
    for i, combo in enumerate(itertools.product(*values)):
        cells.append(SweepCell(i, replace(base, **dict(zip(names, combo)))))
    return cells


def parse_sweep(values: dict):
    """Split a sweep config into the base run, the axes and the data source.

    Axis keys hold comma-separated lists.  The data source is ``input`` (a
    CSV path) or ``scenario`` (a synthetic scenario name, optionally with
    ``scenario_seed``); the default is the weak-fault scenario.
    """
    values = dict(values)
    source = {k: values.pop(k) for k in ("scenario", "scenario_seed") if k in values}
    axes = {}
    types = {f.name: f.type for f in fields(RunConfig)}
    for name in SWEEP_AXES:
        if name in values:
            items = [v.strip() for v in values.pop(name).split(",") if v.strip()]
            if not items:
                raise ConfigError(f"sweep axis {name} is empty")
            parse = int if types[name] == "int" else float
            try:
                axes[name] = [parse(v) for v in items]
            except ValueError as exc:
                raise ConfigError(f"bad value in sweep axis {name}: {exc}") from exc
    base = RunConfig.from_mapping(values)
    return base, axes, source


def _run_cell(cell: SweepCell, record: VibrationRecord, out_dir: str) -> dict:
    row = {"cell": cell.index}
    row.update({a: getattr(cell.config, a) for a in SWEEP_AXES})
    start = time.perf_counter()
    try:
        result = run_pipeline(cell.config, record)
        write_outputs(Path(out_dir) / f"cell_{cell.index:03d}", result)
        s = result.summary()
        row.update(status=s["status"], error="", psi=s["psi"], n_iter=s["n_iter"],
                   **{f"{m}_filtered": s[f"{m}_filtered"] for m in ("m1", "m2", "m3", "m4")})
    except (Ges2nError, OSError) as exc:
        row.update(status="failed", error=f"{type(exc).__name__}: {exc}")
    row["wall_time_s"] = round(time.perf_counter() - start, 3)
    return row


SUMMARY_COLUMNS = ("cell", *SWEEP_AXES, "status", "psi", "m1_filtered", "m2_filtered",
                   "m3_filtered", "m4_filtered", "n_iter", "wall_time_s", "error")


def run_sweep(base: RunConfig, axes: dict, record: VibrationRecord, out_dir, jobs: int = 1) -> list:
    """Run every cell, at most ``jobs`` at a time; failures are recorded, not raised."""
    if jobs < 1:
        raise ConfigError("jobs must be at least 1")
    cells = expand_sweep(base, axes)
    out_dir = str(out_dir)
    if jobs == 1:
        rows = [_run_cell(c, record, out_dir) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell, cells, [record] * len(cells), [out_dir] * len(cells)))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell_text(row.get(k)) for k in SUMMARY_COLUMNS})
    atomic_write_text(Path(out_dir) / "summary.csv", buf.getvalue())
    return rows


def _cell_text(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)
