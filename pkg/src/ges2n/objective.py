"""Cyclic-order weighting matrices and the GES2N signal-to-noise objective.

The objective is the ratio ``(w_s^T C_s b) / (w_n^T C_n b)`` of two linear
functionals of the SES amplitudes ``b``.  Weighting matrices are stored
row-sparse since each row touches only a handful of bins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DegenerateObjectiveError, Ges2nError
from .vs_spectrum import CyclicGrid, SesResult

VARIANT_NAMES = (
    "GES2N-ICS2",
    "GES2N-Mean-Nf",
    "GES2N-Mean-Np",
    "GES2N-Max-Nf",
    "GES2N-Max-Np",
)

# inclusive band edges get this much slack (in units of delta_alpha) so that
# k * delta_alpha lands inside a band whose edge it equals in exact arithmetic
_EDGE_SLACK = 1e-9


@dataclass(frozen=True)
class BandSpec:
    alpha_c: float
    n_h: int = 10
    band_width: float = 0.1

    def __post_init__(self):
        if not self.alpha_c > 0:
            raise ConfigError("alpha_c must be positive")
        if int(self.n_h) != self.n_h or self.n_h < 1:
            raise ConfigError("n_h must be a positive integer")
        if not self.band_width > 0:
            raise ConfigError("band_width must be positive")

    def centres(self) -> np.ndarray:
        return self.alpha_c * np.arange(1, self.n_h + 1)


@dataclass(frozen=True)
class SparseRows:
    """Row-sparse real matrix with ``n_cols`` columns."""

    indices: tuple
    values: tuple
    n_cols: int

    @property
    def n_rows(self) -> int:
        return len(self.indices)

    def row_sums(self, b) -> np.ndarray:
        b = np.asarray(b)
        return np.array([np.dot(v, b[i]) for i, v in zip(self.indices, self.values)])

    def weighted_columns(self, w) -> np.ndarray:
        """Dense ``w^T C``."""
        out = np.zeros(self.n_cols)
        for wi, idx, val in zip(w, self.indices, self.values):
            np.add.at(out, idx, wi * val)
        return out

    def support(self) -> np.ndarray:
        mask = np.zeros(self.n_cols, dtype=bool)
        for idx in self.indices:
            mask[idx] = True
        return mask

    def total(self) -> float:
        return float(sum(v.sum() for v in self.values))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols))
        for r, (idx, val) in enumerate(zip(self.indices, self.values)):
            out[r, idx] = val
        return out

    @classmethod
    def from_dense(cls, matrix) -> "SparseRows":
        matrix = np.asarray(matrix, dtype=np.float64)
        idx = tuple(np.flatnonzero(row) for row in matrix)
        val = tuple(row[i].copy() for row, i in zip(matrix, idx))
        return cls(idx, val, matrix.shape[1])


@dataclass(frozen=True)
class VariantConfig:
    name: str
    numerator_mode: str
    alpha_n_min: float
    alpha_n_max: float


@dataclass(frozen=True)
class WeightingSpec:
    """Everything needed to evaluate one GES2N objective on a fixed grid."""

    c_s: SparseRows
    c_n: SparseRows
    w_s: np.ndarray
    w_n: np.ndarray
    numerator_mode: str
    c_s_base: SparseRows

    @property
    def data_dependent(self) -> bool:
        return self.numerator_mode == "max"

    def selection(self) -> tuple:
        """Selected bin per band (meaningful in max mode)."""
        return tuple(int(i[0]) for i in self.c_s.indices)


@dataclass(frozen=True)
class ObjectiveValue:
    psi: float
    log_psi: float
    numerator: float
    denominator: float
    weighting: WeightingSpec


def variant_config(name: str, alpha_c: float, n_h: int = 10) -> VariantConfig:
    if name not in VARIANT_NAMES:
        raise ConfigError(
            f"unknown variant {name!r}; valid names are: {', '.join(VARIANT_NAMES)}"
        )
    if name == "GES2N-ICS2":
        return VariantConfig(name, "max", 0.0, 0.0)
    _, mode, region = name.split("-")
    lo = 0.0 if region == "Nf" else 0.5
    return VariantConfig(name, mode.lower(), lo, (n_h + 1) * alpha_c)


def _in_range(alpha, lo, hi, delta):
    slack = _EDGE_SLACK * delta
    return (alpha >= lo - slack) & (alpha <= hi + slack)


def build_numerator_base(spec: BandSpec, grid: CyclicGrid) -> SparseRows:
    """One {0,1} row per harmonic ``k alpha_c``, selecting bins within ``band_width / 2``."""
    alpha = grid.alpha
    half = spec.band_width / 2
    indices = []
    for centre in spec.centres():
        idx = np.flatnonzero(_in_range(alpha, centre - half, centre + half, grid.delta_alpha))
        if len(idx) == 0:
            raise Ges2nError(
                f"band around alpha={centre:g} contains no grid point "
                f"(delta_alpha={grid.delta_alpha:g}, alpha_max={alpha[-1]:g})"
            )
        indices.append(idx)
    values = tuple(np.ones(len(i)) for i in indices)
    return SparseRows(tuple(indices), values, grid.n_f)


def process_numerator(base: SparseRows, b, mode: str) -> SparseRows:
    """Mean: normalise by the global entry count.  Max: one-hot on the band maximum."""
    if mode == "mean":
        total = base.total()
        if total <= 0:
            raise Ges2nError("numerator weighting matrix is empty")
        return SparseRows(base.indices, tuple(v / total for v in base.values), base.n_cols)
    if mode == "max":
        b = np.asarray(b)
        picks = []
        for idx, val in zip(base.indices, base.values):
            # argmax returns the first maximum, i.e. the lowest cyclic order
            picks.append(idx[np.argmax(val * b[idx])])
        indices = tuple(np.array([p]) for p in picks)
        return SparseRows(indices, tuple(np.ones(1) for _ in picks), base.n_cols)
    raise ConfigError(f"unknown numerator mode {mode!r}")


def build_denominator(variant: VariantConfig, c_s: SparseRows, grid: CyclicGrid) -> SparseRows:
    """Single mean-normalised band over ``[alpha_n_min, alpha_n_max]`` minus the numerator bins."""
    mask = _in_range(grid.alpha, variant.alpha_n_min, variant.alpha_n_max, grid.delta_alpha)
    mask &= ~c_s.support()
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        raise Ges2nError(f"denominator of {variant.name} selects no cyclic orders")
    return SparseRows((idx,), (np.full(len(idx), 1.0 / len(idx)),), grid.n_f)


def build_weighting(variant: VariantConfig, spec: BandSpec, grid: CyclicGrid, b=None) -> WeightingSpec:
    base = build_numerator_base(spec, grid)
    if variant.numerator_mode == "max":
        c_s = process_numerator(base, np.zeros(grid.n_f) if b is None else b, "max")
    else:
        c_s = process_numerator(base, None, "mean")
    # excluded columns follow the base band support, not the processed matrix
    c_n = build_denominator(variant, base, grid)
    return WeightingSpec(
        c_s=c_s,
        c_n=c_n,
        w_s=np.ones(base.n_rows),
        w_n=np.ones(c_n.n_rows),
        numerator_mode=variant.numerator_mode,
        c_s_base=base,
    )


def refresh(ws: WeightingSpec, b) -> WeightingSpec:
    """Recompute data-dependent weights for the amplitudes ``b``; returns a new spec."""
    if not ws.data_dependent:
        return ws
    return replace(ws, c_s=process_numerator(ws.c_s_base, b, "max"))


def evaluate_objective(b, ws: WeightingSpec) -> ObjectiveValue:
    if isinstance(b, SesResult):
        b = b.b
    b = np.asarray(b, dtype=np.float64)
    ws = refresh(ws, b)
    numerator = float(np.dot(ws.w_s, ws.c_s.row_sums(b)))
    denominator = float(np.dot(ws.w_n, ws.c_n.row_sums(b)))
    if not math.isfinite(denominator) or denominator <= 0:
        raise DegenerateObjectiveError(f"noise term is {denominator!r}")
    if numerator > 0:
        log_psi = math.log(numerator) - math.log(denominator)
    else:
        log_psi = -math.inf
    return ObjectiveValue(
        psi=numerator / denominator,
        log_psi=log_psi,
        numerator=numerator,
        denominator=denominator,
        weighting=ws,
    )
