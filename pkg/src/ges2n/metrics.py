"""SES quality metrics M1-M4 and presentation transforms."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import Ges2nError
from .vs_spectrum import SesResult

DEFAULT_EXTRANEOUS_ORDER = 5.72
_EDGE_SLACK = 1e-9


@dataclass(frozen=True)
class MetricsReport:
    """M1-M4 for one SES.  ``None`` marks a metric whose divisor was zero."""

    m1: float | None
    m2: float | None
    m3: float | None
    m4: float | None
    alpha_c: float
    alpha_extraneous: float | None

    def as_dict(self, suffix: str = "") -> dict:
        return {f"{k}{suffix}": v for k, v in asdict(self).items()}


def _band_peak(b, alpha, centre, width, delta):
    half = width / 2 + _EDGE_SLACK * delta
    idx = np.flatnonzero((alpha >= centre - half) & (alpha <= centre + half))
    if len(idx) == 0:
        raise Ges2nError(f"band around alpha={centre:g} contains no grid point")
    return float(np.max(b[idx]))


def harmonic_amplitudes(ses: SesResult, alpha_c: float, n_h: int = 10, band_width: float = 0.1) -> np.ndarray:
    """Peak SES amplitude within ``k alpha_c +- band_width / 2`` for ``k = 1..n_h``."""
    b = np.asarray(ses.b)
    alpha = ses.grid.alpha
    return np.array([
        _band_peak(b, alpha, k * alpha_c, band_width, ses.grid.delta_alpha)
        for k in range(1, n_h + 1)
    ])


def _ratio(num, den):
    if den == 0 or not np.isfinite(den):
        return None
    return float(num / den)


def compute_metrics(ses: SesResult, alpha_c: float, alpha_extraneous: float | None = DEFAULT_EXTRANEOUS_ORDER,
                    n_h: int = 10, band_width: float = 0.1) -> MetricsReport:
    b = np.asarray(ses.b)
    alpha = ses.grid.alpha
    if alpha[-1] < 20 * alpha_c * (1 - _EDGE_SLACK):
        raise Ges2nError(f"grid ends at {alpha[-1]:g} but metrics need 20 * alpha_c = {20 * alpha_c:g}")
    harm = harmonic_amplitudes(ses, alpha_c, n_h, band_width)
    level = float(np.mean(harm))

    m1 = _ratio(level, float(np.median(b)))
    m2 = None
    if alpha_extraneous is not None:
        m2 = _ratio(level, _band_peak(b, alpha, alpha_extraneous, band_width, ses.grid.delta_alpha))
    in_range = (alpha >= 0.5) & (alpha <= 20 * alpha_c * (1 + _EDGE_SLACK))
    m3 = _ratio(level, float(np.max(b[in_range])))
    m4 = _ratio(1.0, float(np.var(harm)))
    return MetricsReport(m1, m2, m3, m4, float(alpha_c),
                         None if alpha_extraneous is None else float(alpha_extraneous))


def metrics_grid_max(alpha_c: float, n_h: int, band_width: float) -> float:
    """Grid extent covering the M3 search range and the objective's bands."""
    return max(20 * alpha_c + band_width, (n_h + 1) * alpha_c)


def log_median_normalize(b) -> np.ndarray:
    b = np.asarray(b, dtype=np.float64)
    return np.log(b / np.median(b))


def normalize_for_display(values, log_median: bool = False) -> np.ndarray:
    """Row-wise min-max scaling to [0, 1]; constant rows map to zeros.

    With ``log_median=True`` each row is first replaced by ``ln(row / median(row))``.
    """
    v = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if log_median:
        v = np.log(v / np.median(v, axis=1, keepdims=True))
    lo = v.min(axis=1, keepdims=True)
    span = v.max(axis=1, keepdims=True) - lo
    out = np.zeros_like(v)
    ok = span[:, 0] > 0
    out[ok] = (v[ok] - lo[ok]) / span[ok]
    return out


def filter_frequency_response(g, fs: float, n_fft: int = 4096):
    """Magnitude of the zero-padded spectrum of ``g`` on ``[0, fs/2]``, unit L2 norm."""
    mag = np.abs(np.fft.rfft(np.asarray(g, dtype=np.float64), n_fft))
    freq = np.arange(len(mag)) * fs / n_fft
    norm = np.linalg.norm(mag)
    return freq, (mag / norm if norm > 0 else mag)
