"""Measured signal containers, angle integration and FIR filtering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Ges2nError


@dataclass(frozen=True)
class VibrationRecord:
    """Acceleration samples ``x`` with the reference shaft speed ``omega`` (rad/s)."""

    x: np.ndarray
    fs: float
    omega: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        omega = np.asarray(self.omega, dtype=np.float64)
        if x.ndim != 1 or omega.ndim != 1:
            raise Ges2nError("x and omega must be one-dimensional")
        if len(x) != len(omega):
            raise Ges2nError(f"x has {len(x)} samples but omega has {len(omega)}")
        if len(x) < 2:
            raise Ges2nError("a record needs at least two samples")
        if not np.isfinite(self.fs) or self.fs <= 0:
            raise Ges2nError(f"sample rate must be positive, got {self.fs}")
        if not np.all(np.isfinite(omega)):
            raise Ges2nError("omega contains non-finite values")
        if np.any(omega <= 0):
            raise Ges2nError("omega must be strictly positive")
        x.setflags(write=False)
        omega.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "fs", float(self.fs))

    @property
    def n_samples(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class AngleProfile:
    """Instantaneous shaft angle in radians, starting at zero."""

    theta: np.ndarray

    def __len__(self):
        return len(self.theta)


@dataclass(frozen=True)
class FilterState:
    h: np.ndarray
    g: np.ndarray

    @property
    def length(self) -> int:
        return len(self.h)


@dataclass(frozen=True)
class FilteredSignal:
    """Filter output; ``y[n]`` is aligned with speed/angle sample ``n + offset``."""

    y: np.ndarray
    offset: int = 0

    def __len__(self):
        return len(self.y)


def integrate_angle(record: VibrationRecord) -> AngleProfile:
    """Trapezoidal integration of the shaft speed.

    ``theta[n] = theta[n-1] + (omega[n] + omega[n-1]) / (2 fs)`` with
    ``theta[0] = 0``.
    """
    omega = np.asarray(record.omega, dtype=np.float64)
    fs = float(record.fs)
    if not np.isfinite(fs) or fs <= 0:
        raise Ges2nError(f"sample rate must be positive, got {fs}")
    if not np.all(np.isfinite(omega)):
        raise Ges2nError("omega contains non-finite values")
    theta = np.empty_like(omega)
    theta[0] = 0.0
    np.cumsum((omega[1:] + omega[:-1]) / (2.0 * fs), out=theta[1:])
    theta.setflags(write=False)
    return AngleProfile(theta)


def filtered_length(n_samples: int, filter_length: int) -> int:
    # L_y = L - D - 1, two samples shorter than a "valid" convolution
    return n_samples - filter_length - 1


def fir_filter(x, g) -> FilteredSignal:
    """Apply the FIR filter ``g`` without building the convolution matrix.

    ``y[n] = sum_k x[n + D - 1 - k] g[k]`` for ``n < L - D - 1``.
    """
    x = np.asarray(x, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    l_y = filtered_length(len(x), len(g))
    if len(g) < 1 or l_y <= 0:
        raise Ges2nError(
            f"signal of length {len(x)} is too short for a filter of length {len(g)}"
        )
    y = np.convolve(x, g, mode="valid")[:l_y]
    return FilteredSignal(y=y, offset=0)


def fir_filter_adjoint(x, u, filter_length: int) -> np.ndarray:
    """Transpose of the filtering map: ``X.T @ u`` for the convolution matrix ``X``."""
    x = np.asarray(x, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    d = int(filter_length)
    if len(u) != filtered_length(len(x), d):
        raise Ges2nError("adjoint input has the wrong length")
    # c[j] = sum_n x[n + j] u[n]; column k of X is lag j = D - 1 - k
    c = np.correlate(x[: len(u) + d - 1], u, mode="valid")
    return c[::-1].copy()


def normalize_filter(h) -> FilterState:
    h = np.array(h, dtype=np.float64)
    if h.ndim != 1 or len(h) < 1:
        raise Ges2nError("filter coefficients must be a non-empty vector")
    norm = np.linalg.norm(h)
    if not np.isfinite(norm) or norm == 0.0:
        raise Ges2nError("cannot normalise a zero or non-finite filter")
    g = h / norm
    h.setflags(write=False)
    g.setflags(write=False)
    return FilterState(h=h, g=g)
