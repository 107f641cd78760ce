"""Order-domain squared envelope spectrum via the velocity synchronous DFT.

The VS-DFT matrix has entries

    V[m, n] = omega[n] * exp(-1j * alpha[m] * theta[n]) / (fs * theta[L_y - 1])

and is never stored.  Rows are generated in blocks: each block is an exactly
evaluated anchor row ``exp(-1j * alpha[m0] * theta)`` multiplied by a cached
stack of ``exp(-1j * k * delta_alpha * theta)`` for ``k < block``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Ges2nError
from .signal_model import AngleProfile, FilteredSignal

# extra room for alpha values that are a few ulps off an exact multiple
_GRID_SLACK = 1e-9
_BLOCK_BUDGET_BYTES = 32 * 2**20


@dataclass(frozen=True)
class CyclicGrid:
    delta_alpha: float
    alpha: np.ndarray

    @property
    def n_f(self) -> int:
        return len(self.alpha)

    @classmethod
    def from_alpha(cls, alpha) -> "CyclicGrid":
        alpha = np.asarray(alpha, dtype=np.float64)
        if alpha.ndim != 1 or len(alpha) < 2 or alpha[0] != 0.0:
            raise Ges2nError("alpha must be a uniform grid starting at zero")
        delta = float(alpha[1] - alpha[0])
        if delta <= 0 or not np.allclose(np.diff(alpha), delta, rtol=1e-9, atol=0):
            raise Ges2nError("alpha is not uniformly spaced")
        return cls(delta, alpha)


@dataclass(frozen=True)
class SesResult:
    """SES amplitudes ``b = |spectrum|**2`` on ``grid``.

    ``spectrum`` is ``V @ (y * y)``; it is ``None`` when the result was
    rebuilt from stored amplitudes.  ``digest`` identifies the filter the
    spectrum was computed with, if known.
    """

    b: np.ndarray
    grid: CyclicGrid
    spectrum: np.ndarray | None = None
    digest: str | None = field(default=None, compare=False)

    @classmethod
    def from_amplitudes(cls, alpha, b) -> "SesResult":
        b = np.asarray(b, dtype=np.float64)
        grid = CyclicGrid.from_alpha(alpha)
        if len(b) != grid.n_f:
            raise Ges2nError("amplitude and order vectors differ in length")
        return cls(b=b, grid=grid)


def coefficient_digest(g) -> str:
    g = np.ascontiguousarray(g, dtype=np.float64)
    return hashlib.sha1(g.tobytes()).hexdigest()


def _theta_array(theta) -> np.ndarray:
    if isinstance(theta, AngleProfile):
        theta = theta.theta
    return np.asarray(theta, dtype=np.float64)


def default_resolution(theta, l_y: int) -> float:
    """One cycle per revolution spanned by the filtered signal: ``2 pi / theta[l_y - 1]``."""
    theta = _theta_array(theta)
    if not 1 <= l_y <= len(theta):
        raise Ges2nError(f"l_y={l_y} is out of range for {len(theta)} angle samples")
    span = theta[l_y - 1]
    if not span > 0:
        raise Ges2nError("the filtered signal spans no shaft rotation")
    return 2.0 * math.pi / float(span)


def build_grid(delta_alpha: float, alpha_max: float) -> CyclicGrid:
    if not (delta_alpha > 0 and alpha_max > 0):
        raise Ges2nError("delta_alpha and alpha_max must be positive")
    if alpha_max < delta_alpha * (1 - _GRID_SLACK):
        raise Ges2nError("alpha_max must be at least delta_alpha")
    n_f = int(math.floor(alpha_max / delta_alpha + _GRID_SLACK)) + 1
    alpha = np.arange(n_f, dtype=np.float64) * delta_alpha
    alpha.setflags(write=False)
    return CyclicGrid(float(delta_alpha), alpha)


class VsDftOperator:
    """Matrix-free VS-DFT for a fixed speed profile, grid and output length."""

    def __init__(self, omega, theta, fs: float, grid: CyclicGrid, l_y: int, block: int | None = None):
        theta = _theta_array(theta)
        omega = np.asarray(omega, dtype=np.float64)
        if l_y < 1 or len(theta) < l_y or len(omega) < l_y:
            raise Ges2nError("omega/theta must cover the filtered signal")
        span = theta[l_y - 1]
        if span == 0:
            raise Ges2nError("theta[L_y - 1] is zero; the VS-DFT is undefined")
        self.grid = grid
        self.l_y = int(l_y)
        self.theta = theta[:l_y]
        self.weight = omega[:l_y] / (fs * span)
        if block is None:
            block = _BLOCK_BUDGET_BYTES // (16 * self.l_y)
        self.block = int(max(1, min(block, 32, grid.n_f)))
        k = np.arange(self.block, dtype=np.float64)
        self._steps = np.exp(-1j * grid.delta_alpha * np.outer(k, self.theta))
        self._anchor_rows = None

    @property
    def shape(self):
        return (self.grid.n_f, self.l_y)

    def _anchors(self):
        # one exactly evaluated row per block; a 1/block fraction of V
        if self._anchor_rows is None:
            starts = np.arange(0, self.grid.n_f, self.block, dtype=np.float64)
            self._anchor_rows = np.exp(-1j * self.grid.delta_alpha * np.outer(starts, self.theta))
        return self._anchor_rows

    def _blocks(self):
        n_f = self.grid.n_f
        for i, m0 in enumerate(range(0, n_f, self.block)):
            yield m0, min(self.block, n_f - m0), self._anchors()[i]

    def matvec(self, v) -> np.ndarray:
        """``V @ v`` for a real or complex vector of length ``L_y``."""
        v = np.asarray(v)
        if v.shape != (self.l_y,):
            raise Ges2nError(f"expected a vector of length {self.l_y}")
        wv = self.weight * v
        out = np.empty(self.grid.n_f, dtype=np.complex128)
        for m0, rows, anchor in self._blocks():
            out[m0:m0 + rows] = self._steps[:rows] @ (anchor * wv)
        return out

    def transpose_matvec(self, c) -> np.ndarray:
        """``V.T @ c`` (plain transpose, no conjugation)."""
        c = np.asarray(c, dtype=np.complex128)
        if c.shape != (self.grid.n_f,):
            raise Ges2nError(f"expected a vector of length {self.grid.n_f}")
        acc = np.zeros(self.l_y, dtype=np.complex128)
        for m0, rows, anchor in self._blocks():
            cb = c[m0:m0 + rows]
            if np.any(cb):
                acc += (cb @ self._steps[:rows]) * anchor
        return acc * self.weight

    def dense(self) -> np.ndarray:
        """Materialise the matrix; intended for small problems and debugging."""
        out = np.empty(self.shape, dtype=np.complex128)
        for m0, rows, anchor in self._blocks():
            out[m0:m0 + rows] = self._steps[:rows] * anchor * self.weight
        return out


def vs_dft(signal, omega, theta, fs: float, grid: CyclicGrid) -> np.ndarray:
    signal = np.asarray(signal, dtype=np.float64)
    op = VsDftOperator(omega, theta, fs, grid, len(signal))
    return op.matvec(signal)


def squared_envelope_spectrum(y, omega, theta, fs: float, grid: CyclicGrid, operator: VsDftOperator | None = None) -> SesResult:
    """SES ``b = conj(V (y*y)) * V (y*y)`` of a filtered signal."""
    if isinstance(y, FilteredSignal):
        if y.offset != 0:
            omega = np.asarray(omega)[y.offset:]
            theta = _theta_array(theta)[y.offset:]
        y = y.y
    y = np.asarray(y, dtype=np.float64)
    if len(y) == 0:
        raise Ges2nError("cannot compute the SES of an empty signal")
    if operator is None:
        operator = VsDftOperator(omega, theta, fs, grid, len(y))
    spectrum = operator.matvec(y * y)
    b = spectrum.real**2 + spectrum.imag**2
    return SesResult(b=b, grid=grid, spectrum=spectrum)
