"""Analytical gradient of ``ln psi`` and a finite-difference checker.

With ``s = V (y*y)`` and ``b = |s|**2`` the chain rule gives

    d ln psi / dg[k] = sum_m r[m] * 2 Re(conj(s[m]) * ds[m]/dg[k])
    ds[m]/dg[k]      = 2 sum_n V[m, n] y[n] X[n, k]

where ``r = w_s^T C_s / (w_s^T C_s b) - w_n^T C_n / (w_n^T C_n b)``.  Swapping
the sums over ``m`` and ``n`` turns this into one transposed VS-DFT product
followed by one correlation with ``x``, so neither ``V`` nor ``X`` is formed.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateObjectiveError, Ges2nError, StaleCacheError
from .objective import WeightingSpec, refresh
from .signal_model import fir_filter, fir_filter_adjoint
from .vs_spectrum import SesResult, VsDftOperator, coefficient_digest


def row_weights(b, ws: WeightingSpec) -> np.ndarray:
    """Per-bin derivative of ``ln psi`` with respect to ``b`` (weights held fixed)."""
    cs = ws.c_s.weighted_columns(ws.w_s)
    cn = ws.c_n.weighted_columns(ws.w_n)
    num = float(cs @ b)
    den = float(cn @ b)
    if not den > 0 or not np.isfinite(den):
        raise DegenerateObjectiveError(f"noise term is {den!r}")
    if not num > 0:
        raise DegenerateObjectiveError("signal term is zero; ln psi has no gradient")
    return cs / num - cn / den


def grad_log_psi_wrt_g(x, g, omega, theta, fs, ws: WeightingSpec, cached: SesResult,
                       operator: VsDftOperator | None = None) -> np.ndarray:
    """Gradient of ``ln psi`` with respect to the normalised coefficients ``g``.

    ``cached`` must be the SES of ``x`` filtered by ``g``.  In max mode the
    one-hot numerator weights are refreshed from ``cached.b`` and then held
    constant, so the result is a subgradient at band-maximum ties.
    """
    g = np.asarray(g, dtype=np.float64)
    if cached.spectrum is None:
        raise Ges2nError("the cached SES carries no complex spectrum")
    if cached.digest is not None and cached.digest != coefficient_digest(g):
        raise StaleCacheError("cached SES was computed for different coefficients")
    y = fir_filter(x, g).y
    if operator is None:
        operator = VsDftOperator(omega, theta, fs, cached.grid, len(y))
    ws = refresh(ws, cached.b)
    r = row_weights(cached.b, ws)
    z = operator.transpose_matvec(r * np.conj(cached.spectrum)).real
    return 4.0 * fir_filter_adjoint(x, y * z, len(g))


def grad_log_psi_wrt_h(h, grad_g) -> np.ndarray:
    """Pull a gradient back through ``g = h / ||h||``.

    Applies ``(||h||^2 I - h h^T) / ||h||^3`` without forming it.
    """
    h = np.asarray(h, dtype=np.float64)
    grad_g = np.asarray(grad_g, dtype=np.float64)
    nsq = float(h @ h)
    if nsq == 0.0:
        raise Ges2nError("gradient is undefined at h = 0")
    return (grad_g - (h @ grad_g / nsq) * h) / np.sqrt(nsq)


def finite_difference_check(objective, h, directions: int = 8, step: float | None = None,
                            seed: int = 0, gradient=None) -> float:
    """Worst relative error between central differences and the analytic gradient.

    ``objective(h)`` returns either ``(f, grad)`` or ``f``; in the latter case
    ``gradient(h)`` must be supplied.  The error along a unit direction ``d``
    is ``|fd - a| / max(|fd|, |a|, 1e-3 ||grad||)`` with ``a = grad @ d``; the
    floor keeps directions nearly orthogonal to the gradient from dominating.
    """
    h = np.asarray(h, dtype=np.float64)
    if step is None:
        step = 1e-6 * max(1.0, float(np.linalg.norm(h)))
    if not step > 0:
        raise Ges2nError("step must be positive")

    def value(p):
        out = objective(p)
        return out[0] if isinstance(out, tuple) else out

    if gradient is None:
        _, grad = objective(h)
    else:
        grad = gradient(h)
    grad = np.asarray(grad, dtype=np.float64)
    rng = np.random.default_rng(seed)
    floor = max(1e-3 * float(np.linalg.norm(grad)), 1e-300)
    worst = 0.0
    for _ in range(directions):
        d = rng.standard_normal(len(h))
        d /= np.linalg.norm(d)
        fd = (value(h + step * d) - value(h - step * d)) / (2 * step)
        an = float(grad @ d)
        scale = max(abs(fd), abs(an), floor)
        worst = max(worst, abs(fd - an) / scale)
    return worst
