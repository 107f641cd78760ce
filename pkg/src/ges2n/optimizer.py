"""Minimisation of ``-ln psi(h / ||h||)`` over unconstrained FIR coefficients."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateObjectiveError, Ges2nError, SingularAutocorrelationError
from .gradient import grad_log_psi_wrt_g, grad_log_psi_wrt_h
from .objective import BandSpec, VariantConfig, build_weighting, evaluate_objective
from .signal_model import FilterState, filtered_length, fir_filter, normalize_filter
from .vs_spectrum import (
    CyclicGrid,
    SesResult,
    VsDftOperator,
    build_grid,
    coefficient_digest,
    default_resolution,
)

log = logging.getLogger(__name__)

INIT_METHODS = ("lpc", "impulse", "random")


@dataclass(frozen=True)
class OptimizerConfig:
    tol: float = 1e-12
    max_iter: int = 1500
    filter_length: int = 256
    init: str = "lpc"
    seed: int = 0
    # backtracking line search: first trial moves h by initial_step * ||h||
    initial_step: float = 0.1
    contraction: float = 0.5
    sufficient_decrease: float = 1e-4
    min_step: float = 1e-18
    restart_every: int | None = None  # defaults to filter_length

    def __post_init__(self):
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.max_iter < 0:
            raise ConfigError("max_iter must be non-negative")
        if self.filter_length < 2:
            raise ConfigError("filter_length must be at least 2")
        if self.init not in INIT_METHODS:
            raise ConfigError(f"init must be one of {', '.join(INIT_METHODS)}")
        if not 0 < self.contraction < 1:
            raise ConfigError("contraction must lie in (0, 1)")
        if not 0 < self.sufficient_decrease < 1:
            raise ConfigError("sufficient_decrease must lie in (0, 1)")

    @property
    def restart_period(self) -> int:
        return self.restart_every or self.filter_length


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    f: float
    grad_norm: float
    step: float
    switched: bool = False


@dataclass
class OptimizationTrace:
    iterates: list
    final: FilterState
    status: str
    reason: str = ""
    n_evals: int = 0

    @property
    def n_iter(self) -> int:
        return self.iterates[-1].iteration if self.iterates else 0

    @property
    def f_final(self) -> float:
        return self.iterates[-1].f

    @property
    def switch_events(self) -> list:
        return [e.iteration for e in self.iterates if e.switched]


# --------------------------------------------------------------------------
# initialisation


def levinson_durbin(r, order: int):
    """Solve the Yule-Walker equations for autocorrelation ``r``.

    Returns the predictor ``a`` (``x[n] ~ sum_j a[j] x[n-1-j]``) and the
    final prediction error variance.
    """
    r = np.asarray(r, dtype=np.float64)
    if len(r) < order + 1:
        raise Ges2nError("autocorrelation is shorter than order + 1")
    err = r[0]
    if not err > 0:
        raise SingularAutocorrelationError("zero-lag autocorrelation is not positive")
    a = np.zeros(0)
    for i in range(1, order + 1):
        k = (r[i] - a @ r[i - 1:0:-1]) / err
        a = np.append(a - k * a[::-1], k)
        err *= 1.0 - k * k
        if not err > 0:
            raise SingularAutocorrelationError(
                f"prediction error variance became {err!r} at order {i}"
            )
    return a, err


def biased_autocorrelation(x, max_lag: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    nfft = 1 << (2 * n - 1).bit_length()
    spec = np.fft.rfft(x, nfft)
    r = np.fft.irfft(spec.real**2 + spec.imag**2, nfft)[: max_lag + 1]
    return r / n


def lpc_init(x, order: int) -> np.ndarray:
    """Prediction-error (whitening) filter ``[1, -a_1, ..., -a_{D-1}]`` of length ``order``."""
    x = np.asarray(x, dtype=np.float64)
    if len(x) <= 2 * order:
        raise Ges2nError(f"LPC of length {order} needs more than {2 * order} samples")
    r = biased_autocorrelation(x, order - 1)
    a, _ = levinson_durbin(r, order - 1)
    return np.concatenate(([1.0], -a))


def initial_filter(x, cfg: OptimizerConfig) -> np.ndarray:
    d = cfg.filter_length
    if cfg.init == "lpc":
        return lpc_init(x, d)
    if cfg.init == "impulse":
        h = np.zeros(d)
        h[0] = 1.0
        return h
    return np.random.default_rng(cfg.seed).standard_normal(d)


# --------------------------------------------------------------------------
# conjugate gradient


_MAX_REFINE = 8


def _safe(value, h):
    try:
        f = value(h)
    except DegenerateObjectiveError:
        return math.inf
    return f if math.isfinite(f) else math.inf


def _line_search(value, h, f0, slope, d, alpha, cfg: OptimizerConfig, n_evals):
    """Backtracking Armijo search followed by quadratic-model refinement.

    Once a step satisfies sufficient decrease, the parabola through
    ``f(0)``, ``f'(0)`` and the best step so far proposes a new step, capped
    at ten times the current one; proposals are taken while they improve
    ``f``.  On a quadratic this ends at the exact minimiser along ``d``.
    Returns ``(alpha, f)`` or ``(None, f0)`` when no acceptable step exists.
    """
    c1 = cfg.sufficient_decrease
    dnorm = float(np.linalg.norm(d))
    scale = max(1.0, float(np.linalg.norm(h)))
    while alpha * dnorm >= cfg.min_step * scale:
        f1 = _safe(value, h + alpha * d)
        n_evals[0] += 1
        # strict decrease as well: at tiny steps the Armijo term drops below one ulp of f0
        if f1 < f0 and f1 <= f0 + c1 * alpha * slope:
            break
        alpha *= cfg.contraction
    else:
        return None, f0

    for _ in range(_MAX_REFINE):
        curv = f1 - f0 - slope * alpha
        if curv > 0:
            trial = -slope * alpha * alpha / (2.0 * curv)
            capped = trial > 10 * alpha
            trial = min(trial, 10 * alpha)
        else:
            trial, capped = 10 * alpha, True
        if not trial > 0 or abs(trial - alpha) <= 1e-6 * alpha:
            break
        f2 = _safe(value, h + trial * d)
        n_evals[0] += 1
        if not (f2 < f1 and f2 <= f0 + c1 * trial * slope):
            break
        alpha, f1 = trial, f2
        if not capped:
            break
    return alpha, f1


def conjugate_gradient(fun, h0, cfg: OptimizerConfig, value=None, marker=None) -> OptimizationTrace:
    """Polak-Ribiere+ nonlinear CG with restarts.

    ``fun(h)`` returns ``(f, grad)``; ``value(h)`` (optional) returns ``f``
    alone and is used for line-search trials.  ``marker(h)``, if given,
    labels the smooth piece containing ``h``; a change between accepted
    iterates is recorded as a switch in the trace.
    """
    if value is None:
        value = lambda p: fun(p)[0]  # noqa: E731
    h = np.array(h0, dtype=np.float64)
    n_evals = [1]
    try:
        f, grad = fun(h)
    except DegenerateObjectiveError as exc:
        return OptimizationTrace([], _final(h), "degenerate", str(exc), n_evals[0])
    if not math.isfinite(f):
        return OptimizationTrace([], _final(h), "degenerate", "objective is not finite", n_evals[0])
    label = marker(h) if marker else None
    trace = [TraceEntry(0, float(f), float(np.max(np.abs(grad))), 0.0)]
    d = -grad
    alpha_prev = None
    slope_prev = None
    since_restart = 0
    status, reason = "max_iter", ""

    for it in range(1, cfg.max_iter + 1):
        gnorm = float(np.max(np.abs(grad)))
        if gnorm < cfg.tol * max(1.0, abs(f)):
            status, reason = "converged", "gradient norm below tolerance"
            break
        slope = float(grad @ d)
        if slope >= 0:
            d, slope = -grad, -float(grad @ grad)
        if alpha_prev is None:
            alpha0 = cfg.initial_step * max(1.0, float(np.linalg.norm(h))) / float(np.linalg.norm(d))
        else:
            alpha0 = alpha_prev * slope_prev / slope
        alpha, f_new = _line_search(value, h, f, slope, d, alpha0, cfg, n_evals)
        if alpha is None and not np.array_equal(d, -grad):
            d, slope = -grad, -float(grad @ grad)
            alpha0 = cfg.initial_step * max(1.0, float(np.linalg.norm(h))) / float(np.linalg.norm(d))
            alpha, f_new = _line_search(value, h, f, slope, d, alpha0, cfg, n_evals)
        if alpha is None:
            if it == 1:
                status, reason = "degenerate", "line search found no decrease from the initial filter"
            else:
                status, reason = "converged", "no representable decrease along steepest descent"
            break

        h = h + alpha * d
        f_old = f
        f, grad_new = fun(h)
        n_evals[0] += 1
        switched = False
        if marker:
            new_label = marker(h)
            switched = new_label != label
            label = new_label
        trace.append(TraceEntry(it, float(f), float(np.max(np.abs(grad_new))), float(alpha), switched))

        # Polak-Ribiere+ with periodic restarts
        since_restart += 1
        beta = float(grad_new @ (grad_new - grad)) / float(grad @ grad)
        if beta < 0 or since_restart >= cfg.restart_period:
            beta = 0.0
            since_restart = 0
        d = -grad_new + beta * d
        grad = grad_new
        alpha_prev, slope_prev = alpha, slope

        if f_old - f < cfg.tol * max(abs(f_old), 1e-300):
            status, reason = "converged", "relative decrease below tolerance"
            break
    log.info("CG finished: %s after %d iterations (%s)", status, trace[-1].iteration, reason)
    return OptimizationTrace(trace, _final(h), status, reason, n_evals[0])


def _final(h):
    try:
        return normalize_filter(h)
    except Ges2nError:
        h = np.asarray(h, dtype=np.float64)
        return FilterState(h=h, g=np.full_like(h, np.nan))


# --------------------------------------------------------------------------
# the filter design problem


@dataclass
class _Evaluation:
    key: bytes
    state: FilterState
    ses: SesResult
    value: object
    grad_h: np.ndarray | None = None


@dataclass
class Ges2nProblem:
    """``-ln psi`` and its gradient as a function of unconstrained coefficients ``h``."""

    x: np.ndarray
    omega: np.ndarray
    theta: np.ndarray
    fs: float
    variant: VariantConfig
    bands: BandSpec
    filter_length: int
    grid: CyclicGrid | None = None
    operator: VsDftOperator = field(init=False, repr=False)
    _last: _Evaluation | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.omega = np.asarray(self.omega, dtype=np.float64)
        self.theta = np.asarray(getattr(self.theta, "theta", self.theta), dtype=np.float64)
        self.l_y = filtered_length(len(self.x), self.filter_length)
        if self.l_y <= 0:
            raise Ges2nError("signal is too short for the requested filter length")
        if self.grid is None:
            self.grid = objective_grid(self.theta, self.l_y, self.bands)
        self.operator = VsDftOperator(self.omega, self.theta, self.fs, self.grid, self.l_y)
        self.weighting = build_weighting(self.variant, self.bands, self.grid)

    def ses(self, g) -> SesResult:
        y = fir_filter(self.x, g).y
        spectrum = self.operator.matvec(y * y)
        b = spectrum.real**2 + spectrum.imag**2
        return SesResult(b=b, grid=self.grid, spectrum=spectrum, digest=coefficient_digest(g))

    def _forward(self, h) -> _Evaluation:
        h = np.asarray(h, dtype=np.float64)
        key = h.tobytes()
        if self._last is not None and self._last.key == key:
            return self._last
        state = normalize_filter(h)
        ses = self.ses(state.g)
        val = evaluate_objective(ses.b, self.weighting)
        self._last = _Evaluation(key, state, ses, val)
        return self._last

    def objective(self, h):
        return self._forward(h).value

    def value(self, h) -> float:
        return -self._forward(h).value.log_psi

    def value_and_grad(self, h):
        ev = self._forward(h)
        if ev.grad_h is None:
            grad_g = grad_log_psi_wrt_g(
                self.x, ev.state.g, self.omega, self.theta, self.fs,
                ev.value.weighting, ev.ses, operator=self.operator,
            )
            ev.grad_h = -grad_log_psi_wrt_h(ev.state.h, grad_g)
        return -ev.value.log_psi, ev.grad_h

    def selection(self, h):
        if not self.weighting.data_dependent:
            return None
        return self._forward(h).value.weighting.selection()


def objective_grid(theta, l_y: int, bands: BandSpec, delta_alpha: float | None = None,
                   alpha_max: float | None = None) -> CyclicGrid:
    """Grid reaching ``(n_h + 1) alpha_c`` at the default revolution-count resolution."""
    if delta_alpha is None:
        delta_alpha = default_resolution(theta, l_y)
    if alpha_max is None:
        alpha_max = (bands.n_h + 1) * bands.alpha_c
    return build_grid(delta_alpha, alpha_max)


def minimize(x, omega, theta, fs, variant: VariantConfig, spec: BandSpec,
             cfg: OptimizerConfig = OptimizerConfig(), grid: CyclicGrid | None = None,
             h0=None) -> OptimizationTrace:
    problem = Ges2nProblem(x, omega, theta, fs, variant, spec, cfg.filter_length, grid)
    if h0 is None:
        h0 = initial_filter(problem.x, cfg)
    return conjugate_gradient(
        problem.value_and_grad,
        h0,
        cfg,
        value=problem.value,
        marker=problem.selection if problem.weighting.data_dependent else None,
    )
