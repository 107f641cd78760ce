"""Deterministic variable-speed gearbox surrogate with known fault content.

The vibration is a sum of four parts:

* fault bursts: windowed damped sinusoids ringing at ``fault_carrier_hz``,
  ``fault_burst_rate`` per revolution on average at uniformly random shaft
  angles, with Gaussian amplitudes scaled by the angle-locked envelope
  ``exp(fault_concentration * (cos(fault_order * angle) - 1))``; the squared
  envelope has lines at every fault harmonic, decaying with harmonic number,
  and no line at the burst rate,
* extraneous bursts of the same shape at ``extraneous_carrier_hz``, one per
  ``1 / extraneous_order`` revolution,
* stationary Gaussian masking noise confined to ``masking_band_hz``,
  standing in for the high-energy healthy content that hides weak faults,
* white Gaussian noise.

Extraneous burst ``k`` starts where the shaft angle crosses
``2 pi k / extraneous_order``, so its spacing in time follows the speed
profile.  Burst onsets snap to the nearest sample.
Noise comes from numpy's PCG64 generator seeded with ``seed``.

Power levels are in dB.  ``noise_db`` and ``masking_db`` are relative to
unit power; the fault's and the extraneous component's ``*_snr_db`` is its mean
power relative to the nominal background (white plus masking noise, or unit
power when both are off).  Those two are scaled to their nominal power
exactly; the realised noise powers differ from nominal by sampling error only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .io import dataclass_from_strings
from .signal_model import VibrationRecord, integrate_angle


@dataclass(frozen=True)
class SynthConfig:
    fs: float = 25600.0
    duration: float = 1.0
    # "constant:W", "ramp:W0,W1" or "piecewise:t0:w0,t1:w1,..." in rad/s
    speed_profile: str = "ramp:100,130"
    fault_order: float = 1.0
    fault_carrier_hz: float = 600.0
    fault_burst_rate: float = 100.0
    fault_snr_db: float = -24.0
    fault_concentration: float = 2.0
    extraneous_order: float = 5.72
    extraneous_carrier_hz: float = 10000.0
    extraneous_snr_db: float = 0.0
    noise_db: float = -15.0
    masking_db: float = 0.0
    # "lo,hi" in Hz
    masking_band_hz: str = "1500,12000"
    burst_ms: float = 2.0
    # decay time constant as a fraction of the burst window
    decay_fraction: float = 0.5
    seed: int = 4

    def __post_init__(self):
        if not self.fs > 0 or not self.duration > 0:
            raise ConfigError("fs and duration must be positive")
        nyq = self.fs / 2
        for name in ("fault_carrier_hz", "extraneous_carrier_hz"):
            if not 0 < getattr(self, name) < nyq:
                raise ConfigError(f"{name} must lie in (0, fs/2)")
        for name in ("fault_order", "extraneous_order", "fault_burst_rate"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        lo, hi = self.masking_band
        if not 0 <= lo < hi <= nyq:
            raise ConfigError("masking_band_hz must satisfy 0 <= lo < hi <= fs/2")
        if self.fault_concentration < 0:
            raise ConfigError("fault_concentration must be non-negative")
        if not self.burst_ms > 0 or not self.decay_fraction > 0:
            raise ConfigError("burst_ms and decay_fraction must be positive")
        parse_speed_profile(self.speed_profile)

    @property
    def masking_band(self):
        try:
            lo, hi = (float(v) for v in str(self.masking_band_hz).split(","))
        except ValueError as exc:
            raise ConfigError(f"bad masking_band_hz {self.masking_band_hz!r}") from exc
        return lo, hi

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.fs))

    def check_filter_length(self, filter_length: int):
        if self.n_samples < 4 * filter_length:
            raise ConfigError(
                f"{self.n_samples} samples are too few for a filter of length {filter_length}"
            )

    @classmethod
    def from_mapping(cls, values: dict) -> "SynthConfig":
        return dataclass_from_strings(cls, values, "synth")


@dataclass(frozen=True)
class SynthOutput:
    record: VibrationRecord
    truth: dict
    components: dict = field(repr=False)


def parse_speed_profile(text: str):
    kind, _, args = text.partition(":")
    try:
        if kind == "constant":
            w = float(args)
            knots = [(0.0, w)]
        elif kind == "ramp":
            w0, w1 = (float(v) for v in args.split(","))
            knots = [(0.0, w0), (1.0, w1)]
        elif kind == "piecewise":
            knots = []
            for item in args.split(","):
                t, w = item.split(":")
                knots.append((float(t), float(w)))
            if any(b[0] <= a[0] for a, b in zip(knots, knots[1:])):
                raise ConfigError("piecewise knot times must increase")
        else:
            raise ConfigError(f"unknown speed profile {text!r}")
    except ValueError as exc:
        raise ConfigError(f"cannot parse speed profile {text!r}") from exc
    if not knots or any(w <= 0 for _, w in knots):
        raise ConfigError("speeds must be positive")
    return kind, knots


def speed_curve(cfg: SynthConfig, t) -> np.ndarray:
    kind, knots = parse_speed_profile(cfg.speed_profile)
    t = np.asarray(t, dtype=np.float64)
    if kind == "constant":
        return np.full_like(t, knots[0][1])
    if kind == "ramp":
        frac = t / t[-1] if t[-1] > 0 else np.zeros_like(t)
        return knots[0][1] + (knots[1][1] - knots[0][1]) * frac
    times, speeds = zip(*knots)
    return np.interp(t, times, speeds)


def _burst_shape(cfg: SynthConfig, carrier: float) -> np.ndarray:
    width = cfg.burst_ms * 1e-3
    lag = np.arange(int(math.ceil(width * cfg.fs))) / cfg.fs
    lag = lag[lag < width]
    window = np.sin(np.pi * lag / width) ** 2
    return window * np.exp(-lag / (width * cfg.decay_fraction)) * np.sin(2 * np.pi * carrier * lag)


def _burst_train(theta, angles, amplitudes, shape, fs) -> np.ndarray:
    # snapping onsets to samples makes every burst the same discrete waveform
    n = len(theta)
    t = np.arange(n) / fs
    starts = np.rint(np.interp(angles, theta, t) * fs).astype(np.int64)
    keep = starts < n
    impulses = np.zeros(n)
    np.add.at(impulses, starts[keep], np.asarray(amplitudes, dtype=np.float64)[keep])
    return np.convolve(impulses, shape)[:n]


def _scaled(component, power):
    current = float(np.mean(component**2))
    if power == 0 or current == 0:
        return np.zeros_like(component)
    return component * math.sqrt(power / current)


def _band_noise(white, fs, lo, hi):
    spec = np.fft.rfft(white)
    freq = np.fft.rfftfreq(len(white), 1.0 / fs)
    spec[(freq < lo) | (freq > hi)] = 0.0
    return np.fft.irfft(spec, len(white))


def _db_to_power(db: float) -> float:
    return 0.0 if db == -math.inf else 10.0 ** (db / 10.0)


def generate(cfg: SynthConfig) -> SynthOutput:
    n = cfg.n_samples
    if n < 2:
        raise ConfigError("duration * fs must give at least two samples")
    t = np.arange(n) / cfg.fs
    omega = speed_curve(cfg, t)
    record0 = VibrationRecord(np.zeros(n), cfg.fs, omega)
    theta = integrate_angle(record0).theta

    noise_power = _db_to_power(cfg.noise_db)
    masking_power = _db_to_power(cfg.masking_db)
    background = noise_power + masking_power
    reference = background if background > 0 else 1.0
    rng = np.random.default_rng(np.random.PCG64(cfg.seed))
    span = float(theta[-1])

    n_fault = int(round(cfg.fault_burst_rate * span / (2 * math.pi)))
    phi = np.sort(rng.uniform(0.0, span, n_fault))
    amp = rng.standard_normal(n_fault)
    amp *= np.exp(cfg.fault_concentration * (np.cos(cfg.fault_order * phi) - 1.0))
    fault = _scaled(
        _burst_train(theta, phi, amp, _burst_shape(cfg, cfg.fault_carrier_hz), cfg.fs),
        reference * _db_to_power(cfg.fault_snr_db),
    )
    n_extra = int(math.floor(span * cfg.extraneous_order / (2 * math.pi)))
    phi = 2 * math.pi * np.arange(1, n_extra + 1) / cfg.extraneous_order
    extraneous = _scaled(
        _burst_train(theta, phi, np.ones(n_extra), _burst_shape(cfg, cfg.extraneous_carrier_hz), cfg.fs),
        reference * _db_to_power(cfg.extraneous_snr_db),
    )
    noise = math.sqrt(noise_power) * rng.standard_normal(n)
    masking = _band_noise(rng.standard_normal(n), cfg.fs, *cfg.masking_band)
    masking *= math.sqrt(masking_power / np.mean(masking**2)) if masking_power else 0.0
    x = fault + extraneous + masking + noise
    truth = {"fault_order": cfg.fault_order, "extraneous_order": cfg.extraneous_order}
    components = {"fault": fault, "extraneous": extraneous, "masking": masking, "noise": noise}
    return SynthOutput(VibrationRecord(x, cfg.fs, omega), truth, components)


# --------------------------------------------------------------------------
# reference scenarios used by the benchmark scripts and acceptance tests


def weak_fault_scenario(seed: int = 4) -> SynthConfig:
    """A -24 dB fault at 600 Hz below broadband masking noise, no extraneous source.

    About eighteen revolutions are recorded, so the default order resolution
    is near 0.055 and each 0.1-wide band holds one or two bins.
    """
    return replace(SynthConfig(seed=seed), extraneous_snr_db=-math.inf)


def extraneous_scenario(seed: int = 4) -> SynthConfig:
    """A dominant angle-locked extraneous component over a weak fault."""
    return replace(SynthConfig(seed=seed), extraneous_snr_db=12.0)


def narrowband_scenario(seed: int = 4) -> SynthConfig:
    """Lightly damped resonances with the extraneous source present.

    Twenty-millisecond bursts ring in a band a few tens of hertz wide, which
    short filters cannot isolate.
    """
    return replace(SynthConfig(seed=seed), burst_ms=20.0, decay_fraction=0.25)


SCENARIOS = {
    "weak-fault": weak_fault_scenario,
    "extraneous": extraneous_scenario,
    "narrowband": narrowband_scenario,
}


def scenario(name: str, seed: int | None = None) -> SynthConfig:
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    return SCENARIOS[name]() if seed is None else SCENARIOS[name](seed)
