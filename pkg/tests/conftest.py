import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ges2n import VibrationRecord

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# acceptance results collected by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def ramp_record(n=2048, fs=2048.0, rev_per_s=(12.0, 16.0), seed=0, x=None):
    """White-noise record under a linear speed ramp given in revolutions per second."""
    rng = np.random.default_rng(seed)
    w0, w1 = (2 * math.pi * r for r in rev_per_s)
    omega = np.linspace(w0, w1, n)
    if x is None:
        x = rng.standard_normal(n)
    return VibrationRecord(x, fs, omega)


@pytest.fixture
def small_record():
    return ramp_record()


def make_problem(variant="GES2N-Mean-Np", seed=0, n=2048, filter_length=16, n_h=3, alpha_c=1.0,
                 band_width=0.3, x=None):
    """A small filter design problem on a white-noise ramp record."""
    from ges2n import BandSpec, Ges2nProblem, integrate_angle, variant_config

    rec = ramp_record(n=n, fs=float(n), seed=seed, x=x)
    theta = integrate_angle(rec).theta
    return Ges2nProblem(rec.x, rec.omega, theta, rec.fs, variant_config(variant, alpha_c, n_h),
                        BandSpec(alpha_c, n_h, band_width), filter_length)


def band_gap(problem, h):
    """Smallest relative gap between the top two amplitudes of any numerator band."""
    from ges2n import normalize_filter

    b = problem.ses(normalize_filter(h).g).b
    gaps = []
    for idx in problem.weighting.c_s_base.indices:
        top = np.sort(b[idx])[::-1]
        gaps.append((top[0] - top[1]) / top[0] if len(top) > 1 else 1.0)
    return min(gaps)
