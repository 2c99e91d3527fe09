"""Acceptance suite: one test per criterion, each at its stated tolerance and time budget.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import math
import time

import numpy as np
import pytest

from ncdk import harness as H
from ncdk.kernel import eq_circle_kernel

pytestmark = pytest.mark.slow


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def assert_all(reports, budget, elapsed):
    lines = [f"{r.check}: estimate={r.estimate:.3e} threshold={r.threshold:.3e} pass={r.passed}" for r in reports]
    print("\n".join(lines) + f"\nelapsed {elapsed:.1f}s (budget {budget}s)")
    assert all(r.passed for r in reports), "\n".join(lines)
    assert elapsed < budget


def test_criterion_01_determinant_identities():
    reps, dt = timed(H.check_det_identities)
    assert_all(reps, 5, dt)


def test_criterion_02_integral_transform():
    reps, dt = timed(H.check_itransform)
    assert_all(reps, 30, dt)


def test_criterion_03_martingale_property():
    reps, dt = timed(H.check_martingale_quadrature)
    assert_all(reps, 120, dt)


def test_criterion_04_closed_form_determinants():
    reps, dt = timed(H.check_closed_forms)
    assert_all(reps, 30, dt)


def test_criterion_05_circle_dual_series():
    reps, dt = timed(H.check_circle_td)
    assert_all(reps, 10, dt)


def test_criterion_06_kernel_trace():
    reps, dt = timed(H.check_trace)
    assert len(reps) == 6
    assert_all(reps, 120, dt)


def test_criterion_07_dmr_monte_carlo():
    reps, dt = timed(H.check_dmr, seed=7)
    assert [r.params["samples"] for r in reps] == [200000] * 4
    assert_all(reps, 1200, dt)


def test_criterion_08_fredholm_identity():
    reps, dt = timed(H.check_fredholm, seed=3)
    assert_all(reps, 600, dt)


def test_criterion_09_relaxation():
    t0 = time.perf_counter()
    reps = H.check_relaxation()
    # the equal-time equilibrium kernel against the CUE sine ratio
    worst = 0.0
    for r, N in ((1.0, 3), (1.0, 4), (2.0, 5)):
        for dx in np.linspace(0.05, 4 * math.pi * r - 0.05, 96):  # avoids the removable point dx = 2 pi r
            u = dx / (2 * r)
            ref = math.sin(N * u) / math.sin(u) / (2 * math.pi * r)
            worst = max(worst, abs(eq_circle_kernel(r, N, 0.0, dx) - ref), abs(float(H._eq_G(r, N, 0.0, dx)) - ref))
    reps.append(H.ValidationReport("relaxation/cue-ratio", worst, 0.0, 0.0, 1e-13, worst < 1e-13))
    assert_all(reps, 60, time.perf_counter() - t0)


def test_criterion_10_sine_limit():
    reps, dt = timed(H.check_sine_limit)
    assert_all(reps, 60, dt)


def test_criterion_11_complex_process_representation():
    reps, dt = timed(H.check_cpr, seed=11)
    assert len(reps) == 3
    assert_all(reps, 120, dt)
