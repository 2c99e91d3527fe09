import io
import math

import mpmath as mp
import numpy as np
import pytest
from scipy import special

from ncdk.configspace import Configuration, equidistant_config
from ncdk.kernel import (CorrelationKernel, corr_function, eq_circle_kernel, extended_hermite, extended_laguerre,
                         extended_sine, fredholm_det, hermite_gauge, kernel_trace, laguerre_gauge,
                         relaxation_G, relaxation_G_grid, relaxation_kernel, write_correlation_csv,
                         write_kernel_csv)
from ncdk.specfun import hermite_functions, laguerre_functions
from ncdk.transition import ProcessSpec, td_besq, td_bm, td_circle

BM = ProcessSpec.bm()


def mehler(q, a, b):
    return math.exp(-((1 + q * q) * (a * a + b * b) - 4 * q * a * b) / (2 * (1 - q * q))) / math.sqrt(
        math.pi * (1 - q * q))


def hille_hardy(nu, q, a, b):
    # sum_n q^n phi_n(a) phi_n(b) for the normalised Laguerre functions
    z = 2 * math.sqrt(a * b * q) / (1 - q)
    return (math.exp(-(a + b) / 2 * (1 + q) / (1 - q)) * q ** (-nu / 2) * special.iv(nu, z) / (1 - q))


def test_single_particle_kernel_is_the_transition_density():
    K = CorrelationKernel(BM, Configuration.parse("0.4"))
    assert K(0.5, 1.0, 0.9, -0.3) == pytest.approx(td_bm(0.5, 1.0, 0.4))
    assert K(0.9, 1.0, 0.5, -0.3) == pytest.approx(td_bm(0.9, 1.0, 0.4) - td_bm(0.4, 1.0, -0.3))


@pytest.mark.parametrize("N", [1, 2, 5])
def test_hermite_tail_against_mehler(N):
    s, x, t, y = 0.9, 0.4, 0.5, -0.3
    a, b, q = x / math.sqrt(2 * s), y / math.sqrt(2 * t), math.sqrt(t / s)
    head = np.sum(q ** np.arange(N) * hermite_functions(N - 1, a)[:, 0] * hermite_functions(N - 1, b)[:, 0])
    ref = (head - mehler(q, a, b)) / math.sqrt(2 * s)
    assert extended_hermite(N, s, x, t, y) == pytest.approx(ref, rel=1e-11, abs=1e-14)


@pytest.mark.parametrize("nu", [0.0, 0.5, 2.0])
def test_laguerre_tail_against_hille_hardy(nu):
    N, s, x, t, y = 3, 0.8, 0.7, 0.3, 1.1
    a, b, q = x / (2 * s), y / (2 * t), t / s
    head = np.sum(q ** np.arange(N) * laguerre_functions(N - 1, nu, a)[:, 0] * laguerre_functions(N - 1, nu, b)[:, 0])
    ref = (head - hille_hardy(nu, q, a, b)) / (2 * s)
    assert extended_laguerre(nu, N, s, x, t, y) == pytest.approx(ref, rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("s,t", [(0.5, 0.8), (0.8, 0.5), (0.6, 0.6)])
def test_gauge_equivalence_with_general_kernel(s, t):
    K = CorrelationKernel(BM, Configuration((0.0,), (4,)))
    for x, y in [(0.3, -0.2), (1.1, 0.7)]:
        assert K(s, x, t, y) == pytest.approx(hermite_gauge(s, x, t, y) * extended_hermite(4, s, x, t, y), rel=1e-9)
    nu = 0.5
    K = CorrelationKernel(ProcessSpec.besq(nu), Configuration((0.0,), (3,)))
    for x, y in [(0.3, 0.2), (1.1, 1.7)]:
        assert K(s, x, t, y) == pytest.approx(
            laguerre_gauge(nu, s, x, t, y) * extended_laguerre(nu, 3, s, x, t, y), rel=1e-9)


def test_hermite_density_is_the_gue_profile():
    # rho_1 for N delta_0 at t: sum_n phi_n(x/sqrt(2t))^2 / sqrt(2t), the GUE one-point function
    N, t, x = 3, 0.5, 0.7
    K = CorrelationKernel(BM, Configuration((0.0,), (N,)))
    a = mp.mpf(x) / mp.sqrt(2 * t)
    ref = sum((mp.hermite(n, a) * mp.e ** (-a * a / 2)) ** 2 / (mp.sqrt(mp.pi) * 2**n * mp.factorial(n))
              for n in range(N)) / mp.sqrt(2 * t)
    assert K.density(t, x) == pytest.approx(float(ref), rel=1e-10)


@pytest.mark.parametrize("spec,cfg,t", [
    (BM, Configuration.parse("-1,0,1"), 0.5),
    (BM, Configuration((0.0, 1.0), (2, 1)), 0.4),
    (ProcessSpec.besq(0.5), Configuration.parse("1,2"), 0.2),
    (ProcessSpec.circle(1.0, 3), equidistant_config(1.0, 3), 0.3),
    (ProcessSpec.circle(1.0, 2), Configuration.parse("0.5,2", radius=1.0), 0.3),
])
def test_trace_is_particle_number(spec, cfg, t):
    assert kernel_trace(CorrelationKernel(spec, cfg), t) == pytest.approx(cfg.total, abs=1e-6)


def test_entrance_law_continuity():
    # a double point is the limit of two nearby simple points
    eps = 1e-3
    K2 = CorrelationKernel(BM, Configuration((0.0,), (2,)))
    Ke = CorrelationKernel(BM, Configuration.parse(f"{-eps},{eps}"))
    for x, y in [(0.3, -0.2), (-0.8, 0.5)]:
        assert K2(0.4, x, 0.6, y) == pytest.approx(Ke(0.4, x, 0.6, y), abs=1e-4)


def test_density_nonnegative_and_two_point_correlation():
    K = CorrelationKernel(BM, Configuration.parse("-1,0,1"))
    xs = np.linspace(-3, 3, 31)
    assert np.all(K.density(0.5, xs) > -1e-10)
    rho2 = corr_function(K, [(0.5, 0.1), (0.5, 0.1)])
    assert abs(rho2) < 1e-12  # equal-time coincidence is forbidden
    rho2 = corr_function(K, [(0.5, -0.4), (0.5, 0.6)])
    assert 0 < rho2 < K.density(0.5, -0.4) * K.density(0.5, 0.6)
    assert corr_function(K, []) == 1.0


def test_constant_drift_shifts_the_picture():
    cfg = Configuration.parse("-1,0,1")
    K0 = CorrelationKernel(BM, cfg)
    Kb = CorrelationKernel(BM, cfg, drift=0.7)
    assert Kb(0.5, 0.2 + 0.35, 0.8, -0.1 + 0.56) == pytest.approx(K0(0.5, 0.2, 0.8, -0.1))
    with pytest.raises(ValueError):
        CorrelationKernel(ProcessSpec.besq(0.5), Configuration.parse("1,2"), drift=0.1)


def test_equidistant_start_agrees_with_relaxation_series():
    r, N = 1.0, 3
    K = CorrelationKernel(ProcessSpec.circle(r, N), equidistant_config(r, N))
    for s, x, t, y in [(0.3, 0.4, 0.5, 1.7), (0.6, 2.0, 0.2, 5.5), (0.4, 1.0, 0.4, 1.3)]:
        assert relaxation_kernel(r, N, s, x, t, y) == pytest.approx(K(s, x, t, y), rel=1e-9, abs=1e-12)


def test_relaxation_grid_matches_pointwise():
    xs = np.linspace(0, 6, 5)
    ys = np.linspace(0.3, 5, 4)
    g = relaxation_G_grid(1.0, 4, 0.3, xs, 0.5, ys)
    ref = np.array([[relaxation_G(1.0, 4, 0.3, x, 0.5, y) for y in ys] for x in xs])
    assert np.allclose(g, ref, atol=1e-13)


def test_relaxation_reaches_equilibrium():
    r, N = 1.0, 3
    s = 40.0
    for dt, dx in [(0.2, 0.5), (-0.3, 1.4)]:
        assert relaxation_kernel(r, N, s, 0.0, s + dt, dx) == pytest.approx(eq_circle_kernel(r, N, dt, dx), abs=1e-10)


def test_equilibrium_equal_time_kernel():
    r, N = 1.0, 5
    assert eq_circle_kernel(r, N, 0.0, 0.0) == pytest.approx(N / (2 * math.pi * r))
    u = 0.8
    assert eq_circle_kernel(r, N, 0.0, 2 * r * u) == pytest.approx(math.sin(N * u) / math.sin(u) / (2 * math.pi * r))
    assert eq_circle_kernel(r, N, 0.0, 1e-9) == pytest.approx(N / (2 * math.pi * r))


def test_extended_sine_closed_values():
    assert extended_sine(0.7, 0.0, 0.0) == 0.7
    assert extended_sine(1.0, 0.0, 0.5) == pytest.approx(math.sin(math.pi * 0.5) / (math.pi * 0.5))
    # dt > 0, dx = 0: int_0^rho exp(pi^2 v^2 dt / 2) dv
    ref = float(mp.quad(lambda v: mp.e ** (mp.pi**2 * v * v * 0.3 / 2), [0, 0.8]))
    assert extended_sine(0.8, 0.3, 0.0) == pytest.approx(ref, rel=1e-11)
    ref = -float(mp.quad(lambda v: mp.e ** (-mp.pi**2 * v * v * 0.4 / 2) * mp.cos(mp.pi * v * 0.6), [0.8, mp.inf]))
    assert extended_sine(0.8, -0.4, 0.6) == pytest.approx(ref, rel=1e-9, abs=1e-13)


def test_fredholm_trivial_and_rank_one():
    K = CorrelationKernel(BM, Configuration.parse("0.2"))
    zero = lambda x: np.zeros_like(x)
    assert fredholm_det(K, [0.5], [(zero, (-1.0, 1.0))]) == pytest.approx(1.0)
    chi = lambda x: -0.5 * np.ones_like(x)
    # one particle: Det = 1 + int chi(x) p(t, x | u) dx
    mass = 0.5 * (special.erf((1.0 - 0.2) / math.sqrt(0.8)) - special.erf((-0.5 - 0.2) / math.sqrt(0.8)))
    assert fredholm_det(K, [0.4], [(chi, (-0.5, 1.0))]) == pytest.approx(1 - 0.5 * mass, abs=1e-10)
    with pytest.raises(ValueError):
        fredholm_det(K, [0.4, 0.2], [(chi, (-0.5, 1.0))] * 2)


def test_fredholm_gap_probability_single_time():
    # chi = -1 on an interval that holds no mass gives 1; a whole line window gives P(no particle) ~ 0
    K = CorrelationKernel(BM, Configuration.parse("-1,1"))
    minus = lambda x: -np.ones_like(x)
    assert fredholm_det(K, [0.1], [(minus, (10.0, 11.0))]) == pytest.approx(1.0, abs=1e-12)
    assert fredholm_det(K, [0.1], [(minus, (-8.0, 8.0))], nodes_per_slice=64) == pytest.approx(0.0, abs=1e-8)


def test_csv_writers():
    buf = io.StringIO()
    write_kernel_csv(buf, [(0.5, 0.1, 0.6, 0.2, 1 / 3)], comment="demo")
    lines = buf.getvalue().splitlines()
    assert lines[0] == "# demo" and lines[1] == "s,x,t,y,K"
    assert float(lines[2].split(",")[-1]) == 1 / 3
    buf = io.StringIO()
    write_correlation_csv(buf, [(0.5, 0.1, 0.6, 0.2, 0.25)], 2)
    assert buf.getvalue().splitlines()[0] == "t1,x1,t2,x2,rho"
