import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from ncdk.configspace import Configuration
from ncdk.martingale import (CoefficientExpansion, MartingaleEvaluator, M_Ndelta0, closed_form_det, cpr_Q,
                             cpr_martingale_mc, cpr_reference, det_identity_check, fmp, itransform,
                             itransform_quad, multipoint_M, phi, phi_expand, weighted_multipoint)
from ncdk.transition import ProcessSpec, td_besq, td_bm

BM = ProcessSpec.bm()


def test_phi_is_lagrange_basis():
    cfg = Configuration.parse("-1,0.5,2")
    for k, v in enumerate(cfg.support):
        vals = phi(BM, cfg, v, np.array(cfg.support))
        assert np.allclose(vals, np.eye(3)[k])
    assert phi(BM, Configuration.parse("3.0"), 3.0, 1.7 + 2j) == 1.0
    assert phi(BM, Configuration.parse("-1,1"), 1.0, 0.0) == pytest.approx(0.5)


def test_circle_phi_is_lagrange_basis():
    spec = ProcessSpec.circle(1.0, 3)
    cfg = Configuration.parse("0.5,2,4", radius=1.0)
    for k, v in enumerate(cfg.support):
        assert np.allclose(phi(spec, cfg, v, np.array(cfg.support)), np.eye(3)[k], atol=1e-14)


@pytest.mark.parametrize("spec,text", [(BM, "-1.2,0,0.4,2"), (ProcessSpec.circle(1.5, 4), "0,1,3,7"),
                                       (ProcessSpec.circle(1.0, 3), "0,2,4")])
def test_expansion_reconstructs_phi(spec, text):
    radius = spec.radius if spec.kind == "CircleBM" else None
    cfg = Configuration.parse(text, radius=radius)
    z = np.random.default_rng(3).normal(size=20) + 1j * np.random.default_rng(4).normal(size=20)
    for v in cfg.support:
        f = phi_expand(spec, cfg, v)
        assert np.allclose(f(z), phi(spec, cfg, v, z), rtol=1e-12, atol=1e-12)


def test_fmp_hand_values():
    assert fmp(BM, 2, 0.5, 3.0) == pytest.approx(9 - 0.5)
    assert fmp(BM, 3, 2.0, 1.0) == pytest.approx(1 - 3 * 2 * 1)
    besq = ProcessSpec.besq(1.0)
    assert fmp(besq, 1, 0.25, 2.0) == pytest.approx(2 - 2 * 0.25 * 2)
    assert fmp(besq, 4, 0.0, 1.5) == pytest.approx(1.5**4)
    with pytest.raises(ValueError):
        fmp(besq, 1, 1.0, -1.0)


@pytest.mark.parametrize("n", [1, 3, 6])
def test_bm_polynomials_are_space_time_harmonic(n):
    # E[m_n(t, x + W_t)] = x^n, checked by Gauss-Hermite against mpmath's Hermite numbers
    t, x = 0.7, 0.9
    g, w = np.polynomial.hermite.hermgauss(60)
    y = x + math.sqrt(2 * t) * g
    assert np.sum(w * fmp(BM, n, t, y)) / math.sqrt(math.pi) == pytest.approx(x**n, rel=1e-11)
    ref = float(mp.mpf(t) ** (n / 2) * mp.hermite(n, mp.mpf(x) / mp.sqrt(2 * t)) / mp.mpf(2) ** (n / 2))
    assert fmp(BM, n, t, x) == pytest.approx(ref, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("nu", [0.0, 1.5])
@pytest.mark.parametrize("n", [1, 2, 4])
def test_besq_polynomials_are_space_time_harmonic(nu, n):
    spec = ProcessSpec.besq(nu)
    t, x = 0.3, 1.2
    val = integrate.quad(lambda y: fmp(spec, n, t, y) * td_besq(nu, t, y, x), 0, 40, limit=400)[0]
    assert val == pytest.approx(x**n, rel=1e-9)


def test_transform_hand_values():
    f = CoefficientExpansion("monomial", np.array([1.0, 0.0, 1.0]))
    assert itransform(BM, f, 0.4, 2.0) == pytest.approx(1 + 4 - 0.4)
    g = CoefficientExpansion("fourier", np.array([0.5, 0.0, 0.5]), radius=2.0)
    # cos(z / 2r) -> cos(x / 2r) exp(t / 8 r^2)
    assert itransform(ProcessSpec.circle(2.0, 2), g, 0.8, 1.0) == pytest.approx(math.cos(0.25) * math.exp(0.8 / 32))
    with pytest.raises(ValueError):
        itransform(BM, g, 0.8, 1.0)


@pytest.mark.parametrize("spec,text", [(BM, "-1,0.3,1.5"), (ProcessSpec.besq(0.5), "0.2,1,2.5"),
                                       (ProcessSpec.circle(1.0, 3), "0,2,4")])
def test_coefficient_and_quadrature_routes_agree(spec, text):
    radius = 1.0 if spec.kind == "CircleBM" else None
    cfg = Configuration.parse(text, radius=radius)
    for v in cfg.support:
        f = phi_expand(spec, cfg, v)
        for t, x in [(0.2, 0.5), (0.6, 1.7)]:
            a = itransform(spec, f, t, x)
            b = itransform_quad(spec, f, t, x)
            assert a == pytest.approx(b, rel=1e-9, abs=1e-10)


def test_bm_martingale_by_hand():
    ev = MartingaleEvaluator(BM, Configuration.parse("-1,1,2"))
    t, x = 0.3, 0.4
    # Phi^{-1}(z) = (z-1)(z-2)/6, and z^2 -> x^2 - t
    assert ev.M(-1.0, t, x) == pytest.approx(((x * x - t) - 3 * x + 2) / 6)
    assert ev.M(-1.0, 0.0, -1.0) == pytest.approx(1.0)


def test_martingales_sum_to_one():
    for spec, text in [(BM, "-2,-0.5,1,3"), (ProcessSpec.besq(0.0), "0,1,2"), (ProcessSpec.circle(1.0, 3), "0,2,4")]:
        radius = 1.0 if spec.kind == "CircleBM" else None
        ev = MartingaleEvaluator(spec, Configuration.parse(text, radius=radius))
        total = sum(ev.M_k(k, 0.7, 1.3) for k in range(ev.N))
        assert total == pytest.approx(1.0, abs=1e-11)


def test_determinant_closed_forms():
    cases = [(BM, "-1,0,2", [-0.5, 0.7, 1.9]), (ProcessSpec.besq(1.0), "0.5,1.5,3", [0.2, 1.0, 2.0]),
             (ProcessSpec.circle(1.0, 3), "0,2,4", [0.5, 2.5, 5.0])]
    for spec, text, y in cases:
        radius = 1.0 if spec.kind == "CircleBM" else None
        cfg = Configuration.parse(text, radius=radius)
        ev = MartingaleEvaluator(spec, cfg)
        a = ev.det(0.4, y)
        b = closed_form_det(ev.spec, cfg, 0.4, y)
        assert a == pytest.approx(b, rel=1e-10)


def test_determinant_batches():
    cfg = Configuration.parse("-1,0,2")
    ev = MartingaleEvaluator(BM, cfg)
    ys = np.array([[-0.5, 0.7, 1.9], [0.0, 1.0, 3.0]])
    assert np.allclose(ev.det(0.4, ys), closed_form_det(BM, cfg, 0.4, ys))


def test_identity_small_example():
    lhs, rhs = det_identity_check("rational", [0.0, 1.0], [-1.0, 1.0])
    assert lhs == pytest.approx(0.5) and rhs == pytest.approx(0.5)
    with pytest.raises(ValueError):
        det_identity_check("rational", [0.0, 1.0], [1.0, -1.0])


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10**6))
def test_identities_hold_for_random_points(n, seed):
    g = np.random.default_rng(seed)
    u = np.cumsum(g.uniform(0.5, 1.0, n))
    x = np.cumsum(g.uniform(0.5, 1.0, n)) - 1
    lhs, rhs = det_identity_check("rational", x, u)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)
    w = g.dirichlet(np.full(n + 1, 4.0)) * 2 * math.pi
    uc = np.cumsum(w[:-1])
    xc = uc + g.uniform(-0.1, 0.1)
    lhs, rhs = det_identity_check("trigonometric", xc, uc)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)


def test_multipoint_reduces_to_simple_martingale():
    cfg = Configuration.parse("-1,0.5,2")
    ev = MartingaleEvaluator(BM, cfg)
    s, x = 0.5, 0.2
    for k, v in enumerate(cfg.support):
        got = multipoint_M(ev, v, s, x, 0.9, 1.3)
        assert got == pytest.approx(ev.M_k(k, 0.9, 1.3), rel=1e-10)


def test_ndelta0_contour_matches_closed_series():
    for N in (2, 3, 5):
        ev = MartingaleEvaluator(BM, Configuration((0.0,), (N,)))
        for s, x, t, y in [(0.5, 0.3, 0.8, -0.4), (1.2, -1.0, 0.4, 0.9)]:
            a = multipoint_M(ev, 0.0, s, x, t, y)
            b = M_Ndelta0(BM, N, s, x, t, y)
            assert a == pytest.approx(b, rel=1e-9)


@pytest.mark.parametrize("spec", [BM, ProcessSpec.besq(0.5)])
def test_ndelta0_series_and_moment_form_agree(spec):
    from ncdk.martingale import _Ndelta0_moment_form
    for s, x, t, y in [(0.5, 0.3, 0.8, 0.4), (1.2, 1.0, 0.4, 0.9)]:
        a = M_Ndelta0(spec, 4, s, x, t, y)
        b = _Ndelta0_moment_form(spec, 4, s, x, t, y)
        assert a == pytest.approx(b, rel=1e-10)


def test_ndelta0_is_a_martingale_in_t_y():
    # integrating against the law of Y_t started from 0 leaves M((s,x)|(0,0)) = 1
    s, x, t = 0.6, 0.5, 0.4
    val = integrate.quad(lambda y: M_Ndelta0(BM, 3, s, x, t, y) * td_bm(t, y, 0.0), -12, 12)[0]
    assert val == pytest.approx(1.0, abs=1e-10)
    spec = ProcessSpec.besq(1.0)
    val = integrate.quad(lambda y: M_Ndelta0(spec, 3, s, x, t, y) * td_besq(1.0, t, y, 0.0), 0, 40)[0]
    assert val == pytest.approx(1.0, abs=1e-10)
    assert M_Ndelta0(BM, 1, s, x, t, 0.2) == pytest.approx(1.0)


def test_circle_multipoint_reduces_to_simple_martingale():
    spec = ProcessSpec.circle(1.0, 3)
    cfg = Configuration.parse("0.5,2,4", radius=1.0)
    ev = MartingaleEvaluator(spec, cfg)
    for k, v in enumerate(cfg.support):
        got = multipoint_M(ev, v, 0.3, 1.0, 0.7, 2.2)
        assert got == pytest.approx(ev.M_k(k, 0.7, 2.2), rel=1e-9)
    assert weighted_multipoint(ev, 2.0, 0.3, 1.0, 0.7, 2.2) == pytest.approx(
        spec.density(0.3, 1.0, 2.0) * ev.M(2.0, 0.7, 2.2), rel=1e-9)


def test_cpr_prefactor():
    assert cpr_Q(-1, 0.5, 1.0, 0.3) == 1
    assert cpr_Q(0, 0.5, 2.0, 0.0) == pytest.approx(1.0)
    assert cpr_Q(0, 0.5, 2.0, 1.0) == pytest.approx((2 + 1j) / 2)
    with pytest.raises(ValueError):
        cpr_Q(-2, 0.5, 1.0, 0.0)


def test_cpr_exact_cases():
    one = Configuration.parse("1.5")
    assert cpr_martingale_mc(-1, one, 0, 0.8, 1.0, 1000, 1) == (1.0, 0.0)
    cfg = Configuration.parse("0.5,1.5")
    mean, se = cpr_martingale_mc(1, cfg, 0, 0.0, 1.1, 1000, 1)
    assert se == 0 and mean == pytest.approx((1.1**2 - 1.5**2) / (0.25 - 2.25))
    with pytest.raises(ValueError):
        cpr_martingale_mc(1, cfg, 0, 0.4, 1.0, 10, 1)


def test_cpr_matches_besq_reference():
    cfg = Configuration.parse("0.5,1.5")
    ref = cpr_reference(0, cfg, 0, 0.3, 1.0)
    mean, se = cpr_martingale_mc(0, cfg, 0, 0.3, 1.0, 200000, 7)
    assert abs(mean - ref) < 4 * se
