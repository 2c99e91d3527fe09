"""Martingale functions and determinantal martingales.

For a configuration ``xi`` and a support point ``v``, ``Phi_xi^v`` is the
Lagrange-type entire function that is 1 at ``v`` and vanishes on the other
points; ``M_xi^v(t, x)`` is its image under the integral transform attached to
the elementary process. The production route expands ``Phi`` exactly in
monomials (line and half line) or Fourier modes (circle) and maps each basis
element to its known martingale. The quadrature routes exist as oracles.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate, special as _sp

from . import configspace, rng
from .configspace import Configuration
from .transition import BM, BESQ, CIRCLE, ProcessSpec, td_bm, td_besq, td_circle, itransform_kernel_qnu
from .specfun import hermite_functions, laguerre_functions

MONOMIAL = "monomial"
FOURIER = "fourier"
CONTOUR_NODES = 64
GAUSS_HERMITE_NODES = 128
IMAG_TOL = 1e-10


@dataclass(frozen=True)
class CoefficientExpansion:
    """Coefficients of ``Phi`` in ``z^n`` (n = 0..N-1) or ``exp(i n z / 2r)``
    (n = -(N-1)..N-1, stored in that order)."""

    basis: str
    coefficients: np.ndarray
    radius: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if self.basis == FOURIER and len(c) % 2 == 0:
            raise ValueError("Fourier expansions need an odd number of coefficients")
        if self.basis not in (MONOMIAL, FOURIER):
            raise ValueError(f"unknown basis {self.basis!r}")
        object.__setattr__(self, "coefficients", c)

    @property
    def degree(self):
        if self.basis == MONOMIAL:
            return len(self.coefficients) - 1
        return (len(self.coefficients) - 1) // 2

    def modes(self):
        d = self.degree
        return np.arange(-d, d + 1)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.basis == MONOMIAL:
            return np.polynomial.polynomial.polyval(z, self.coefficients)
        n = self.modes()
        return np.sum(self.coefficients * np.exp(1j * n * z[..., None] / (2 * self.radius)), axis=-1)


def _spec_for(spec, config):
    if spec.kind == CIRCLE and spec.particles != config.total:
        return spec.with_particles(config.total)
    return spec


def _support_index(config, v):
    for i, s in enumerate(config.support):
        if abs(s - v) <= configspace.MERGE_RTOL * max(1.0, abs(s), abs(v)):
            return i
    raise ValueError(f"{v!r} is not a support point of the configuration")


def _require_simple(config):
    if not config.is_simple():
        raise ValueError("configuration has multiple points; use multipoint_M")


def phi(spec, config, v, z):
    """``Phi_xi^v(z)``: Lagrange product over the other support points."""
    _require_simple(config)
    k = _support_index(config, v)
    v = config.support[k]
    others = [u for i, u in enumerate(config.support) if i != k]
    z = np.asarray(z, dtype=complex)
    out = np.ones(z.shape, dtype=complex)
    for u in others:
        if spec.kind == CIRCLE:
            r = spec.radius
            out = out * np.sin((z - u) / (2 * r)) / math.sin((v - u) / (2 * r))
        else:
            out = out * (z - u) / (v - u)
    return out if out.ndim else complex(out)


def phi_expand(spec, config, v):
    """Exact expansion of ``Phi_xi^v`` in the basis native to the process."""
    _require_simple(config)
    k = _support_index(config, v)
    v = config.support[k]
    others = [u for i, u in enumerate(config.support) if i != k]
    if spec.kind != CIRCLE:
        coef = np.array([1.0 + 0j])
        for u in others:
            # multiply by (z - u) / (v - u), ascending powers
            coef = np.convolve(coef, np.array([-u, 1.0]) / (v - u))
        return CoefficientExpansion(MONOMIAL, coef)
    r = spec.radius
    n = len(others)
    coef = np.array([1.0 + 0j])
    for u in others:
        s = 2j * math.sin((v - u) / (2 * r))
        # sin((z-u)/2r) / sin((v-u)/2r) = (e^{-iu/2r} w - e^{iu/2r} w^{-1}) / (2i sin)
        factor = np.array([-np.exp(1j * u / (2 * r)), 0.0, np.exp(-1j * u / (2 * r))]) / s
        coef = np.convolve(coef, factor)
    # coef[j] multiplies exp(i (j - n) z / 2r); pad to the full -(N-1)..N-1 range
    return CoefficientExpansion(FOURIER, coef, radius=r)


def fmp_table(spec, nmax, t, x):
    """Rows ``m_0 .. m_nmax`` of the fundamental martingale polynomials at ``(t, x)``.

    BM: ``m_{n+1} = x m_n - n t m_{n-1}`` (scaled Hermite).
    BESQ: ``m_{n+1} = (x - 2t(2n+nu+1)) m_n - 4 t^2 n (n+nu) m_{n-1}`` (scaled Laguerre).
    Both reduce to ``x^n`` at t = 0.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax == 0:
        return out
    if spec.kind == BESQ:
        nu = spec.nu
        out[1] = x - 2 * t * (nu + 1)
        for n in range(1, nmax):
            out[n + 1] = (x - 2 * t * (2 * n + nu + 1)) * out[n] - 4 * t * t * n * (n + nu) * out[n - 1]
    elif spec.kind == BM:
        out[1] = x
        for n in range(1, nmax):
            out[n + 1] = x * out[n] - n * t * out[n - 1]
    else:
        raise ValueError("polynomial martingales exist for BM and BESQ only")
    return out


def fmp(spec, n, t, x):
    """Fundamental martingale polynomial ``m_n(t, x)``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if spec.kind == BESQ and np.any(np.asarray(x) < 0):
        raise ValueError("BESQ martingales live on x >= 0")
    val = fmp_table(spec, n, t, x)[n]
    return float(val) if np.ndim(val) == 0 else val


def _fourier_martingale(modes, radius, t, x):
    """``G_{i n/2r}(t, x) = exp(i n x / 2r + n^2 t / 8 r^2)`` for each mode n."""
    x = np.asarray(x, dtype=float)
    n = np.asarray(modes, dtype=float)
    return np.exp(1j * n * x[..., None] / (2 * radius) + n * n * t / (8 * radius * radius))


def itransform(spec, f, t, x, check_imag=True):
    """Integral transform of an expansion, evaluated coefficient by coefficient."""
    if (spec.kind == CIRCLE) != (f.basis == FOURIER):
        raise ValueError("basis does not match the process")
    x = np.asarray(x, dtype=float)
    if f.basis == MONOMIAL:
        table = fmp_table(spec, f.degree, t, x)
        terms = f.coefficients.reshape((-1,) + (1,) * x.ndim) * table
        val = terms.sum(axis=0)
        scale = np.abs(terms).sum(axis=0)
    else:
        g = _fourier_martingale(f.modes(), f.radius, t, x)
        terms = f.coefficients * g
        val = terms.sum(axis=-1)
        scale = np.abs(terms).sum(axis=-1)
    if check_imag and np.any(np.abs(val.imag) > IMAG_TOL * np.maximum(1.0, scale)):
        raise ArithmeticError("integral transform left an imaginary residue")
    re = val.real
    return float(re) if re.ndim == 0 else re


def itransform_quad(spec, f, t, x):
    """Quadrature version of the transform, used only as an independent check.

    Line and circle: Gauss-Hermite in ``f(x + i y)`` against the centred
    Gaussian. Half line: adaptive quadrature of ``f(-w) q^(nu)(t, w | x)``.
    """
    if not t > 0:
        raise ValueError("the quadrature route needs t > 0")
    if spec.kind in (BM, CIRCLE):
        nodes, weights = np.polynomial.hermite.hermgauss(GAUSS_HERMITE_NODES)
        ytil = math.sqrt(2 * t) * nodes
        vals = np.asarray(f(x + 1j * ytil), dtype=complex)
        return float(np.real(np.sum(weights * vals)) / math.sqrt(math.pi))
    nu = spec.nu
    x = float(x)
    # exp((x - w)/2t) tail, with head-room for polynomial growth of f
    wmax = max(x, 0.0) + 2 * t * 80.0 + 40.0 * t
    def integrand(w):
        return float(np.real(f(-w))) * float(itransform_kernel_qnu(nu, t, w, x))
    val, _ = integrate.quad(integrand, 0.0, wmax, limit=2000, epsabs=1e-13, epsrel=1e-12)
    return float(val)


class MartingaleEvaluator:
    """Evaluates ``M_xi^v(t, x)`` for every support point ``v``.

    Built once per (process, configuration). For configurations with multiple
    points only the space-time form ``multipoint_M`` is available.
    """

    def __init__(self, spec, config):
        if isinstance(config, str):
            config = Configuration.parse(config, radius=spec.radius if spec.kind == CIRCLE else None)
        self.spec = _spec_for(spec, config)
        self.config = config
        if self.spec.kind == BESQ and config.support[0] < 0:
            raise ValueError("BESQ configurations live on [0, inf)")
        if config.is_simple():
            self.expansions = tuple(phi_expand(self.spec, config, v) for v in config.support)
        else:
            self.expansions = None

    @property
    def N(self):
        return self.config.total

    @property
    def simple(self):
        return self.expansions is not None

    def M(self, v, t, x):
        """``M_xi^v(t, x)`` with ``v`` given as a support position."""
        return self.M_k(_support_index(self.config, v), t, x)

    def M_k(self, k, t, x):
        """``M_xi^{u_k}(t, x)`` with ``k`` a 0-based support index."""
        if not self.simple:
            raise ValueError("configuration has multiple points; use multipoint_M")
        return itransform(self.spec, self.expansions[k], t, x)

    def matrix(self, t, y_vec):
        """``[M^{u_k}(t, y_j)]_{j,k}`` with rows indexed by the y's."""
        y = np.asarray(y_vec, dtype=float)
        return np.stack([np.asarray(self.M_k(k, t, y)) for k in range(self.N)], axis=-1)

    def det(self, t, y_vec):
        return det_martingale(self, t, y_vec)


def martingale_M(evaluator, v, t, x):
    return evaluator.M(v, t, x)


def det_martingale(evaluator, t, y_vec):
    """Determinantal martingale ``det_{j,k} M^{u_k}(t, y_j)`` (LU, partial pivoting).

    ``y_vec`` may carry leading batch dimensions: shape ``(..., N)``.
    """
    y = np.asarray(y_vec, dtype=float)
    if y.shape[-1] != evaluator.N:
        raise ValueError("need exactly N positions")
    mat = evaluator.matrix(t, y)
    d = np.linalg.det(mat)
    return float(d) if np.ndim(d) == 0 else d


def closed_form_det(spec, config, t, y_vec):
    """``h(y)/h(u)`` on the line/half line, ``h^r(t,y)/h^r(0,u)`` on the circle."""
    u = config.points()
    y = np.asarray(y_vec, dtype=float)
    if spec.kind == CIRCLE:
        n = len(u)
        r = spec.radius
        return configspace.h_r(r, t, y) / configspace.h_r(r, 0.0, u) if y.ndim == 1 else (
            math.exp(t * n * (n * n - 1) / (24.0 * r * r)) * _sine_products(r, y) / configspace.h_r(r, 0.0, u))
    if y.ndim == 1:
        return configspace.vandermonde(y) / configspace.vandermonde(u)
    return _vandermondes(y) / configspace.vandermonde(u)


def _vandermondes(y):
    n = y.shape[-1]
    out = np.ones(y.shape[:-1])
    for j in range(n):
        for k in range(j + 1, n):
            out = out * (y[..., k] - y[..., j])
    return out


def _sine_products(r, y):
    n = y.shape[-1]
    out = np.ones(y.shape[:-1])
    for j in range(n):
        for k in range(j + 1, n):
            out = out * np.sin((y[..., k] - y[..., j]) / (2 * r))
    return out


def det_identity_check(kind, x_vec, u_vec, r=1.0):
    """Both sides of the Lagrange-determinant identities.

    ``kind="rational"``: ``det[prod_{l!=k} (x_j-u_l)/(u_k-u_l)]`` vs ``h(x)/h(u)``.
    ``kind="trigonometric"``: the sine analogue vs ``prod_{j<k} sin((x_k-x_j)/2r)/sin((u_k-u_j)/2r)``.
    """
    x = np.asarray(x_vec, dtype=float)
    u = np.asarray(u_vec, dtype=float)
    n = len(u)
    if len(x) != n:
        raise ValueError("x and u must have the same length")
    if kind == "rational":
        if not configspace.in_weyl_chamber(u):
            raise ValueError("u must be strictly increasing")
        mat = np.ones((n, n))
        for k in range(n):
            for l in range(n):
                if l != k:
                    mat[:, k] *= (x - u[l]) / (u[k] - u[l])
        rhs = configspace.vandermonde(x) / configspace.vandermonde(u)
    elif kind == "trigonometric":
        if not configspace.in_alcove(r, u):
            raise ValueError("u must be ordered within one period")
        mat = np.ones((n, n))
        for k in range(n):
            for l in range(n):
                if l != k:
                    mat[:, k] *= np.sin((x - u[l]) / (2 * r)) / math.sin((u[k] - u[l]) / (2 * r))
        rhs = configspace.sine_product(r, x) / configspace.sine_product(r, u)
    else:
        raise ValueError(f"unknown identity kind {kind!r}")
    return float(np.linalg.det(mat)), float(rhs)


# ----------------------------------------------------------------------------
# configurations with multiple points

def _contour_radius(spec, config, v):
    gaps = [abs(u - v) for u in config.support if u != v]
    if spec.kind == CIRCLE:
        period = 2 * math.pi * spec.radius
        gaps = [min(abs(u - v) % period, period - abs(u - v) % period) for u in config.support if u != v]
        gaps.append(period)
    return 0.5 * min(gaps + [1.0])


def _contour_nodes(v, rho):
    theta = 2 * math.pi * np.arange(CONTOUR_NODES) / CONTOUR_NODES
    zeta = v + rho * np.exp(1j * theta)
    # (1/2 pi i) dzeta = (zeta - v) dtheta / 2 pi
    return zeta, (zeta - v) / CONTOUR_NODES


def _weighted_expansion(spec, config, v, s, x):
    """Expansion of ``p(s, x | v) Phi_xi^v((s, x); z)`` by contour quadrature.

    Working with ``p * Phi`` avoids dividing by a density that may underflow.
    """
    pts = config.points()
    zeta, w = _contour_nodes(v, _contour_radius(spec, config, v))
    n = len(pts)
    if spec.kind == BM:
        dens = np.exp(-(x - zeta) ** 2 / (2 * s)) / math.sqrt(2 * math.pi * s)
        g = dens / np.prod(zeta[:, None] - pts[None, :], axis=1)
        poly = np.polynomial.polynomial.polyfromroots(pts)  # ascending, monic
        coef = np.empty(n, dtype=complex)
        for j in range(n):
            e_j = np.zeros_like(zeta)
            for k in range(j + 1, n + 1):
                e_j = e_j + poly[k] * zeta ** (k - 1 - j)
            coef[j] = np.sum(w * g * e_j)
        return CoefficientExpansion(MONOMIAL, coef)
    if spec.kind == CIRCLE:
        r = spec.radius
        dens = td_circle(spec, s, x, zeta)
        g = dens / np.prod(np.sin((zeta[:, None] - pts[None, :]) / (2 * r)), axis=1)
        # prod_l sin((z-u_l)/2r) = w^{-N} P(w^2) with w = exp(iz/2r)
        poly = np.array([1.0 + 0j])
        for u in pts:
            poly = np.convolve(poly, np.array([-np.exp(1j * u / (2 * r)), np.exp(-1j * u / (2 * r))]) / 2j)
        om = np.exp(1j * zeta / (2 * r))
        coef = np.zeros(2 * n - 1, dtype=complex)
        for j in range(n):
            e_j = np.zeros_like(zeta)
            for k in range(j + 1, n + 1):
                e_j = e_j + poly[k] * om ** (2 * (k - 1 - j))
            # mode 2j+1-N sits at index (2j+1-N) + (N-1) = 2j
            coef[2 * j] = np.sum(w * g * (1j * om / r) * e_j)
        return CoefficientExpansion(FOURIER, coef, radius=r)
    raise ValueError("contour route is implemented for BM and the circle only")


def multipoint_M(evaluator, v, s, x, t, y):
    """``M_xi^v((s, x) | (t, y))`` for a configuration that may have multiple points.

    Line and circle: residue at ``v`` by a 64-node trapezoid contour, then the
    coefficient-route transform in ``z``. Half line: only ``xi = N delta_0``.
    """
    if not s > 0:
        raise ValueError("s must be positive")
    spec, config = evaluator.spec, evaluator.config
    k = _support_index(config, v)
    v = config.support[k]
    if spec.kind == BESQ:
        if len(config.support) != 1 or v != 0.0:
            raise ValueError("multiple-point martingales on the half line are only available for N delta_0")
        return M_Ndelta0(spec, config.total, s, x, t, y)
    if config.total == 1:
        return np.ones(np.shape(y)) if np.ndim(y) else 1.0
    pm = itransform(spec, _weighted_expansion(spec, config, v, s, x), t, y, check_imag=False)
    dens = float(np.real(spec.density(s, x, v))) if spec.kind == CIRCLE else td_bm(s, x, v)
    return pm / dens


def weighted_multipoint(evaluator, v, s, x, t, y):
    """``p(s, x | v) M_xi^v((s, x) | (t, y))``, the summand of the kernel."""
    spec, config = evaluator.spec, evaluator.config
    k = _support_index(config, v)
    v = config.support[k]
    if spec.kind == BESQ:
        return td_besq(spec.nu, s, x, v) * M_Ndelta0(spec, config.total, s, x, t, y) if (
            len(config.support) == 1 and v == 0.0) else _raise_besq()
    return itransform(spec, _weighted_expansion(spec, config, v, s, x), t, y, check_imag=False)


def _raise_besq():
    raise ValueError("multiple-point martingales on the half line are only available for N delta_0")


def M_Ndelta0(spec, N, s, x, t, y):
    """Closed series for ``xi = N delta_0`` (Hermite functions for BM,
    Laguerre functions for BESQ)."""
    if not s > 0:
        raise ValueError("s must be positive")
    if t < 0:
        raise ValueError("t must be nonnegative")
    y = np.asarray(y, dtype=float)
    if spec.kind == BM:
        if t == 0:
            return _Ndelta0_moment_form(spec, N, s, x, t, y)
        a = x / math.sqrt(2 * s)
        b = y / math.sqrt(2 * t)
        fa = hermite_functions(N - 1, a)[:, 0]
        fb = hermite_functions(N - 1, b).reshape((N,) + np.shape(y))
        w = (t / s) ** (np.arange(N) / 2.0)
        ser = np.tensordot(w * fa, fb, axes=(0, 0))
        val = math.sqrt(math.pi) * np.exp(x * x / (4 * s) + y * y / (4 * t)) * ser
    elif spec.kind == BESQ:
        nu = spec.nu
        if x < 0 or np.any(y < 0):
            raise ValueError("BESQ martingales live on x, y >= 0")
        if t == 0 or x == 0 or np.any(y == 0):
            return _Ndelta0_moment_form(spec, N, s, x, t, y)
        a = x / (2 * s)
        b = y / (2 * t)
        fa = laguerre_functions(N - 1, nu, a)[:, 0]
        fb = laguerre_functions(N - 1, nu, b).reshape((N,) + np.shape(y))
        w = (t / s) ** np.arange(N)
        ser = np.tensordot(w * fa, fb, axes=(0, 0))
        val = (_sp.gamma(nu + 1) * a ** (-nu / 2) * b ** (-nu / 2)
               * np.exp(a / 2 + b / 2) * ser)
    else:
        raise ValueError("N delta_0 closed series exists for BM and BESQ only")
    return float(val) if np.ndim(val) == 0 else val


def _Ndelta0_moment_form(spec, N, s, x, t, y):
    """Same martingale written with the polynomials ``m_n`` directly."""
    ms = fmp_table(spec, N - 1, s, float(x))
    mt = fmp_table(spec, N - 1, t, y)
    n = np.arange(N)
    if spec.kind == BM:
        w = 1.0 / (_sp.factorial(n) * float(s) ** n)
    else:
        nu = spec.nu
        w = _sp.gamma(nu + 1) / (_sp.factorial(n) * _sp.gamma(n + nu + 1) * (2 * s) ** (2 * n))
    val = np.tensordot(w * ms, mt, axes=(0, 0))
    return float(val) if np.ndim(val) == 0 else val


# ----------------------------------------------------------------------------
# complex-process representation for BES(n + 1/2)

def cpr_Q(n, t, x, y):
    """Prefactor ``Q_t^{(n+1/2)}(x + i y)`` of the complex-process representation."""
    if n < -1:
        raise ValueError("n must be >= -1")
    y = np.asarray(y, dtype=float)
    if n == -1 or t == 0:
        out = np.ones(y.shape, dtype=complex)
        return out if out.ndim else complex(out)
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x > 0:
        z = x + 1j * y
        k = np.arange(n + 1)
        c = _sp.factorial(2 * n - k) / (_sp.factorial(n - k) * _sp.factorial(k))
        inner = np.sum(c * (2 * x * z[..., None] / t) ** k, axis=-1)
        out = (t / 2) ** n * z / x ** (2 * n + 1) * inner
    else:
        pref = math.sqrt(math.pi) / (2 ** (n + 1) * t ** (n + 1) * _sp.gamma(n + 1.5))
        out = pref * np.sign(y) ** n * y ** (n + 2) + 0j
    return out if np.ndim(out) else complex(out)


def cpr_phi_hat(config, k, z):
    """``prod_{l != k} (z^2 - u_l^2) / (u_k^2 - u_l^2)``."""
    u = np.asarray(config.support, dtype=float)
    z = np.asarray(z, dtype=complex)
    out = np.ones(z.shape, dtype=complex)
    for l in range(len(u)):
        if l != k:
            out = out * (z * z - u[l] ** 2) / (u[k] ** 2 - u[l] ** 2)
    return out


def cpr_reference(n, config, k, t, x):
    """Deterministic value: the BESQ(n+1/2) martingale at ``x^2`` for squared support."""
    sq = Configuration(tuple(u * u for u in config.support), config.multiplicities)
    ev = MartingaleEvaluator(ProcessSpec.besq(n + 0.5), sq)
    return ev.M_k(k, t, x * x)


def cpr_martingale_mc(n, config, k, t, x, samples, seed):
    """Monte Carlo estimate of ``E[Q_t(x + i Y) Phi_hat(x + i Y)]`` with ``Y ~ N(0, t)``.

    Returns ``(mean, stderr)``.
    """
    if samples < 100:
        raise ValueError("need at least 100 samples")
    if not config.is_simple() or config.support[0] < 0:
        raise ValueError("need a simple configuration on [0, inf)")
    if t == 0:
        return float(np.real(cpr_phi_hat(config, k, x))), 0.0
    ytil = rng.normal_array(seed, np.arange(samples), 0, 0) * math.sqrt(t)
    vals = np.real(cpr_Q(n, t, x, ytil) * cpr_phi_hat(config, k, x + 1j * ytil))
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples))
