"""Scalar special functions used by the densities and kernels.

Hermite and Laguerre polynomials (plus their normalised "function" versions)
are evaluated by three-term recurrences. Bessel and Gamma values come from
``scipy.special``. The Jacobi theta functions are summed directly, switching
to the imaginary transformation when ``Im tau < 1``.
"""

from dataclasses import dataclass
import cmath
import math

import numpy as np
from scipy import special as _sp

Q_SWITCH_IMTAU = 1.0  # |q| = exp(-pi Im tau) <= exp(-pi)
_TAIL = 1e-16
_UNDERFLOW = 1e-300
_LOG_UNDERFLOW = math.log(_UNDERFLOW)


def hermite(n, x):
    """Physicists' Hermite polynomial ``H_n(x)`` (broadcasts over ``x``)."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * x
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h if h.ndim else float(h)


def laguerre(n, nu, x):
    """Generalised Laguerre polynomial ``L_n^{(nu)}(x)``."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    if nu <= -1:
        raise ValueError("Laguerre index must exceed -1")
    x = np.asarray(x, dtype=float)
    l_prev = np.ones_like(x)
    if n == 0:
        return l_prev if l_prev.ndim else float(l_prev)
    l = nu + 1.0 - x
    for k in range(1, n):
        l_prev, l = l, ((2 * k + nu + 1.0 - x) * l - (k + nu) * l_prev) / (k + 1.0)
    return l if l.ndim else float(l)


def hermite_functions(nmax, x):
    """Rows ``phi_0 .. phi_nmax`` of orthonormal Hermite functions at ``x``.

    ``phi_n(x) = H_n(x) exp(-x^2/2) / sqrt(sqrt(pi) 2^n n!)`` computed by the
    normalised recurrence, which neither overflows nor underflows for large n.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if nmax >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, nmax):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1.0)) * out[n - 1]
    return out


def laguerre_functions(nmax, nu, x):
    """Rows of ``sqrt(n!/Gamma(n+nu+1)) x^{nu/2} L_n^{(nu)}(x) e^{-x/2}``, n <= nmax."""
    if nu <= -1:
        raise ValueError("Laguerre index must exceed -1")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x < 0):
        raise ValueError("Laguerre functions need x >= 0")
    out = np.empty((nmax + 1,) + x.shape)
    with np.errstate(divide="ignore"):
        logw = np.where(x > 0, 0.5 * nu * np.log(np.where(x > 0, x, 1.0)), 0.0) - 0.5 * x
    w0 = np.exp(logw - 0.5 * _sp.gammaln(nu + 1.0))
    if nu != 0:
        w0 = np.where(x > 0, w0, 0.0 if nu > 0 else np.inf)
    out[0] = w0
    if nmax >= 1:
        out[1] = (nu + 1.0 - x) * out[0] / np.sqrt(nu + 1.0)
    for n in range(1, nmax):
        a = np.sqrt((n + 1.0) / (n + nu + 1.0))
        b = np.sqrt((n + 1.0) * n / ((n + nu + 1.0) * (n + nu)))
        out[n + 1] = ((2 * n + nu + 1.0 - x) * out[n] * a - (n + nu) * out[n - 1] * b) / (n + 1.0)
    return out


def _check_bessel(nu, x):
    if nu <= -1:
        raise ValueError("Bessel index must exceed -1")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("Bessel functions are evaluated on x >= 0 only")
    return x


def _unwrap(v):
    return float(v) if np.ndim(v) == 0 else v


def bessel_j(nu, x):
    """Bessel function of the first kind ``J_nu(x)``, real ``x >= 0``."""
    x = _check_bessel(nu, x)
    return _unwrap(_sp.jv(nu, x))


def bessel_i(nu, x):
    """Modified Bessel function ``I_nu(x)``, real ``x >= 0``."""
    x = _check_bessel(nu, x)
    return _unwrap(_sp.iv(nu, x))


def bessel_ive(nu, x):
    """``I_nu(x) exp(-x)``, the overflow-safe form used by the BESQ density."""
    x = _check_bessel(nu, x)
    return _unwrap(_sp.ive(nu, x))


def gammafn(x):
    if np.any((np.asarray(x) <= 0) & (np.asarray(x) == np.floor(x))):
        raise ValueError("Gamma has poles at nonpositive integers")
    return _unwrap(_sp.gamma(x))


@dataclass(frozen=True)
class ThetaParams:
    v: complex
    tau: complex

    def __post_init__(self):
        if complex(self.tau).imag <= 0:
            raise ValueError("theta functions need Im(tau) > 0")


# (half-integer shift of the summation index, alternating sign, prefactor)
_THETA_FORMS = {
    0: (0.0, True, 1.0),
    1: (-0.5, True, 1j),
    2: (-0.5, False, 1.0),
    3: (0.0, False, 1.0),
}


def _theta_series(mu, v, tau):
    shift, alternating, pref = _THETA_FORMS[mu]
    v = complex(v)
    tau = complex(tau)
    centre = -v.imag / tau.imag
    n0 = int(round(centre - shift))

    def term(n):
        m = n + shift
        e = 1j * math.pi * (tau * m * m + 2.0 * v * m)
        if e.real < _LOG_UNDERFLOW:
            return 0.0
        t = cmath.exp(e)
        return -t if (alternating and n % 2) else t

    total = term(n0)
    for direction in (1, -1):
        n = n0 + direction
        while True:
            t = term(n)
            total += t
            past = (n + shift - centre) * direction > 0
            if past and abs(t) <= _TAIL * abs(total):
                break
            if past and t == 0.0:
                break
            n += direction
    return pref * total


def theta_direct(mu, p):
    """Defining q-series of ``theta_mu(v; tau)``."""
    return _theta_series(mu, p.v, p.tau)


def theta_transformed(mu, p):
    """``theta_mu(v; tau)`` evaluated through Jacobi's imaginary transformation."""
    v, tau = complex(p.v), complex(p.tau)
    a = (-1j * tau) ** -0.5 * cmath.exp(-1j * math.pi * v * v / tau)
    vt, taut = v / tau, -1.0 / tau
    partner = {0: 2, 1: 1, 2: 0, 3: 3}[mu]
    val = a * _theta_series(partner, vt, taut)
    return 1j * val if mu == 1 else val


def theta(mu, p):
    """Jacobi theta function ``theta_mu(v; tau)``, ``mu`` in ``{0, 1, 2, 3}``."""
    if mu not in _THETA_FORMS:
        raise ValueError("mu must be 0, 1, 2 or 3")
    if not isinstance(p, ThetaParams):
        raise TypeError("expected ThetaParams")
    if complex(p.tau).imag >= Q_SWITCH_IMTAU:
        return theta_direct(mu, p)
    return theta_transformed(mu, p)
