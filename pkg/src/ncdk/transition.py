"""Transition densities of the one-particle processes.

BM on the line, BESQ(nu) and BES(nu) on the half line, and BM on a circle
whose "density" alternates in sign across windings when the particle count
is even. Also the Karlin-McGregor determinant in the alcove and the
integral-transform kernels ``q`` and ``q^(nu)``.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import special as _sp

from . import configspace

_LOG_TAIL = math.log(1e16)

BM = "BM"
BESQ = "BESQ"
CIRCLE = "CircleBM"
_KINDS = (BM, BESQ, CIRCLE)
_ALIASES = {
    "bm": BM, "dyson": BM,
    "besq": BESQ,
    "circle": CIRCLE, "circlebm": CIRCLE,
}


@dataclass(frozen=True)
class ProcessSpec:
    """Which elementary process drives the system.

    ``particles`` only matters for the circle, where it fixes the sign
    structure of the transition kernel.
    """

    kind: str
    nu: float = 0.0
    radius: float = 1.0
    particles: int = 1

    def __post_init__(self):
        kind = _ALIASES.get(str(self.kind).lower(), self.kind)
        if kind not in _KINDS:
            raise ValueError(f"unknown process kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == BESQ and not self.nu > -1:
            raise ValueError("BESQ needs nu > -1")
        if kind == CIRCLE:
            if not self.radius > 0:
                raise ValueError("circle radius must be positive")
            if int(self.particles) < 1:
                raise ValueError("circle process needs N >= 1")
            object.__setattr__(self, "particles", int(self.particles))

    @classmethod
    def bm(cls):
        return cls(BM)

    @classmethod
    def besq(cls, nu):
        return cls(BESQ, nu=nu)

    @classmethod
    def circle(cls, radius, particles):
        return cls(CIRCLE, radius=radius, particles=particles)

    @property
    def odd(self):
        return self.particles % 2 == 1

    def with_particles(self, n):
        return ProcessSpec(self.kind, self.nu, self.radius, n)

    def density(self, t, y, x):
        """Transition density ``p(t, y | x)`` of this elementary process."""
        if self.kind == BM:
            return td_bm(t, y, x)
        if self.kind == BESQ:
            return td_besq(self.nu, t, y, x)
        return td_circle(self, t, y, x)


@dataclass(frozen=True)
class SpaceTimePoint:
    t: float
    x: float

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("time must be nonnegative")


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def td_bm(t, y, x):
    """Gaussian kernel ``exp(-(y-x)^2/2t)/sqrt(2 pi t)``; t = 0 is rejected."""
    if not t > 0:
        raise ValueError("td_bm needs t > 0 (the t = 0 delta is left to callers)")
    d = np.asarray(y) - np.asarray(x)
    return _out(np.exp(-d * d / (2.0 * t)) / math.sqrt(2.0 * math.pi * t))


def td_besq(nu, t, y, x):
    """BESQ(nu) transition density, with the explicit branch at x = 0."""
    if not nu > -1:
        raise ValueError("nu must exceed -1")
    if not t > 0:
        raise ValueError("td_besq needs t > 0")
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(y < 0) or np.any(x < 0):
        raise ValueError("BESQ lives on [0, inf)")
    y, x = np.broadcast_arrays(y, x)
    out = np.empty(y.shape)
    at0 = x == 0
    if np.any(at0):
        yy = y[at0]
        with np.errstate(divide="ignore"):
            logy = np.where(yy > 0, np.log(np.where(yy > 0, yy, 1.0)), -np.inf)
            logp = nu * logy - yy / (2 * t) - (nu + 1) * math.log(2 * t) - _sp.gammaln(nu + 1)
        if nu == 0:
            logp = np.where(yy > 0, logp, -math.log(2 * t))
        out[at0] = np.exp(logp)
    pos = ~at0
    if np.any(pos):
        xx, yy = x[pos], y[pos]
        z = np.sqrt(xx * yy) / t
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.power(yy / xx, 0.5 * nu)
            val = ratio * np.exp(-(np.sqrt(xx) - np.sqrt(yy)) ** 2 / (2 * t)) / (2 * t) * _sp.ive(nu, z)
        if nu != 0:
            zero = yy == 0
            val = np.where(zero, 0.0 if nu > 0 else np.inf, val)
        out[pos] = val
    return _out(out)


def td_bes(nu, t, y, x):
    """BES(nu) density, obtained from BESQ(nu) by ``y -> y^2``."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(y < 0) or np.any(x < 0):
        raise ValueError("BES lives on [0, inf)")
    return _out(np.asarray(td_besq(nu, t, y * y, x * x)) * 2.0 * y)


def sigma_N(N, m):
    """Mode index on the circle: ``m`` for odd N, ``m - 1/2`` for even N."""
    if N < 1:
        raise ValueError("N must be positive")
    if N % 2:
        return m
    return np.asarray(m) - 0.5 if np.ndim(m) else m - 0.5


def _circle_wrapped(r, odd, t, d):
    d = np.asarray(d)
    b = float(np.max(np.abs(np.imag(d)))) if d.size else 0.0
    span = math.sqrt(2.0 * t * (_LOG_TAIL + 2.0) + b * b)
    dr = np.real(d)
    lo = math.floor((-span - np.max(dr)) / (2 * math.pi * r)) - 1
    hi = math.ceil((span - np.min(dr)) / (2 * math.pi * r)) + 1
    total = np.zeros(np.shape(d), dtype=d.dtype if np.iscomplexobj(d) else float)
    norm = 1.0 / math.sqrt(2.0 * math.pi * t)
    for ell in range(lo, hi + 1):
        shifted = d + 2 * math.pi * r * ell
        term = np.exp(-shifted * shifted / (2.0 * t)) * norm
        if not odd and ell % 2:
            total -= term
        else:
            total += term
    return total


def _circle_spectral(r, odd, t, d):
    d = np.asarray(d)
    b = float(np.max(np.abs(np.imag(d)))) / r if d.size else 0.0
    a = t / (r * r)
    smax = (b + math.sqrt(b * b + 2.0 * a * (_LOG_TAIL + 2.0))) / a
    if odd:
        sig = np.arange(1, int(math.floor(smax)) + 2, dtype=float)
        total = np.ones(np.shape(d), dtype=complex if np.iscomplexobj(d) else float)
    else:
        sig = np.arange(0.5, smax + 1.5, 1.0)
        total = np.zeros(np.shape(d), dtype=complex if np.iscomplexobj(d) else float)
    w = np.exp(-sig * sig * t / (2 * r * r))
    dd = d[..., None] if np.ndim(d) else d
    total = total + 2.0 * np.sum(w * np.cos(sig * dd / r), axis=-1)
    return total / (2 * math.pi * r)


def td_circle(spec, t, y, x, method=None):
    """Circle kernel ``p^r(t, y | x; N)``.

    Signed for even N: it is then not a probability density. ``method`` is
    ``"wrapped"`` (image sum), ``"spectral"`` (Fourier modes) or ``None``
    to pick by ``t / r^2``. Complex arguments are accepted because the kernel
    is entire in ``y - x``.
    """
    if spec.kind != CIRCLE:
        raise ValueError("td_circle needs a CircleBM spec")
    if not t > 0:
        raise ValueError("td_circle needs t > 0")
    r = spec.radius
    d = np.asarray(y) - np.asarray(x)
    if method is None:
        method = "wrapped" if t / (r * r) < 1.0 else "spectral"
    if method == "wrapped":
        val = _circle_wrapped(r, spec.odd, t, d)
    elif method == "spectral":
        val = _circle_spectral(r, spec.odd, t, d)
    else:
        raise ValueError(f"unknown method {method!r}")
    return val if np.ndim(val) else val[()]


def km_determinant(spec, t, y_vec, x_vec):
    """Karlin-McGregor / Liechty-Wang density of N BMs killed in the alcove."""
    r = spec.radius
    y_vec = np.asarray(y_vec, dtype=float)
    x_vec = np.asarray(x_vec, dtype=float)
    if len(y_vec) != len(x_vec):
        raise ValueError("y and x must have the same length")
    if not (configspace.in_alcove(r, y_vec) and configspace.in_alcove(r, x_vec)):
        raise ValueError("both points must lie in the Weyl alcove")
    kern = spec.with_particles(len(x_vec))
    mat = np.asarray(td_circle(kern, t, y_vec[:, None], x_vec[None, :]))
    return float(np.linalg.det(mat))


def itransform_kernel_q(t, w, x):
    """``q(t, w | x) = exp(-(ix + w)^2 / 2t) / sqrt(2 pi t)``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        raise ValueError("q at t = 0 is a delta; resolve it in the caller")
    z = 1j * np.asarray(x) + np.asarray(w)
    val = np.exp(-z * z / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)
    return val if np.ndim(val) else complex(val)


def itransform_kernel_qnu(nu, t, w, x):
    """``q^(nu)(t, w | x)``, including the x = 0 limit and the x < 0 continuation."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        raise ValueError("q^(nu) at t = 0 is a delta; resolve it in the caller")
    w = np.asarray(w, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(w < 0):
        raise ValueError("w must be nonnegative")
    w, x = np.broadcast_arrays(w, x)
    out = np.empty(w.shape)
    zero = x == 0
    if np.any(zero):
        out[zero] = td_besq(nu, t, w[zero], 0.0)
    neg = x < 0
    if np.any(neg):
        out[neg] = td_besq(nu, t, w[neg], -x[neg])
    pos = x > 0
    if np.any(pos):
        xx, ww = x[pos], w[pos]
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.power(ww / xx, 0.5 * nu) * np.exp((xx - ww) / (2 * t)) / (2 * t) * _sp.jv(nu, np.sqrt(xx * ww) / t)
        if nu != 0:
            val = np.where(ww == 0, 0.0 if nu > 0 else np.inf, val)
        out[pos] = val
    return _out(out)
