"""Space-time correlation kernels and Fredholm determinants."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import integrate

from .configspace import Configuration
from .martingale import MartingaleEvaluator, M_Ndelta0, weighted_multipoint
from .specfun import hermite_functions, laguerre_functions
from .transition import BESQ, BM, CIRCLE, ProcessSpec, sigma_N, td_besq, td_bm, td_circle

_TAIL = 1e-16
_LOG_TAIL = math.log(1e16)
TRACE_TOL = 1e-6
FREDHOLM_TOL = 1e-8


@dataclass(frozen=True)
class CorrelationKernel:
    """``K(s, x; t, y)`` for a process started from ``config``.

    ``drift`` shifts every particle by ``b t`` (line and circle only).
    """

    spec: ProcessSpec
    config: Configuration
    drift: float = 0.0
    evaluator: MartingaleEvaluator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ev = MartingaleEvaluator(self.spec, self.config)
        object.__setattr__(self, "evaluator", ev)
        object.__setattr__(self, "spec", ev.spec)
        if self.drift and self.spec.kind == BESQ:
            raise ValueError("a constant drift is not defined on the half line")

    @property
    def N(self):
        return self.config.total

    def __call__(self, s, x, t, y):
        return corr_kernel(self, s, x, t, y)

    def density(self, t, x):
        """One-point function ``rho_1(t, x) = K(t, x; t, x)``."""
        x = np.asarray(x, dtype=float)
        out = np.array([corr_kernel(self, t, xi, t, xi) for xi in x.ravel()]).reshape(x.shape)
        return float(out) if out.ndim == 0 else out


def _p(spec, t, y, x):
    if spec.kind == BM:
        return td_bm(t, y, x)
    if spec.kind == BESQ:
        return td_besq(spec.nu, t, y, x)
    return td_circle(spec, t, y, x)


def corr_kernel(K, s, x, t, y):
    """Correlation kernel, broadcasting over ``x`` and ``y``."""
    if not s > 0:
        raise ValueError("the kernel needs s > 0")
    if t < 0:
        raise ValueError("t must be nonnegative")
    spec, ev = K.spec, K.evaluator
    x = np.asarray(x, dtype=float) - K.drift * s
    y = np.asarray(y, dtype=float) - K.drift * t
    x, y = np.broadcast_arrays(x, y)
    if ev.simple:
        val = np.zeros(x.shape)
        for k, u in enumerate(ev.config.support):
            val = val + np.asarray(_p(spec, s, x, u)) * np.asarray(ev.M_k(k, t, y))
    else:
        val = np.empty(x.shape)
        # coefficients depend on (s, x): one residue computation per distinct x
        xs, inv = np.unique(x, return_inverse=True)
        inv = inv.reshape(x.shape)
        for i, xv in enumerate(xs):
            mask = inv == i
            acc = np.zeros(int(mask.sum()))
            for v in ev.config.support:
                acc = acc + np.asarray(weighted_multipoint(ev, v, s, xv, t, y[mask]))
            val[mask] = acc
    if s > t:
        val = val - np.real(np.asarray(_p(spec, s - t, x, y)))
    return float(val) if val.ndim == 0 else val


def corr_function(K, points):
    """``rho(t_1, x_1; ...; t_M, x_M) = det[K(t_i, x_i; t_j, x_j)]``."""
    pts = [(float(t), float(x)) for t, x in points]
    if not pts:
        return 1.0
    if any(t <= 0 for t, _ in pts):
        raise ValueError("all times must be positive")
    ts = np.array([p[0] for p in pts])
    xs = np.array([p[1] for p in pts])
    mat = np.empty((len(pts), len(pts)))
    for i in range(len(pts)):
        for j in range(len(pts)):
            mat[i, j] = corr_kernel(K, ts[i], xs[i], ts[j], xs[j])
    return float(np.linalg.det(mat))


def kernel_trace(K, t, nodes=None):
    """``int rho_1(t, x) dx`` over the state space (should equal N)."""
    if not t > 0:
        raise ValueError("t must be positive")
    spec = K.spec
    if spec.kind == CIRCLE:
        n = nodes or 256
        period = 2 * math.pi * spec.radius
        xs = np.arange(n) * period / n
        return float(np.sum(K.density(t, xs)) * period / n)
    pts = np.asarray(K.config.support)
    f = lambda x: float(K.density(t, x))
    if spec.kind == BM:
        lo = pts.min() + K.drift * t - 12 * math.sqrt(t) - 4 * math.sqrt(K.N * t)
        hi = pts.max() + K.drift * t + 12 * math.sqrt(t) + 4 * math.sqrt(K.N * t)
        val, _ = integrate.quad(f, lo, hi, limit=400, epsabs=1e-11, epsrel=1e-11)
        return float(val)
    hi = pts.max() + 2 * t * (spec.nu + 2 * K.N + 2) + 80 * t + 20 * math.sqrt(t * (pts.max() + t))
    val, _ = integrate.quad(f, 0.0, hi, limit=400, epsabs=1e-11, epsrel=1e-11)
    return float(val)


# ----------------------------------------------------------------------------
# named closed-form kernels

def _check_times(s, t):
    if not s > 0 or not t > 0:
        raise ValueError("need s > 0 and t > 0")


def _tail_sum(weights_fn, rows_fn, start):
    """Sum ``w_n f_n`` for n >= start until terms fall below the double floor."""
    total = 0.0
    block = 64
    n0 = start
    while True:
        rows = rows_fn(n0 + block)[n0:n0 + block]
        w = weights_fn(np.arange(n0, n0 + block))
        terms = w * rows
        total = total + terms.sum()
        if np.max(np.abs(terms[-8:])) < _TAIL * max(abs(total), 1e-300) or np.max(np.abs(w[-8:])) < 1e-300:
            return total
        n0 += block
        if n0 > 200000:
            raise ArithmeticError("tail series did not converge")


def extended_hermite(N, s, x, t, y):
    """Extended Hermite kernel ``K_H(s, x; t, y)``."""
    _check_times(s, t)
    a, b = x / math.sqrt(2 * s), y / math.sqrt(2 * t)
    q = math.sqrt(t / s)
    if s <= t:
        fa = hermite_functions(N - 1, a)[:, 0]
        fb = hermite_functions(N - 1, b)[:, 0]
        return float(np.sum(q ** np.arange(N) * fa * fb) / math.sqrt(2 * s))
    rows = lambda n: (hermite_functions(n - 1, a) * hermite_functions(n - 1, b))[:, 0]
    tail = _tail_sum(lambda n: q ** n, rows, N)
    return float(-tail / math.sqrt(2 * s))


def extended_laguerre(nu, N, s, x, t, y):
    """Extended Laguerre kernel ``K_L(s, x; t, y)`` with arguments ``x/2s``, ``y/2t``."""
    _check_times(s, t)
    if x < 0 or y < 0:
        raise ValueError("the Laguerre kernel lives on x, y >= 0")
    a, b = x / (2 * s), y / (2 * t)
    q = t / s
    if s <= t:
        fa = laguerre_functions(N - 1, nu, a)[:, 0]
        fb = laguerre_functions(N - 1, nu, b)[:, 0]
        return float(np.sum(q ** np.arange(N) * fa * fb) / (2 * s))
    rows = lambda n: (laguerre_functions(n - 1, nu, a) * laguerre_functions(n - 1, nu, b))[:, 0]
    tail = _tail_sum(lambda n: q ** n, rows, N)
    return float(-tail / (2 * s))


def hermite_gauge(s, x, t, y):
    return math.exp(-x * x / (4 * s) + y * y / (4 * t))


def laguerre_gauge(nu, s, x, t, y):
    a, b = x / (2 * s), y / (2 * t)
    return (a / b) ** (nu / 2) * math.exp(-a / 2 + b / 2) if a > 0 and b > 0 else _laguerre_gauge_limit(nu, a, b)


def _laguerre_gauge_limit(nu, a, b):
    if nu == 0:
        return math.exp(-a / 2 + b / 2)
    raise ValueError("gauge factor is singular at the origin for nu != 0")


def _modes(N, lo, hi):
    """``sigma_N(m)`` for all integer m with ``lo <= |sigma_N(m)| <= hi``."""
    mmax = int(math.ceil(hi)) + 2
    m = np.arange(-mmax, mmax + 1)
    sig = np.asarray(sigma_N(N, m), dtype=float)
    a = np.abs(sig)
    return sig[(a >= lo) & (a <= hi)]


def eq_circle_kernel(r, N, dt, dx):
    """Equilibrium kernel on the circle as a function of ``t - s`` and ``y - x``."""
    if not r > 0:
        raise ValueError("radius must be positive")
    half = (N - 1) / 2.0
    if dt == 0:
        u = dx / (2 * r)
        su = math.sin(u)
        if abs(su) < 1e-6:
            # near u = k pi: sin(N u)/sin(u) = (-1)^{k(N-1)} N (1 - (N^2-1) e^2/6 + ...)
            k = round(u / math.pi)
            e = u - k * math.pi
            ratio = N * (1 - (N * N - 1) * e * e / 6.0)
            return (-1) ** (k * (N - 1)) * ratio / (2 * math.pi * r)
        return math.sin(N * u) / su / (2 * math.pi * r)
    if dt > 0:
        sig = _modes(N, 0.0, half)
        return float(np.sum(np.exp(sig * sig * dt / (2 * r * r)) * np.cos(sig * dx / r)) / (2 * math.pi * r))
    smax = math.sqrt(2 * r * r * (_LOG_TAIL + 2) / -dt) + 1
    sig = _modes(N, half + 0.25, max(smax, half + 1))
    return float(-np.sum(np.exp(sig * sig * dt / (2 * r * r)) * np.cos(sig * dx / r)) / (2 * math.pi * r))


def relaxation_component(k, r, N, s, x, t, y):
    """``G^{(k)}`` of the kernel started from the equidistant configuration."""
    if not s > 0:
        raise ValueError("s must be positive")
    half = (N - 1) / 2.0
    m = np.arange(-N, N + 1)
    sig = np.asarray(sigma_N(N, m), dtype=float)
    keep = np.abs(sig) <= half
    sig = sig[keep]
    sigk = np.asarray(sigma_N(N, m[keep] + k * N), dtype=float)
    expo = -(sigk ** 2 - sig ** 2) * s / (2 * r * r) + sig ** 2 * (t - s) / (2 * r * r)
    phase = -(sig * y - sigk * x) / r
    return float(np.sum(np.exp(expo) * np.cos(phase)) / (2 * math.pi * r))


def default_kcut(r, N, s):
    """Smallest cut beyond which every component is below the double floor."""
    # sigma(m+kN)^2 - sigma(m)^2 >= N^2 (|k| - 1/2) for |k| >= 1
    k = 1
    while N * N * (k - 0.5) * s / (2 * r * r) < _LOG_TAIL + 5:
        k += 1
        if k > 100000:
            raise ValueError("s is too small for a finite cut")
    return k


def relaxation_G(r, N, s, x, t, y, k_cut=None):
    if k_cut is None:
        k_cut = default_kcut(r, N, s)
    return sum(relaxation_component(k, r, N, s, x, t, y) for k in range(-k_cut, k_cut + 1))


def relaxation_G_grid(r, N, s, xs, t, ys, k_cut=None):
    """``sum_k G^(k)(s, x; t, y)`` on the product grid ``xs x ys``."""
    if not s > 0:
        raise ValueError("s must be positive")
    if k_cut is None:
        k_cut = default_kcut(r, N, s)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    m = np.arange(-N, N + 1)
    sig = np.asarray(sigma_N(N, m), dtype=float)
    keep = np.abs(sig) <= (N - 1) / 2.0
    sig, m = sig[keep], m[keep]
    ks = np.arange(-k_cut, k_cut + 1)
    sigk = np.asarray(sigma_N(N, m[None, :] + ks[:, None] * N), dtype=float)
    amp = np.exp(-(sigk ** 2 - sig ** 2) * s / (2 * r * r) + sig ** 2 * (t - s) / (2 * r * r))
    left = np.einsum("km,kmx->mx", amp, np.exp(1j * sigk[:, :, None] * xs / r))
    right = np.exp(-1j * sig[:, None] * ys[None, :] / r)
    return np.real(left.T @ right) / (2 * math.pi * r)


def relaxation_kernel(r, N, s, x, t, y, k_cut=None):
    """Full kernel from the equidistant start, ``sum_k G^(k) - 1(s>t) p^r``."""
    val = relaxation_G(r, N, s, x, t, y, k_cut)
    if s > t:
        val -= float(np.real(td_circle(ProcessSpec.circle(r, N), s - t, x, y)))
    return val


def extended_sine(rho, dt, dx):
    """Extended sine kernel with density ``rho``."""
    if not rho > 0:
        raise ValueError("density must be positive")
    w = math.pi * dx
    if dt == 0:
        if abs(dx) < 1e-12:
            return rho
        return math.sin(math.pi * rho * dx) / (math.pi * dx)
    f = lambda v: math.exp(math.pi ** 2 * v * v * dt / 2)
    if dt > 0:
        val, _ = integrate.quad(f, 0.0, rho, weight="cos", wvar=w, epsabs=1e-14, epsrel=1e-12) if w else \
            integrate.quad(f, 0.0, rho, epsabs=1e-14, epsrel=1e-12)
        return float(val)
    vmax = math.sqrt(2 * _LOG_TAIL / (math.pi ** 2 * -dt))
    if vmax <= rho:
        return 0.0
    val, _ = integrate.quad(f, rho, vmax, weight="cos", wvar=w, limit=400, epsabs=1e-14, epsrel=1e-12) if w else \
        integrate.quad(f, rho, vmax, limit=400, epsabs=1e-14, epsrel=1e-12)
    return float(-val)


# ----------------------------------------------------------------------------
# Fredholm determinants

@dataclass
class KernelGrid:
    times: np.ndarray
    nodes: list
    weights: list
    matrix: np.ndarray


def kernel_grid(K, times, test_fns, nodes_per_slice):
    """Nystrom block matrix ``K(t_m, x_j; t_n, x_k) chi_n(x_k) w_k``."""
    times = np.asarray(times, dtype=float)
    if np.any(times <= 0):
        raise ValueError("all times must be positive")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    if len(test_fns) != len(times):
        raise ValueError("one test function per time")
    gl_x, gl_w = np.polynomial.legendre.leggauss(nodes_per_slice)
    nodes, weights = [], []
    for chi, (a, b) in test_fns:
        if not b > a:
            raise ValueError("test-function supports must be nonempty intervals")
        xs = 0.5 * (b - a) * gl_x + 0.5 * (a + b)
        nodes.append(xs)
        weights.append(0.5 * (b - a) * gl_w * np.asarray(chi(xs), dtype=float))
    M = len(times)
    n = nodes_per_slice
    mat = np.empty((M * n, M * n))
    for i in range(M):
        for j in range(M):
            blk = corr_kernel(K, times[i], nodes[i][:, None], times[j], nodes[j][None, :])
            mat[i * n:(i + 1) * n, j * n:(j + 1) * n] = blk * weights[j][None, :]
    return KernelGrid(times, nodes, weights, mat)


def fredholm_det(K, times, test_fns, nodes_per_slice=None, check=True):
    """``Det[delta + K chi]`` by Gauss-Legendre Nystrom discretisation.

    ``test_fns`` holds one ``(chi, (a, b))`` per time. The value is recomputed
    with twice the nodes and must not move by more than ``1e-8``.
    """
    n = nodes_per_slice or max(2 * K.N, 24)
    g = kernel_grid(K, times, test_fns, n)
    val = float(np.linalg.det(np.eye(g.matrix.shape[0]) + g.matrix))
    if check:
        g2 = kernel_grid(K, times, test_fns, 2 * n)
        val2 = float(np.linalg.det(np.eye(g2.matrix.shape[0]) + g2.matrix))
        if abs(val2 - val) > FREDHOLM_TOL:
            raise ArithmeticError(f"Fredholm determinant not converged: {val} vs {val2}")
        return val2
    return val


# ----------------------------------------------------------------------------
# CSV output

def write_kernel_csv(path_or_file, rows, comment=None):
    """Rows of ``(s, x, t, y, K)`` with a header and an optional comment line."""
    _write_csv(path_or_file, ["s", "x", "t", "y", "K"], rows, comment)


def write_correlation_csv(path_or_file, rows, M, comment=None):
    header = [f"{c}{i}" for i in range(1, M + 1) for c in ("t", "x")] + ["rho"]
    _write_csv(path_or_file, header, rows, comment)


def _write_csv(path_or_file, header, rows, comment):
    def emit(fh):
        if comment:
            fh.write("# " + comment + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format(float(v), ".17g") for v in row) + "\n")
    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", encoding="utf-8", newline="\n") as fh:
            emit(fh)
