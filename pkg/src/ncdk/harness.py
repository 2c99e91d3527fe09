"""Monte Carlo and quadrature checks tying the simulators to the kernels.

Every check returns a ``ValidationReport``. Two-sided comparisons use
independent noise on each side: the interacting system runs on ``seed`` and
the elementary side on a sub-seed derived from it.
"""

from dataclasses import dataclass, field
import json
import math

import numpy as np
from scipy import stats as _stats

from . import __version__
from .configspace import Configuration
from .kernel import CorrelationKernel, _modes, fredholm_det, relaxation_G_grid
from .martingale import MartingaleEvaluator
from .rng import seed_words
from .sde import ADAPTIVE, SdeConfig, simulate, simulate_elementary
from .transition import CIRCLE, ProcessSpec

SIGMA = 3.0
_ALPHA = 2 * _stats.norm.sf(SIGMA)


@dataclass
class ValidationReport:
    check: str
    estimate: float
    reference: float
    stderr: float
    threshold: float
    passed: bool
    params: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "check": self.check,
            "params": self.params,
            "estimate": _jsonable(self.estimate),
            "reference": _jsonable(self.reference),
            "stderr": _jsonable(self.stderr),
            "pass": bool(self.passed),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _jsonable(v):
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(u) for u in np.asarray(v).ravel().tolist()]
    v = float(v)
    return v if math.isfinite(v) else str(v)


def _report(check, est, ref, se, z, params, meta=None, tol=0.0):
    thr = z * se + tol
    return ValidationReport(check, float(est), float(ref), float(se), float(thr),
                            bool(abs(est - ref) <= thr), params, meta or {})


def band(n_tests, base=SIGMA):
    """Normal-approximation band, widened Bonferroni-style beyond 10 tests."""
    if n_tests <= 10:
        return base
    return max(base, float(_stats.norm.isf(_ALPHA / (2 * n_tests))))


def _mean_se(vals):
    vals = np.asarray(vals, dtype=float)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals)))


def _subseeds(seed):
    w = seed_words(seed, 2)
    return int(w[0]), int(w[1])


def _params(spec, config, **extra):
    p = {"process": spec.kind, "config": config.format()}
    if spec.kind == CIRCLE:
        p["radius"] = spec.radius
    elif spec.nu:
        p["nu"] = spec.nu
    p.update(extra)
    p["version"] = __version__
    return p


def mc_martingale_check(spec, config, k, t, samples, seed, j=None):
    """``E_{u_j}[M^{u_k}(t, Y(t))]`` against ``delta_{jk}``."""
    j = k if j is None else j
    ev = MartingaleEvaluator(spec, config)
    target = 1.0 if j == k else 0.0
    params = _params(ev.spec, config, k=k, j=j, t=t, samples=samples, seed=seed)
    if ev.N == 1 or t == 0:
        val = float(ev.M_k(k, t, config.support[j]))
        return _report("martingale", val, target, 0.0, SIGMA, params, tol=1e-12)
    u = config.support[j]
    ens = simulate_elementary(ev.spec, [u], SdeConfig(dt=t, t_end=t, paths=samples, seed=seed), [t])
    y = ens.values[:, 0, -1]
    est, se = _mean_se(ev.M_k(k, t, y))
    return _report("martingale", est, target, se, SIGMA, params)


@dataclass(frozen=True)
class CountObservable:
    """``prod_m min(#{j : X_j(t_m) in [a_m, b_m]}, cap)``."""

    windows: tuple  # ((t, a, b), ...)
    cap: int = 0

    def __call__(self, slices):
        """``slices``: one ``(paths, particles)`` array per window time."""
        out = np.ones(slices[0].shape[0])
        for (t, a, b), x in zip(self.windows, slices):
            c = np.sum((x >= a) & (x <= b), axis=1)
            if self.cap:
                c = np.minimum(c, self.cap)
            out = out * c
        return out

    @property
    def times(self):
        return sorted({w[0] for w in self.windows})


def dmr_check(spec, config, observable, T, samples, seed, dt=1e-3, backend=None):
    """Interacting-system expectation of ``F`` against the weighted elementary one."""
    ev = MartingaleEvaluator(spec, config)
    spec = ev.spec
    if spec.kind == CIRCLE and not spec.odd:
        raise ValueError("even-N circle has no elementary path sampler; use the quadrature checks")
    obs = observable if observable.cap else CountObservable(observable.windows, config.total)
    if any(t > T for t in obs.times):
        raise ValueError("observation times must not exceed T")
    s_lhs, s_rhs = _subseeds(seed)
    rec = sorted(set(obs.times) | {T})
    lhs_ens = simulate(spec, config.points(), SdeConfig(dt, T, samples, s_lhs, ADAPTIVE), rec, backend=backend)
    ok = lhs_ens.ok
    lhs_vals = obs([lhs_ens.at(t)[ok] for t, _, _ in obs.windows])
    rhs_ens = simulate_elementary(spec, config.points(), SdeConfig(dt, T, samples, s_rhs), rec)
    yT = rhs_ens.values[:, :, rec.index(T)]
    D = ev.det(T, yT)
    rhs_vals = obs([rhs_ens.at(t) for t, _, _ in obs.windows]) * D
    m1, se1 = _mean_se(lhs_vals)
    m2, se2 = _mean_se(rhs_vals)
    params = _params(spec, config, windows=[list(w) for w in obs.windows], T=T,
                     samples=samples, seed=seed, dt=dt)
    meta = {"lhs_stderr": se1, "rhs_stderr": se2, **lhs_ens.stats}
    return _report("dmr", m1, m2, math.hypot(se1, se2), SIGMA, params, meta)


def _bin_integrals(K, t, edges, nodes=16):
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    out = np.empty(len(edges) - 1)
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        xs = 0.5 * (b - a) * gx + 0.5 * (a + b)
        out[i] = 0.5 * (b - a) * np.sum(gw * K.density(t, xs))
    return out


def density_compare(spec, config, t, bins, ensemble, kernel=None):
    """Histogram of particle positions at ``t`` against ``int_bin rho_1``."""
    if not t > 0:
        raise ValueError("t must be positive")
    K = kernel or CorrelationKernel(spec, config)
    edges = np.asarray(bins, dtype=float)
    x = ensemble.at(t)[ensemble.ok]
    counts = np.stack([np.sum((x >= a) & (x < b), axis=1) for a, b in zip(edges[:-1], edges[1:])], axis=1)
    est = counts.mean(axis=0)
    se = counts.std(axis=0, ddof=1) / math.sqrt(counts.shape[0])
    ref = _bin_integrals(K, t, edges)
    z = band(len(ref), base=4.0)
    floor = 1.0 / counts.shape[0]  # a bin with no hits still has resolution 1/paths
    score = np.abs(est - ref) / np.maximum(se, floor)
    worst = int(np.argmax(score))
    params = _params(K.spec, config, t=t, bins=len(ref), paths=int(counts.shape[0]))
    rep = ValidationReport("density", float(est[worst]), float(ref[worst]), float(max(se[worst], floor)),
                           float(z * max(se[worst], floor)), bool(score.max() <= z), params,
                           {"max_score": float(score.max()), "band": z,
                            "estimate_bins": est.tolist(), "reference_bins": ref.tolist()})
    return rep


def mgf_vs_fredholm(spec, config, times, test_fns, samples, nodes, seed, dt=1e-3, backend=None):
    """``E[exp sum_m sum_j f_m(X_j(t_m))]`` against ``Det[delta + K chi]``.

    ``test_fns``: one ``(f, (a, b))`` per time, ``f`` vanishing outside ``[a, b]``.
    """
    K = CorrelationKernel(spec, config)
    times = [float(t) for t in times]
    chis = [((lambda f: (lambda x: np.expm1(f(x))))(f), ab) for f, ab in test_fns]
    ref = fredholm_det(K, times, chis, nodes)
    ens = simulate(K.spec, config.points(), SdeConfig(dt, max(times), samples, seed, ADAPTIVE), times,
                   backend=backend)
    ok = ens.ok
    expo = np.zeros(int(ok.sum()))
    for t, (f, (a, b)) in zip(times, test_fns):
        x = ens.at(t)[ok]
        inside = (x >= a) & (x <= b)
        expo = expo + np.sum(np.where(inside, f(np.where(inside, x, a)), 0.0), axis=1)
    est, se = _mean_se(np.exp(expo))
    params = _params(K.spec, config, times=times, samples=samples, nodes=nodes, seed=seed, dt=dt)
    return _report("fredholm", est, ref, se, SIGMA, params, dict(ens.stats))


def fredholm_rank_one(spec, u, t, chi, support, nodes=48):
    """Single particle, single time: ``Det`` against ``1 + int chi p``.

    Returns ``(fredholm, analytic)``.
    """
    K = CorrelationKernel(spec, Configuration((float(u),), (1,)))
    det = fredholm_det(K, [t], [(chi, support)], nodes)
    a, b = support
    gx, gw = np.polynomial.legendre.leggauss(200)
    xs = 0.5 * (b - a) * gx + 0.5 * (a + b)
    dens = np.real(np.asarray(spec.with_particles(1).density(t, xs, u) if spec.kind == CIRCLE
                              else spec.density(t, xs, u)))
    return det, 1.0 + 0.5 * (b - a) * float(np.sum(gw * chi(xs) * dens))


@dataclass
class RelaxationTable:
    r: float
    N: int
    T: np.ndarray
    distance: np.ndarray

    @property
    def monotone(self):
        return bool(np.all(np.diff(self.distance) < 0))

    def distance_at(self, T):
        i = int(np.argmin(np.abs(self.T - T)))
        if abs(self.T[i] - T) > 1e-12 * max(1.0, T):
            raise KeyError(f"T={T} not in the scan")
        return float(self.distance[i])

    def rows(self):
        return list(zip(self.T.tolist(), self.distance.tolist()))


def default_relaxation_grid(r, N, points=24):
    """Spatial points on the circle and a small base time ``r^2 / (10 N)``."""
    xs = 2 * math.pi * r * (np.arange(points) + 0.5) / points
    tau = r * r / (10.0 * N)
    return {"xs": xs, "time_pairs": [(tau, tau), (tau, 2 * tau), (2 * tau, tau)]}


def relaxation_scan(r, N, T_list, grid=None):
    """Sup distance between the kernel started from equidistant points and the
    equilibrium kernel, after shifting both times by ``T``."""
    grid = grid or default_relaxation_grid(r, N)
    xs = np.asarray(grid["xs"], dtype=float)
    T = np.asarray(sorted(T_list), dtype=float)
    dist = np.empty(len(T))
    for i, shift in enumerate(T):
        worst = 0.0
        for s0, t0 in grid["time_pairs"]:
            s, t = s0 + shift, t0 + shift
            g = relaxation_G_grid(r, N, s, xs, t, xs)
            # the 1(s>t) p^r term is common to both kernels and cancels
            geq = _eq_G(r, N, t - s, xs[None, :] - xs[:, None])
            worst = max(worst, float(np.max(np.abs(g - geq))))
        dist[i] = worst
    return RelaxationTable(r, N, T, dist)


def _eq_G(r, N, dt, dx):
    """``G_eq(dt, dx)`` as a mode sum (no ``p^r`` subtraction, any sign of dt)."""
    sig = _modes(N, 0.0, (N - 1) / 2.0)
    dx = np.asarray(dx, dtype=float)
    return np.sum(np.exp(sig * sig * dt / (2 * r * r)) * np.cos(sig * dx[..., None] / r), axis=-1) / (2 * math.pi * r)


def relaxation_report(r, N, T_list=None, threshold=1e-6, grid=None):
    T_check = 20.0 * r * r / N
    if T_list is None:
        T_list = np.linspace(0.0, T_check, 11)
    tab = relaxation_scan(r, N, T_list, grid)
    d = tab.distance_at(T_check)
    passed = tab.monotone and d < threshold
    params = {"r": r, "N": N, "T_check": T_check, "version": __version__}
    return ValidationReport("relaxation", d, 0.0, 0.0, threshold, passed, params,
                            {"monotone": tab.monotone, "table": tab.rows()})


# ----------------------------------------------------------------------------
# named checks for the command line suite

def _tol_report(name, err, tol, params=None):
    return ValidationReport(name, float(err), 0.0, 0.0, float(tol), bool(err < tol), params or {})


def random_chamber(rng, N, lo=None, gmin=0.5, gmax=1.0):
    """Ordered points with consecutive gaps uniform in ``[gmin, gmax]``.

    Keeping points apart keeps the determinants well conditioned, so the
    comparisons measure the identities rather than cancellation in LU.
    """
    gaps = rng.uniform(gmin, gmax, N - 1)
    pts = np.concatenate([[0.0], np.cumsum(gaps)])
    if lo is None:
        return pts - pts[-1] / 2 + rng.uniform(-0.5, 0.5)
    return pts + lo + rng.uniform(0.0, 0.5)


def random_alcove(rng, r, N, concentration=4.0):
    """Ordered points in one period, gaps (including the wrap) Dirichlet-split."""
    period = 2 * math.pi * r
    gaps = rng.dirichlet(np.full(max(N, 2), concentration)) * period
    return rng.uniform(0, period / max(N, 2)) + np.concatenate([[0.0], np.cumsum(gaps[:N - 1])])


def check_det_identities(fast=False, seed=0):
    from .martingale import det_identity_check
    rng = np.random.default_rng(seed)
    worst = {"rational": 0.0, "trigonometric": 0.0}
    draws = 20 if fast else 100
    for N in range(1, 7):
        for _ in range(draws):
            u = random_chamber(rng, N)
            x = rng.permutation(random_chamber(rng, N))
            lhs, rhs = det_identity_check("rational", x, u)
            worst["rational"] = max(worst["rational"], abs(lhs - rhs) / abs(rhs))
            r = rng.uniform(0.5, 2)
            u = random_alcove(rng, r, N)
            x = rng.permutation(random_alcove(rng, r, N))
            lhs, rhs = det_identity_check("trigonometric", x, u, r)
            worst["trigonometric"] = max(worst["trigonometric"], abs(lhs - rhs) / abs(rhs))
    return [_tol_report(f"det-identities/{k}", v, 1e-11, {"draws": draws}) for k, v in worst.items()]


def _three_specs(N=3):
    return [ProcessSpec.bm(), ProcessSpec.besq(0.5), ProcessSpec.circle(1.0, N)]


def check_itransform(fast=False, seed=0):
    from .martingale import CoefficientExpansion, FOURIER, MONOMIAL, itransform, itransform_quad
    out = []
    for spec in _three_specs():
        worst = 0.0
        for n in range(9):
            if spec.kind == CIRCLE:
                # z^n is entire; the Gaussian identity I[z^n] = m_n holds on the cover too
                f = lambda z, n=n: z ** n
                a = itransform(ProcessSpec.bm(), CoefficientExpansion(MONOMIAL, np.eye(n + 1)[n]), 0.4, 0.7)
                coef = np.zeros(2 * 2 + 1, dtype=complex)
                coef[2 + 1] = 1.0  # e^{i z / 2r}
                g = CoefficientExpansion(FOURIER, coef, radius=spec.radius)
                worst = max(worst, abs(itransform(spec, g, 0.4, 0.7, check_imag=False)
                                       - math.cos(0.35) * math.exp(0.05)))
            else:
                f = lambda z, n=n: z ** n
                a = itransform(spec, CoefficientExpansion(MONOMIAL, np.eye(n + 1)[n]), 0.4, 0.7)
            b = itransform_quad(spec, f, 0.4, 0.7)
            worst = max(worst, abs(a - b))
        out.append(_tol_report(f"itransform/{spec.kind}", worst, 1e-8))
    return out


def martingale_quadrature_residual(spec, config, k, s, t, x):
    """``|int M(t, y) p(t - s, y | x) dy - M(s, x)|``."""
    ev = MartingaleEvaluator(spec, config)
    spec = ev.spec
    h = t - s
    if spec.kind == CIRCLE:
        n = 512
        period = 2 * math.pi * spec.radius
        ys = np.arange(n) * period / n
        val = np.sum(ev.M_k(k, t, ys) * np.real(spec.density(h, ys, x))) * period / n
    elif spec.kind == ProcessSpec.bm().kind:
        g, w = np.polynomial.hermite.hermgauss(64)
        val = np.sum(w * ev.M_k(k, t, x + math.sqrt(2 * h) * g)) / math.sqrt(math.pi)
    else:
        from scipy import integrate
        hi = x + 2 * h * (spec.nu + 2 * ev.N + 4) + 120 * h + 40 * math.sqrt(h * (x + h))
        val, _ = integrate.quad(lambda y: float(ev.M_k(k, t, y)) * float(spec.density(h, y, x)),
                                0.0, hi, points=[x], limit=400, epsabs=1e-12, epsrel=1e-12)
    return abs(float(val) - float(ev.M_k(k, s, x)))


def _random_config(rng, spec, N):
    if spec.kind == CIRCLE:
        while True:
            u = np.sort(rng.uniform(0, 2 * math.pi * spec.radius, N))
            if N == 1 or (np.min(np.diff(u)) > 0.2 and u[-1] - u[0] < 2 * math.pi * spec.radius - 0.2):
                return Configuration(tuple(u), (1,) * N)
    lo = 0.05 if spec.kind == "BESQ" else -1.5
    while True:
        u = np.sort(rng.uniform(lo, 1.5 if lo < 0 else 2.0, N))
        if N == 1 or np.min(np.diff(u)) > 0.2:
            return Configuration(tuple(u), (1,) * N)


def check_martingale_quadrature(fast=False, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    reps = 5 if fast else 20
    for spec in [ProcessSpec.bm(), ProcessSpec.besq(0.5), ProcessSpec.circle(1.0, 3), ProcessSpec.circle(1.0, 4)]:
        worst = 0.0
        for _ in range(reps):
            N = spec.particles if spec.kind == CIRCLE else int(rng.integers(2, 5))
            c = _random_config(rng, spec, N)
            s = rng.uniform(0.05, 0.5)
            t = s + rng.uniform(0.05, 0.5)
            x = rng.uniform(0.0, 2.0) if spec.kind != ProcessSpec.bm().kind else rng.uniform(-1.5, 1.5)
            worst = max(worst, martingale_quadrature_residual(spec, c, int(rng.integers(N)), s, t, x))
        label = spec.kind + (f"-N{spec.particles}" if spec.kind == CIRCLE else "")
        out.append(_tol_report(f"martingale-quadrature/{label}", worst, 1e-7))
    return out


def check_closed_forms(fast=False, seed=0):
    from .martingale import closed_form_det
    rng = np.random.default_rng(seed)
    out = []
    draws = 20 if fast else 100
    for kind in ("BM", "BESQ", "CircleBM"):
        worst = 0.0
        for _ in range(draws):
            N = int(rng.integers(1, 6))
            if kind == "CircleBM":
                spec = ProcessSpec.circle(rng.uniform(0.5, 2), N)
                u, y = random_alcove(rng, spec.radius, N), random_alcove(rng, spec.radius, N)
            elif kind == "BM":
                spec = ProcessSpec.bm()
                u, y = random_chamber(rng, N), random_chamber(rng, N)
            else:
                spec = ProcessSpec.besq(rng.uniform(-0.5, 2))
                u, y = random_chamber(rng, N, lo=0.0), random_chamber(rng, N, lo=0.0)
            c = Configuration(tuple(u), (1,) * N)
            ev = MartingaleEvaluator(spec, c)
            t = rng.uniform(0, 1)
            y = rng.permutation(y)
            d = ev.det(t, y)
            ref = closed_form_det(ev.spec, c, t, y)
            worst = max(worst, abs(d - ref) / abs(ref))
        out.append(_tol_report(f"closed-forms/{kind}", worst, 1e-9))
    return out


def signed_kernel_mass(spec, t, x, panels=16, nodes=32):
    """``int_x^{x + 2 pi r} p^r(t, y | x) dy``: 1 for odd N, 0 for even N.

    For even N the kernel is antiperiodic, so the window must start at the
    source point; composite Gauss-Legendre keeps spectral accuracy there.
    """
    from .transition import td_circle
    period = 2 * math.pi * spec.radius
    g, w = np.polynomial.legendre.leggauss(nodes)
    edges = x + np.linspace(0, period, panels + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        ys = 0.5 * (b - a) * g + 0.5 * (a + b)
        total += 0.5 * (b - a) * float(np.sum(w * td_circle(spec, t, ys, x)))
    return total


def check_circle_td(fast=False, seed=0):
    from .transition import td_circle
    worst_dual, worst_int = 0.0, 0.0
    for N in (3, 4):
        spec = ProcessSpec.circle(1.0, N)
        for t in np.linspace(0.05, 3.0, 10):
            dx = np.linspace(-math.pi, math.pi, 10)
            a = td_circle(spec, t, dx, 0.0, method="wrapped")
            b = td_circle(spec, t, dx, 0.0, method="spectral")
            worst_dual = max(worst_dual, float(np.max(np.abs(a - b))))
            integral = signed_kernel_mass(spec, t, 0.3)
            worst_int = max(worst_int, abs(integral - (1.0 if N % 2 else 0.0)))
    return [_tol_report("circle-td/dual-series", worst_dual, 1e-12),
            _tol_report("circle-td/integral", worst_int, 1e-10)]


def trace_cases():
    from .configspace import equidistant_config
    return [
        (ProcessSpec.bm(), Configuration((-1.0, 0.0, 1.0), (1, 1, 1)), 0.5),
        (ProcessSpec.bm(), Configuration((0.0,), (3,)), 0.5),
        (ProcessSpec.besq(0.5), Configuration((1.0, 2.0), (1, 1)), 0.2),
        (ProcessSpec.besq(0.5), Configuration((0.0,), (3,)), 0.5),
        (ProcessSpec.circle(1.0, 3), equidistant_config(1.0, 3), 0.3),
        (ProcessSpec.circle(1.0, 4), equidistant_config(1.0, 4), 0.3),
    ]


def check_trace(fast=False, seed=0):
    from .kernel import kernel_trace
    out = []
    for spec, c, t in trace_cases():
        K = CorrelationKernel(spec, c)
        err = abs(kernel_trace(K, t) - c.total)
        out.append(_tol_report(f"trace/{K.spec.kind}/{c.format()}", err, 1e-6))
    return out


def dmr_cases():
    from .configspace import equidistant_config
    return [
        (ProcessSpec.bm(), Configuration((-0.5, 0.5), (1, 1)), CountObservable(((0.5, -0.2, 1.0),)), 0.5),
        (ProcessSpec.bm(), Configuration((-0.5, 0.0, 0.5), (1, 1, 1)),
         CountObservable(((0.25, -0.3, 0.4), (0.5, 0.0, 1.5))), 0.5),
        (ProcessSpec.besq(0.5), Configuration((0.5, 1.5), (1, 1)), CountObservable(((0.5, 0.0, 1.0),)), 0.5),
        (ProcessSpec.circle(1.0, 3), equidistant_config(1.0, 3), CountObservable(((0.5, 0.0, 2.0),)), 0.5),
    ]


def check_dmr(fast=False, seed=0):
    samples = 20000 if fast else 200000
    return [dmr_check(spec, c, obs, T, samples, seed + i) for i, (spec, c, obs, T) in enumerate(dmr_cases())]


def fredholm_case():
    f1 = lambda x: -0.7 * np.ones_like(x)
    f2 = lambda x: 0.4 * np.ones_like(x)
    return (ProcessSpec.bm(), Configuration((-0.5, 0.5), (1, 1)), [0.3, 0.6],
            [(f1, (-0.2, 0.9)), (f2, (-1.0, 0.1))])


def check_fredholm(fast=False, seed=0):
    spec, c, times, fns = fredholm_case()
    rep = mgf_vs_fredholm(spec, c, times, fns, 20000 if fast else 200000, 24, seed)
    chi = lambda x: -0.5 * np.ones_like(x)
    det, ana = fredholm_rank_one(ProcessSpec.bm(), 0.2, 0.4, chi, (-0.5, 1.0))
    return [rep, _tol_report("fredholm/rank-one", abs(det - ana), 1e-8)]


def check_relaxation(fast=False, seed=0):
    return [relaxation_report(r, N) for r, N in ((1.0, 3), (1.0, 4), (2.0, 5))]


def sine_limit_error(r=50.0, N=314, points=13):
    from .kernel import eq_circle_kernel, extended_sine
    rho = N / (2 * math.pi * r)
    worst = 0.0
    for dt in np.linspace(-0.5, 0.5, 11):
        for dx in np.linspace(-3, 3, points):
            worst = max(worst, abs(eq_circle_kernel(r, N, dt, dx) - extended_sine(rho, dt, dx)))
    return worst


def check_sine_limit(fast=False, seed=0):
    return [_tol_report("sine-limit", sine_limit_error(points=7 if fast else 25), 1e-3)]


def check_cpr(fast=False, seed=0):
    from .martingale import cpr_martingale_mc, cpr_reference
    c = Configuration((0.5, 1.3), (1, 1))
    out = []
    for n in (-1, 0, 1):
        est, se = cpr_martingale_mc(n, c, 0, 0.3, 0.8, 20000 if fast else 100000, seed + n + 1)
        ref = cpr_reference(n, c, 0, 0.3, 0.8)
        out.append(_report(f"cpr/n={n}", est, ref, se, SIGMA, {"n": n, "t": 0.3, "x": 0.8}))
    return out


CHECKS = {
    "det-identities": check_det_identities,
    "itransform": check_itransform,
    "martingale-quadrature": check_martingale_quadrature,
    "closed-forms": check_closed_forms,
    "circle-td": check_circle_td,
    "trace": check_trace,
    "dmr": check_dmr,
    "fredholm": check_fredholm,
    "relaxation": check_relaxation,
    "sine-limit": check_sine_limit,
    "cpr": check_cpr,
}


def run_checks(names, fast=False, seed=0):
    reports = []
    for name in names:
        if name not in CHECKS:
            raise KeyError(name)
        reports.extend(CHECKS[name](fast=fast, seed=seed))
    return reports
