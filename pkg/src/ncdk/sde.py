"""Path simulation for the interacting systems and their one-particle drivers.

Interacting systems use Euler-Maruyama. With ``scheme="euler_adaptive"`` a
step that would break the particle order is retried on half the step (down
to ``dt/1024``) with fresh noise; a path that still cannot keep its order is
marked failed and its values set to NaN. Noise for path ``p``, base step
``n`` and attempt ``a`` is a pure function of ``(seed, p, n, a*N + j)``, so
results do not depend on thread count.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import _accel, configspace
from ._accel import njit, prange
from .rng import normal, normal_array
from .transition import BESQ, BM, CIRCLE, ProcessSpec

EULER = "euler"
ADAPTIVE = "euler_adaptive"
UNITS = 1024  # minimum substep is dt / UNITS
_KIND_CODE = {BM: 0, BESQ: 1, CIRCLE: 2}


@dataclass(frozen=True)
class SdeConfig:
    dt: float
    t_end: float
    paths: int
    seed: int = 0
    scheme: str = ADAPTIVE

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be nonnegative")
        if int(self.paths) < 1:
            raise ValueError("need at least one path")
        if self.scheme not in (EULER, ADAPTIVE):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def steps(self):
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True)
class PathEnsemble:
    """Recorded paths; ``values`` has shape ``(paths, particles, times)``.

    Circle values are stored on the lift; ``reduced`` maps them to [0, 2 pi r).
    """

    spec: ProcessSpec
    start: np.ndarray
    times: np.ndarray
    values: np.ndarray
    seed: int
    failed: np.ndarray
    stats: dict = field(default_factory=dict)
    interacting: bool = True

    @property
    def paths(self):
        return self.values.shape[0]

    @property
    def particles(self):
        return self.values.shape[1]

    @property
    def ok(self):
        return ~self.failed

    @property
    def reduced(self):
        if self.spec.kind == CIRCLE:
            return configspace.canonical_circle(self.spec.radius, self.values)
        return self.values

    def at(self, t):
        """Positions at a recorded time, shape ``(paths, particles)``."""
        idx = np.flatnonzero(np.isclose(self.times, t, rtol=0, atol=1e-12))
        if idx.size == 0:
            raise KeyError(f"time {t} was not recorded")
        return self.reduced[:, :, idx[0]]

    def order_violations(self):
        """Count stored slices (of healthy paths) that leave the chamber/alcove."""
        v = self.values[self.ok]
        if v.shape[1] < 2:
            return 0
        bad = np.any(np.diff(v, axis=1) <= 0, axis=1)
        if self.spec.kind == CIRCLE:
            bad |= v[:, -1, :] >= v[:, 0, :] + 2 * math.pi * self.spec.radius
        return int(bad.sum())

    def to_csv(self, path_or_file, comment=None):
        """Dump as ``path,particle,t,x`` rows (reduced coordinates)."""
        red = self.reduced
        p, n, m = red.shape
        pi, ni, ti = np.meshgrid(np.arange(p), np.arange(n), np.arange(m), indexing="ij")
        def emit(fh):
            if comment:
                fh.write("# " + comment + "\n")
            fh.write("path,particle,t,x\n")
            for a, b, c in zip(pi.ravel(), ni.ravel(), ti.ravel()):
                fh.write(f"{a},{b},{format(self.times[c], '.17g')},{format(red[a, b, c], '.17g')}\n")
        if hasattr(path_or_file, "write"):
            emit(path_or_file)
        else:
            with open(path_or_file, "w", encoding="utf-8", newline="\n") as fh:
                emit(fh)


# ----------------------------------------------------------------------------
# scalar kernels (compiled by numba; also run as plain Python on fallback)

@njit(cache=True)
def _valid(kind, r, x):
    n = x.shape[0]
    for j in range(n - 1):
        if not x[j + 1] > x[j]:
            return False
    if kind == 2 and n > 1:
        if not x[n - 1] < x[0] + 2.0 * np.pi * r:
            return False
    if kind == 1:
        for j in range(n):
            if x[j] < 0.0:
                return False
    return True


@njit(cache=True)
def _propose(kind, nu, r, x, h, seed, path, step, attempt, out):
    n = x.shape[0]
    sq = np.sqrt(h)
    for j in range(n):
        b = 0.0
        xj = x[j]
        for k in range(n):
            if k != j:
                if kind == 0:
                    b += 1.0 / (xj - x[k])
                elif kind == 1:
                    b += 4.0 * xj / (xj - x[k])
                else:
                    b += 1.0 / np.tan((xj - x[k]) / (2.0 * r))
        z = normal(seed, path, step, attempt * n + j)
        if kind == 0:
            out[j] = xj + b * h + sq * z
        elif kind == 1:
            xp = xj if xj > 0.0 else 0.0
            v = xj + (2.0 * (nu + 1.0) + b) * h + 2.0 * np.sqrt(xp) * sq * z
            out[j] = v if v > 0.0 else 0.0
        else:
            out[j] = xj + b * h / (2.0 * r) + sq * z


@njit(cache=True)
def _advance(kind, nu, r, x, dt, seed, path, step, adaptive, work, stats):
    """One base step for one path, in place. Returns False on failure.

    ``stats`` accumulates (accepted substeps, halvings).
    """
    rem = 1024
    hu = 1024
    attempt = 0
    while rem > 0:
        use = hu if hu < rem else rem
        _propose(kind, nu, r, x, dt * use / 1024.0, seed, path, step, attempt, work)
        attempt += 1
        if _valid(kind, r, work):
            for j in range(x.shape[0]):
                x[j] = work[j]
            rem -= use
            stats[0] += 1
            if hu < 1024:
                hu *= 2
        else:
            if not adaptive or hu == 1:
                return False
            hu //= 2
            stats[1] += 1
    return True


@njit(cache=True, parallel=True)
def _run_numba(kind, nu, r, x0, dt, nsteps, seed, rec, adaptive, paths, out, failed, stats):
    n = x0.shape[0]
    for p in prange(paths):
        x = x0.copy()
        work = np.empty(n)
        st = stats[p]
        col = 0
        if rec[0]:
            for j in range(n):
                out[p, j, col] = x[j]
            col += 1
        ok = True
        for s in range(nsteps):
            if ok:
                ok = _advance(kind, nu, r, x, dt, seed, p, s, adaptive, work, st)
            if rec[s + 1]:
                for j in range(n):
                    out[p, j, col] = x[j] if ok else np.nan
                col += 1
        failed[p] = not ok


def _drift_numpy(kind, r, x):
    n = x.shape[1]
    b = np.zeros_like(x)
    for j in range(n):
        acc = np.zeros(x.shape[0])
        for k in range(n):
            if k == j:
                continue
            d = x[:, j] - x[:, k]
            if kind == 0:
                acc = acc + 1.0 / d
            elif kind == 1:
                acc = acc + 4.0 * x[:, j] / d
            else:
                acc = acc + 1.0 / np.tan(d / (2.0 * r))
        b[:, j] = acc
    return b


def _valid_numpy(kind, r, x):
    ok = np.all(np.diff(x, axis=1) > 0, axis=1)
    if kind == 2 and x.shape[1] > 1:
        ok &= x[:, -1] < x[:, 0] + 2.0 * np.pi * r
    if kind == 1:
        ok &= np.all(x >= 0, axis=1)
    return ok


def _run_numpy(kind, nu, r, x0, dt, nsteps, seed, rec, adaptive, paths, out, failed, stats):
    """Vectorised full steps; paths whose full step is rejected are redone
    one at a time with the scalar kernel and the same noise keys."""
    n = x0.shape[0]
    x = np.tile(x0, (paths, 1))
    pidx = np.arange(paths)
    col = 0
    if rec[0]:
        out[:, :, col] = x
        col += 1
    alive = np.ones(paths, dtype=bool)
    draws = np.arange(n)
    work = np.empty(n)
    for s in range(nsteps):
        z = normal_array(seed, pidx[:, None], s, draws[None, :])
        b = _drift_numpy(kind, r, x)
        if kind == 0:
            prop = x + b * dt + math.sqrt(dt) * z
        elif kind == 1:
            xp = np.maximum(x, 0.0)
            prop = x + (2.0 * (nu + 1.0) + b) * dt + 2.0 * np.sqrt(xp) * math.sqrt(dt) * z
            prop = np.maximum(prop, 0.0)
        else:
            prop = x + b * dt / (2.0 * r) + math.sqrt(dt) * z
        good = _valid_numpy(kind, r, prop) & alive
        x[good] = prop[good]
        stats[good, 0] += 1
        for p in np.flatnonzero(alive & ~good):
            xp_ = x[p].copy()
            if _advance(kind, nu, r, xp_, dt, seed, p, s, adaptive, work, stats[p]):
                x[p] = xp_
            else:
                alive[p] = False
        if rec[s + 1]:
            snap = x.copy()
            snap[~alive] = np.nan
            out[:, :, col] = snap
            col += 1
    failed[:] = ~alive


def _record_mask(record_times, dt, nsteps):
    if record_times is None:
        idx = np.array([0, nsteps])
    else:
        rt = np.asarray(record_times, dtype=float)
        idx = np.rint(rt / dt).astype(np.int64)
        if np.any(np.abs(idx * dt - rt) > 1e-9 * max(1.0, dt)) or np.any(idx < 0) or np.any(idx > nsteps):
            raise ValueError("record times must be multiples of dt within [0, t_end]")
    mask = np.zeros(nsteps + 1, dtype=np.bool_)
    mask[idx] = True
    return mask


def simulate(spec, start, sde, record_times=None, backend=None, threads=None):
    """Run the interacting system from the labelled start ``start``."""
    x0 = np.ascontiguousarray(np.asarray(start, dtype=float).ravel())
    kind = _KIND_CODE[spec.kind]
    if spec.kind == CIRCLE:
        if not configspace.in_alcove(spec.radius, x0):
            raise ValueError("circle start must be ordered within one period")
    elif not configspace.in_weyl_chamber(x0):
        raise ValueError("start must be strictly increasing")
    if spec.kind == BESQ and np.any(x0 < 0):
        raise ValueError("BESQ start must be nonnegative")
    nsteps = sde.steps
    rec = _record_mask(record_times, sde.dt, nsteps)
    times = np.flatnonzero(rec) * sde.dt
    paths = int(sde.paths)
    out = np.empty((paths, len(x0), int(rec.sum())))
    failed = np.zeros(paths, dtype=np.bool_)
    stats = np.zeros((paths, 2), dtype=np.int64)
    backend = backend or _accel.default_backend()
    args = (kind, float(spec.nu), float(spec.radius), x0, float(sde.dt), nsteps, np.uint64(sde.seed),
            rec, sde.scheme == ADAPTIVE, paths, out, failed, stats)
    if backend == "numba":
        if not _accel.USE_NUMBA:
            raise RuntimeError("numba backend requested but disabled")
        _accel.set_threads(threads)
        _run_numba(*args)
    elif backend == "numpy":
        _run_numpy(*args)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    summary = {
        "backend": backend,
        "accepted_substeps": int(stats[:, 0].sum()),
        "halvings": int(stats[:, 1].sum()),
        "failed_paths": int(failed.sum()),
    }
    return PathEnsemble(spec, x0, times, out, int(sde.seed), failed, summary)


def simulate_dyson(config, sde, record_times=None, **kw):
    _require_simple(config)
    return simulate(ProcessSpec.bm(), config.points(), sde, record_times, **kw)


def simulate_besq(nu, config, sde, record_times=None, **kw):
    _require_simple(config)
    return simulate(ProcessSpec.besq(nu), config.points(), sde, record_times, **kw)


def simulate_circle(r, config, sde, record_times=None, **kw):
    _require_simple(config)
    return simulate(ProcessSpec.circle(r, config.total), config.points(), sde, record_times, **kw)


def _require_simple(config):
    if not config.is_simple():
        raise ValueError("path simulation needs a simple configuration")


def simulate_elementary(spec, start, sde, record_times=None):
    """Independent one-particle paths from each entry of ``start``, sampled exactly.

    BM: Gaussian increments. BESQ: noncentral chi-square transitions.
    Circle: BM reduced mod ``2 pi r``; only odd particle counts are allowed,
    since the even-N kernel is signed and has no path law.
    """
    if spec.kind == CIRCLE and not spec.odd:
        raise ValueError("the even-N circle kernel is signed: no elementary path sampler")
    x0 = np.asarray(start, dtype=float).ravel()
    if spec.kind == BESQ and np.any(x0 < 0):
        raise ValueError("BESQ start must be nonnegative")
    nsteps = sde.steps
    rec = _record_mask(record_times, sde.dt, nsteps)
    times = np.flatnonzero(rec) * sde.dt
    paths, n = int(sde.paths), len(x0)
    gen = np.random.Generator(np.random.Philox(key=int(sde.seed)))
    out = np.empty((paths, n, len(times)))
    cur = np.tile(x0, (paths, 1))
    prev_t = 0.0
    for c, t in enumerate(times):
        h = t - prev_t
        if h > 0:
            if spec.kind == BESQ:
                df = 2.0 * (spec.nu + 1.0)
                cur = h * gen.noncentral_chisquare(df, cur / h) if np.all(cur > 0) else \
                    h * _ncx2_allow_zero(gen, df, cur / h)
            else:
                cur = cur + math.sqrt(h) * gen.standard_normal(cur.shape)
        out[:, :, c] = cur
        prev_t = t
    return PathEnsemble(spec, x0, times, out, int(sde.seed), np.zeros(paths, dtype=bool),
                        {"backend": "exact"}, interacting=False)


def _ncx2_allow_zero(gen, df, nc):
    out = np.empty(nc.shape)
    zero = nc == 0
    out[zero] = gen.chisquare(df, int(zero.sum()))
    out[~zero] = gen.noncentral_chisquare(df, nc[~zero])
    return out
