"""Command-line front end: ``ncdk kernel | simulate | validate | relax``.

Exit codes: 0 success, 1 numerical failure (or a failed validation), 2 bad
configuration. A ``--params FILE`` of ``key = value`` lines supplies defaults
that explicit flags override.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .configspace import Configuration
from .transition import ProcessSpec

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    """Aggregated configuration problems."""

    def __init__(self, problems):
        self.problems = list(dict.fromkeys(problems))
        super().__init__("; ".join(self.problems))


# defaults applied after the params file, so "flag given" is distinguishable
_DEFAULTS = {
    "process": None, "config": None, "nu": 0.0, "radius": 1.0, "drift": 0.0,
    "s": None, "t": None, "grid": "-4:4:81", "named": None, "n": None, "r": None, "rho": None,
    "out": None, "seed": 0, "dt": 1e-3, "t_end": None, "paths": None, "scheme": "euler_adaptive",
    "record": None, "dump_paths": False, "threads": None, "backend": None,
    "check": None, "all": False, "fast": False,
    "t_max": None, "steps": 11, "t_list": None,
}


def _flt(v):
    return format(float(v), ".17g")


def read_params(path):
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError([f"{path}:{lineno}: expected key = value"])
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def _coerce(key, value):
    default = _DEFAULTS.get(key)
    if isinstance(default, bool):
        return str(value).lower() in ("1", "true", "yes", "on")
    if key in ("seed", "paths", "n", "steps", "threads"):
        return int(value)
    if key in ("nu", "radius", "drift", "s", "t", "r", "rho", "dt", "t_end", "t_max"):
        return float(value)
    return value


def merge(args):
    """Fill unset flags from the params file, then from built-in defaults."""
    problems = []
    file_vals = {}
    if getattr(args, "params", None):
        try:
            file_vals = read_params(args.params)
        except OSError as exc:
            problems.append(f"cannot read params file: {exc}")
        except ConfigError as exc:
            problems.extend(exc.problems)
    for key, default in _DEFAULTS.items():
        if not hasattr(args, key):
            continue
        if getattr(args, key) is None or (getattr(args, key) is False and key in file_vals):
            if key in file_vals:
                try:
                    setattr(args, key, _coerce(key, file_vals[key]))
                except ValueError:
                    problems.append(f"bad value for {key}: {file_vals[key]!r}")
            else:
                setattr(args, key, default)
    unknown = set(file_vals) - set(_DEFAULTS)
    if unknown:
        problems.append("unknown keys in params file: " + ", ".join(sorted(unknown)))
    return problems


def _spec(args, problems, particles=1):
    if args.process is None:
        problems.append("--process is required")
        return None
    try:
        kind = args.process.lower()
        if kind in ("circle", "circlebm"):
            return ProcessSpec.circle(args.radius, particles)
        if kind == "besq":
            return ProcessSpec.besq(args.nu)
        return ProcessSpec(kind)
    except ValueError as exc:
        problems.append(str(exc))
        return None


def _configuration(args, problems, spec):
    if args.config is None:
        problems.append("--config is required")
        return None
    try:
        radius = spec.radius if spec is not None and spec.kind == "CircleBM" else None
        return Configuration.parse(args.config, radius=radius)
    except ValueError as exc:
        problems.append(f"bad --config: {exc}")
        return None


def parse_grid(text):
    """``lo:hi:count`` -> ``count`` equally spaced points including both ends."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be lo:hi:count, got {text!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1 or (n > 1 and not hi > lo):
        raise ValueError(f"bad grid {text!r}")
    return np.linspace(lo, hi, n)


def _floats(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _comment(args, **extra):
    fields = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "params") and v is not None}
    fields.update(extra)
    return f"ncdk {__version__} " + " ".join(f"{k}={v}" for k, v in fields.items())


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


# ----------------------------------------------------------------------------

def cmd_kernel(args):
    from . import kernel as K
    problems = merge(args)
    grid = None
    try:
        grid = parse_grid(args.grid)
    except ValueError as exc:
        problems.append(str(exc))
    for name in ("s", "t"):
        v = getattr(args, name)
        if v is None:
            problems.append(f"--{name} is required")
        elif not v > 0:
            problems.append(f"--{name} must be positive")
    if args.named:
        name = args.named.lower()
        fn = None
        if name == "hermite":
            if not args.n or args.n < 1:
                problems.append("--n (particle count) is required for the Hermite kernel")
            fn = lambda s, x, t, y: K.extended_hermite(args.n, s, x, t, y)
        elif name == "laguerre":
            if not args.n or args.n < 1:
                problems.append("--n (particle count) is required for the Laguerre kernel")
            if not args.nu > -1:
                problems.append("--nu must exceed -1")
            if grid is not None and grid.min() < 0:
                problems.append("the Laguerre kernel needs a grid in [0, inf)")
            fn = lambda s, x, t, y: K.extended_laguerre(args.nu, args.n, s, x, t, y)
        elif name == "cue":
            r = args.r if args.r is not None else args.radius
            if not args.n or args.n < 1:
                problems.append("--n (particle count) is required for the circle kernel")
            if not r > 0:
                problems.append("--r must be positive")
            fn = lambda s, x, t, y: K.eq_circle_kernel(r, args.n, t - s, y - x)
        elif name == "sine":
            if args.rho is None or not args.rho > 0:
                problems.append("--rho must be positive for the sine kernel")
            fn = lambda s, x, t, y: K.extended_sine(args.rho, t - s, y - x)
        else:
            problems.append(f"unknown named kernel {args.named!r} (hermite, laguerre, cue, sine)")
        if problems:
            raise ConfigError(problems)
        rows = [(args.s, x, args.t, y, fn(args.s, x, args.t, y)) for x in grid for y in grid]
    else:
        cfg0 = _configuration(args, problems, None) if args.config is not None else None
        spec = _spec(args, problems, cfg0.total if cfg0 else 1)
        cfg = _configuration(args, problems, spec)
        if problems:
            raise ConfigError(problems)
        try:
            kern = K.CorrelationKernel(spec, cfg, drift=args.drift)
        except ValueError as exc:
            raise ConfigError([str(exc)])
        if spec.kind == "BESQ" and grid.min() < 0:
            raise ConfigError(["BESQ kernels need a grid in [0, inf)"])
        vals = kern(args.s, grid[:, None], args.t, grid[None, :])
        if not np.all(np.isfinite(vals)):
            raise ArithmeticError("non-finite kernel values")
        rows = [(args.s, x, args.t, y, vals[i, j]) for i, x in enumerate(grid) for j, y in enumerate(grid)]
    fh, close = _open_out(args.out)
    try:
        K.write_kernel_csv(fh, rows, comment=_comment(args))
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_simulate(args):
    from . import sde as S
    problems = merge(args)
    cfg0 = _configuration(args, problems, None) if args.config is not None else None
    spec = _spec(args, problems, cfg0.total if cfg0 else 1)
    cfg = _configuration(args, problems, spec) if spec is not None else None
    if cfg is not None and not cfg.is_simple():
        problems.append("simulation needs distinct starting points")
    if args.t_end is None:
        problems.append("--t-end is required")
    if args.paths is None:
        problems.append("--paths is required")
    record = None
    if args.record:
        try:
            record = _floats(args.record)
        except ValueError:
            problems.append(f"bad --record {args.record!r}")
    sde = None
    if not problems:
        try:
            sde = S.SdeConfig(args.dt, args.t_end, args.paths, args.seed, args.scheme)
        except ValueError as exc:
            problems.append(str(exc))
    if problems:
        raise ConfigError(problems)
    if record is None:
        record = [0.0, sde.steps * sde.dt]
    try:
        ens = S.simulate(spec, cfg.points(), sde, record, backend=args.backend, threads=args.threads)
    except ValueError as exc:
        raise ConfigError([str(exc)])
    print(json.dumps(ens.stats, sort_keys=True), file=sys.stderr)
    fh, close = _open_out(args.out)
    try:
        comment = _comment(args)
        if args.dump_paths:
            ens.to_csv(fh, comment=comment)
        else:
            fh.write("# " + comment + "\n")
            fh.write("t,particle,mean,stderr\n")
            red = ens.reduced[ens.ok]
            for c, t in enumerate(ens.times):
                for j in range(ens.particles):
                    v = red[:, j, c]
                    se = v.std(ddof=1) / math.sqrt(len(v)) if len(v) > 1 else 0.0
                    fh.write(f"{_flt(t)},{j},{_flt(v.mean())},{_flt(se)}\n")
    finally:
        if close:
            fh.close()
    return EXIT_NUMERIC if ens.stats["failed_paths"] else EXIT_OK


def cmd_validate(args):
    from . import harness as H
    problems = merge(args)
    if args.all:
        names = list(H.CHECKS)
    elif args.check:
        names = [c.strip() for c in args.check.split(",") if c.strip()]
        bad = [n for n in names if n not in H.CHECKS]
        if bad:
            problems.append("unknown check(s): " + ", ".join(bad) + "; known: " + ", ".join(H.CHECKS))
    else:
        problems.append("give --check NAME or --all")
    if problems:
        raise ConfigError(problems)
    reports = H.run_checks(names, fast=args.fast, seed=args.seed)
    fh, close = _open_out(args.out)
    try:
        for rep in reports:
            fh.write(rep.to_json() + "\n")
    finally:
        if close:
            fh.close()
    for rep in reports:
        print(f"{'PASS' if rep.passed else 'FAIL'} {rep.check}", file=sys.stderr)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_NUMERIC


def cmd_relax(args):
    from . import harness as H
    problems = merge(args)
    r = args.r if args.r is not None else args.radius
    if not args.n or args.n < 1:
        problems.append("--n (particle count) is required")
    if not r > 0:
        problems.append("--r must be positive")
    if args.t_list:
        try:
            T = _floats(args.t_list)
        except ValueError:
            problems.append(f"bad --t-list {args.t_list!r}")
    else:
        T = None
    if problems:
        raise ConfigError(problems)
    if T is None:
        tmax = args.t_max if args.t_max is not None else 20.0 * r * r / args.n
        T = np.linspace(0.0, tmax, max(2, args.steps)).tolist()
    tab = H.relaxation_scan(r, args.n, T)
    fh, close = _open_out(args.out)
    try:
        fh.write("# " + _comment(args, monotone=tab.monotone) + "\n")
        fh.write("T,distance\n")
        for t, d in tab.rows():
            fh.write(f"{_flt(t)},{_flt(d)}\n")
    finally:
        if close:
            fh.close()
    return EXIT_OK


# ----------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="ncdk", description="Noncolliding diffusions as determinantal processes.")
    p.add_argument("--version", action="version", version=f"ncdk {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--params", help="key = value file supplying defaults")
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--seed", type=int)

    def process(sp):
        sp.add_argument("--process", help="dyson | besq | circle")
        sp.add_argument("--config", help='initial configuration, e.g. "-1,0,1" or "0*3"')
        sp.add_argument("--nu", type=float)
        sp.add_argument("--radius", type=float)

    k = sub.add_parser("kernel", help="kernel values on a grid")
    common(k)
    process(k)
    k.add_argument("--named", help="hermite | laguerre | cue | sine")
    k.add_argument("--s", type=float)
    k.add_argument("--t", type=float)
    k.add_argument("--grid", help="lo:hi:count")
    k.add_argument("--n", type=int, help="particle count for named kernels")
    k.add_argument("--r", type=float, help="circle radius for the cue kernel")
    k.add_argument("--rho", type=float, help="density for the sine kernel")
    k.add_argument("--drift", type=float)
    k.set_defaults(func=cmd_kernel)

    s = sub.add_parser("simulate", help="simulate the interacting system")
    common(s)
    process(s)
    s.add_argument("--dt", type=float)
    s.add_argument("--t-end", type=float, dest="t_end")
    s.add_argument("--paths", type=int)
    s.add_argument("--scheme", choices=["euler", "euler_adaptive"])
    s.add_argument("--record", help="comma-separated record times")
    s.add_argument("--dump-paths", action="store_true", default=None, dest="dump_paths")
    s.add_argument("--threads", type=int)
    s.add_argument("--backend", choices=["numba", "numpy"])
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("validate", help="run validation checks")
    common(v)
    v.add_argument("--check", help="check name(s), comma-separated")
    v.add_argument("--all", action="store_true", default=None)
    v.add_argument("--fast", action="store_true", default=None)
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("relax", help="distance to equilibrium from equidistant start")
    common(r)
    r.add_argument("--r", type=float)
    r.add_argument("--radius", type=float)
    r.add_argument("--n", type=int)
    r.add_argument("--t-list", dest="t_list")
    r.add_argument("--t-max", type=float, dest="t_max")
    r.add_argument("--steps", type=int)
    r.set_defaults(func=cmd_relax)
    return p


_DASH_VALUED = ("--config", "--grid", "--record", "--t-list")


def _glue_negative_values(argv):
    """``--config -1,0,1`` -> ``--config=-1,0,1`` so argparse sees a value."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _DASH_VALUED:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            elif nxt.startswith("-") and not nxt.startswith("--"):
                out.append(f"{tok}={nxt}")
            else:
                out.extend([tok, nxt])
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    argv = _glue_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print("configuration error:\n  " + "\n  ".join(exc.problems), file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
