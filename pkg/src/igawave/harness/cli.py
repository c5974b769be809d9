"""Command-line entry point: ``igawave {pwave,elasticity,convergence,stability,bench}``."""
import argparse
import sys
from pathlib import Path

import numpy as np

from ..linalg import SingularMatrixError
from .config import ConfigError, load_config, parse_config_text
from .drivers import (NumericalError, run_convergence, run_elasticity, run_pwave,
                      run_scaling_bench, run_stability_sweep)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

# per-subcommand defaults, then the production-scale settings enabled by --full
_DEFAULTS = {
    "pwave": {"kind": "pwave3d", "elements": (16,)},
    "elasticity": {"kind": "elasticity2d", "elements": (16,)},
    "convergence": {"kind": "pwave2d", "elements": (32,), "degree": 3, "tau": 0.02},
    "stability": {"kind": "pwave2d", "elements": (16,)},
    "bench": {"kind": "pwave3d"},
}
_FULL = {
    "pwave": {"elements": (32,), "tau": 0.01},
    "elasticity": {"elements": (32,), "tau": 0.01},
    "convergence": {"elements": (64,)},
    "stability": {"elements": (32,)},
    "bench": {"sizes": (8, 16, 32, 64)},
}


def _common(p):
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--elements", help="elements per direction: n[,m[,l]]")
    p.add_argument("--degree", help="spline degree")
    p.add_argument("--tau", help="time step")
    p.add_argument("--steps", help="number of time steps")
    p.add_argument("--full", action="store_true", help="production-scale configuration")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any configuration key (repeatable)")
    p.add_argument("--no-plots", action="store_true", help="skip PNG figures")


def build_parser():
    parser = argparse.ArgumentParser(prog="igawave", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [("pwave", "scalar wave run with energy history"),
                        ("elasticity", "2D elastic wave run with energy and norm history"),
                        ("convergence", "time-step refinement study"),
                        ("stability", "spectral radius sweep over time steps"),
                        ("bench", "per-step timing against problem size")]:
        p = sub.add_parser(name, help=help_)
        _common(p)
        if name == "convergence":
            p.add_argument("--levels", type=int, help="number of tau halvings (>= 3)")
        if name == "stability":
            p.add_argument("--taus", help="comma-separated time steps")
        if name == "bench":
            p.add_argument("--sizes", help="comma-separated elements per direction")
    return parser


def config_from_args(args):
    """Subcommand defaults < config file < --full < explicit flags and --set."""
    values = dict(_DEFAULTS[args.command])
    if args.config:
        try:
            values.update(parse_config_text(Path(args.config).read_text(encoding="utf-8")))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
    if args.full:
        values.update(_FULL[args.command], full=True)
    for key in ("out", "elements", "degree", "tau", "steps", "levels", "taus", "sizes"):
        val = getattr(args, key, None)
        if val is not None:
            values[key] = str(val)
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        values[k.strip()] = v
    if args.no_plots:
        values["plots"] = False
    return load_config(overrides=values)


def _report(args, cfg):
    if args.command == "pwave":
        res = run_pwave(cfg)
        print(f"{cfg.kind} {cfg.elements} p={cfg.degree} tau={cfg.tau}: "
              f"{len(res.records) - 1} steps, relative energy drift {res.relative_drift():.3e}")
    elif args.command == "elasticity":
        res = run_elasticity(cfg)
        star = np.array([s[2] for s in res.star])
        rise = float(np.diff(star).max()) if star.size > 1 else 0.0
        print(f"elasticity2d {cfg.elements} p={cfg.degree} tau={cfg.tau}: "
              f"relative energy drift {res.relative_drift():.3e}, largest norm increase {rise:.3e}")
    elif args.command == "convergence":
        res = run_convergence(cfg)
        for t, e in zip(res.taus, res.errors):
            print(f"tau={t:.6g} error={e:.6e}")
        print(f"slope {res.slope:.4f}")
    elif args.command == "stability":
        # an explicit --taus is used as given, so an empty list is an error
        rows, _ = run_stability_sweep(cfg, taus=cfg.taus if args.taus is not None else None)
        print(f"{len(rows)} time steps, max spectral radius {max(r for _, r in rows):.15g}")
    else:
        res = run_scaling_bench(cfg)
        for n, s, v in zip(res.unknowns, res.seconds, res.solve_seconds):
            print(f"N={n} seconds_per_step={s:.4e} solve_seconds={v:.4e}")
        print(f"log-log slope: full step {res.slope:.3f}, split solve {res.solve_slope:.3f}")
    print(f"outputs in {cfg.out}")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        _report(args, cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularMatrixError, NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
