"""Experiment drivers: time-domain runs, convergence study, stability sweep, timing."""
import gc
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import elasticity as el
from .. import pwave
from ..assembly import assemble_mass, assemble_stiffness, l2_project
from ..splines import make_uniform_space
from ..stability import generalized_eig, spectral_radius_sweep
from .config import ConfigError, config_echo
from .output import (EnergyRecord, plot_energy, plot_field, plot_series, write_csv,
                     write_energy_csv, write_vtk)


class NumericalError(ArithmeticError):
    """A run produced non-finite values."""


@dataclass
class RunResult:
    records: list
    files: list = field(default_factory=list)
    state: object = None
    star: list = field(default_factory=list)

    @property
    def totals(self):
        return np.array([r.total for r in self.records])

    def relative_drift(self):
        tot = self.totals
        if tot[0] == 0.0:
            return float(np.abs(tot).max())
        return float(np.abs(tot - tot[0]).max() / abs(tot[0]))


@dataclass
class ConvergenceResult:
    taus: np.ndarray
    errors: np.ndarray
    slope: float
    files: list = field(default_factory=list)


@dataclass
class BenchResult:
    sizes: list
    unknowns: np.ndarray
    seconds: np.ndarray
    solve_seconds: np.ndarray
    slope: float
    solve_slope: float
    files: list = field(default_factory=list)


def make_spaces(cfg):
    return [make_uniform_space(cfg.degree, n) for n in cfg.elements]


def gaussian(center, width):
    def f(*X):
        return np.exp(-sum((x - c) ** 2 for x, c in zip(X, center)) / (2 * width ** 2))
    return f


def pwave_mode(modes, t=0.0):
    """Product of cosines; an exact solution of u'' = Laplace(u) with natural BC."""
    omega = np.pi * np.sqrt(sum(k * k for k in modes))

    def f(*X):
        out = np.cos(omega * t)
        for x, k in zip(X, modes):
            out = out * np.cos(k * np.pi * x)
        return out
    return f


def shear_mode(k, mat, t=0.0):
    """Divergence-free, traction-free shear mode of the Lame system on the unit square."""
    c = np.cos(k * np.pi * np.sqrt(2 * mat.mu / mat.rho) * t)

    def ux(X, Y):
        return np.cos(k * np.pi * X) * np.sin(k * np.pi * Y) * c

    def uy(X, Y):
        return -np.sin(k * np.pi * X) * np.cos(k * np.pi * Y) * c
    return ux, uy


def _prepare_out(cfg, out_dir):
    out = Path(out_dir if out_dir is not None else cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    echo = out / "config.echo"
    echo.write_text(config_echo(cfg), encoding="utf-8")
    return out, [echo]


def _check_finite(record):
    if not np.isfinite(record.total):
        raise NumericalError(f"non-finite energy at step {record.step}")


def _snapshot_due(cfg, n):
    return cfg.output_every > 0 and (n % cfg.output_every == 0 or n == cfg.steps)


def run_pwave(cfg, out_dir=None):
    """Time-domain scalar wave run; writes energy.csv (every step) and snapshots."""
    if cfg.kind not in ("pwave2d", "pwave3d"):
        raise ConfigError(f"run_pwave needs a pwave kind, got {cfg.kind!r}")
    out, files = _prepare_out(cfg, out_dir)
    spaces = make_spaces(cfg)
    op = pwave.build_split_operator(spaces, cfg.tau)
    u0 = {"gaussian": gaussian(cfg.center, cfg.width),
          "mode": pwave_mode(cfg.modes),
          "translation": lambda *X: np.ones(np.broadcast(*X).shape),
          "zero": None}[cfg.init]
    state = pwave.initial_state(op, u0)

    def record(st):
        k, p, _ = pwave.energies(st, op, rho=cfg.rho)
        r = EnergyRecord.from_parts(st.n, st.t, k, p)
        _check_finite(r)
        return r

    def snapshot(st):
        if _snapshot_due(cfg, st.n):
            files.append(write_vtk(out / f"snapshot_{st.n}.vtk", spaces, {"u": st.U}))

    records = [record(state)]
    snapshot(state)
    for _ in range(cfg.steps):
        state = pwave.step(state, op, scheme=cfg.scheme)
        records.append(record(state))
        snapshot(state)
    files.append(write_energy_csv(out / "energy.csv", records))
    if cfg.plots:
        files.append(plot_energy(out / "energy.png", records, title=f"{cfg.kind} energy"))
        files.append(plot_field(out / "field.png", spaces, state.U, title=f"u at t={state.t:.3g}"))
    return RunResult(records=records, files=files, state=state)


def elastic_initial(cfg, op):
    """Displacement pair at t = 0 for the configured initial condition."""
    if cfg.init == "gaussian":
        return el.project_displacement(op, gaussian(cfg.center, cfg.width), None)
    if cfg.init == "mode":
        return el.project_displacement(op, *shear_mode(cfg.modes[0], op.mat))
    U = np.zeros((2,) + op.dims)
    if cfg.init == "translation":
        U[0] = 1.0
    return U


def run_elasticity(cfg, out_dir=None):
    """Elastic wave run: Taylor bootstrap, then predictor-corrector steps.

    Writes energy.csv and starnorm.csv (columns for the three norm variants).
    Every row uses the velocity (U^n - U^{n-1})/tau and the time-centred
    displacement of the last two levels; row 0 takes its previous level from
    a backward Taylor step.
    """
    if not cfg.is_elastic:
        raise ConfigError(f"run_elasticity needs kind elasticity2d, got {cfg.kind!r}")
    out, files = _prepare_out(cfg, out_dir)
    spaces = make_spaces(cfg)
    mat = el.MaterialParams(cfg.rho, cfg.mu, cfg.lam)
    op = el.build_elastic_operator(spaces, mat, cfg.tau, sigma=cfg.sigma)
    U0 = elastic_initial(cfg, op)
    records, star = [], []

    def snapshot(st):
        if _snapshot_due(cfg, st.n):
            files.append(write_vtk(out / f"snapshot_{st.n}.vtk", spaces,
                                   {"displacement": list(st.U)}))

    state = el.initial_state(U0, None, op)
    while True:
        k, p, _ = el.energies(state, op)
        r = EnergyRecord.from_parts(state.n, state.t, k, p)
        _check_finite(r)
        records.append(r)
        star.append((state.n, state.t) + tuple(el.star_norm(state, op, v)
                                                for v in el.STAR_VARIANTS))
        snapshot(state)
        if state.n >= cfg.steps:
            break
        state = el.bootstrap_first_step(U0, None, op) if state.n == 0 else el.step(state, op)
    files.append(write_energy_csv(out / "energy.csv", records))
    files.append(write_csv(out / "starnorm.csv",
                           ("step", "time") + tuple(f"{v}_norm" for v in el.STAR_VARIANTS), star))
    if cfg.plots:
        files.append(plot_energy(out / "energy.png", records, title="elastic energy"))
        s = np.array(star)
        files.append(plot_series(out / "starnorm.png", s[:, 1],
                                 {v: s[:, 2 + i] for i, v in enumerate(el.STAR_VARIANTS)},
                                 "time", "norm", title="discrete energy norms", marker=None))
        files.append(plot_field(out / "field.png", spaces, state.U[0],
                                title=f"u_x at t={state.t:.3g}"))
    return RunResult(records=records, files=files, state=state, star=star)


def loglog_slope(x, y):
    """Least-squares slope of log y against log x; NaN when all x coincide."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    if np.ptp(lx) == 0:
        return float("nan")
    return float(np.polyfit(lx, ly, 1)[0])


def _pwave_terminal_error(cfg, spaces, tau, steps):
    op = pwave.build_split_operator(spaces, tau)
    state = pwave.initial_state(op, pwave_mode(cfg.modes))
    for _ in range(steps):
        state = pwave.step(state, op, scheme=cfg.scheme)
    d = state.U - l2_project(pwave_mode(cfg.modes, state.t), spaces, op.mass_op)
    return np.sqrt(float(np.vdot(d, op.apply_mass(d))))


def _elastic_terminal_error(cfg, spaces, tau, steps):
    mat = el.MaterialParams(cfg.rho, cfg.mu, cfg.lam)
    op = el.build_elastic_operator(spaces, mat, tau, sigma=cfg.sigma)
    U0 = el.project_displacement(op, *shear_mode(cfg.modes[0], mat))
    state = el.bootstrap_first_step(U0, None, op)
    while state.n < steps:
        state = el.step(state, op)
    d = state.U - el.project_displacement(op, *shear_mode(cfg.modes[0], mat, state.t))
    return np.sqrt(float(np.vdot(d, op.apply_mass(d))))


def run_convergence(cfg, levels=None, out_dir=None):
    """Time-step refinement study against a manufactured mode on a fixed mesh.

    Runs tau, tau/2, ... to ``t_final`` and measures the L2 distance between
    the computed field and the projection of the exact solution, so only the
    time discretization error is seen.
    """
    levels = cfg.levels if levels is None else levels
    if levels < 3:
        raise ConfigError(f"a convergence study needs at least 3 levels, got {levels}")
    out, files = _prepare_out(cfg, out_dir)
    spaces = make_spaces(cfg)
    taus = cfg.tau / 2.0 ** np.arange(levels)
    run = _elastic_terminal_error if cfg.is_elastic else _pwave_terminal_error
    errors = []
    for tau in taus:
        steps = max(1, int(round(cfg.t_final / tau)))
        err = run(cfg, spaces, tau, steps)
        if not np.isfinite(err):
            raise NumericalError(f"non-finite error at tau={tau}")
        errors.append(err)
    errors = np.array(errors)
    slope = loglog_slope(taus, errors)
    files.append(write_csv(out / "convergence.csv", ("tau", "error"), zip(taus, errors)))
    if cfg.plots:
        files.append(plot_series(out / "convergence.png", taus, {"L2 error": errors}, "tau",
                                 "error", title=f"{cfg.kind}: slope {slope:.3f}", loglog=True))
    return ConvergenceResult(taus=taus, errors=errors, slope=slope, files=files)


def default_taus():
    return [0.0] + list(np.logspace(-3, 3, 25))


def run_stability_sweep(cfg, taus=None, out_dir=None):
    """Maximum modal spectral radius of the step for every tau; writes stability.csv."""
    taus = list(cfg.taus or default_taus()) if taus is None else list(taus)
    if not taus:
        raise ConfigError("empty time-step list")
    out, files = _prepare_out(cfg, out_dir)
    spaces = make_spaces(cfg)
    pencils = []
    for axis, s in enumerate(spaces):
        pencils.append(generalized_eig(assemble_stiffness(s), assemble_mass(s), "xyz"[axis]))
    rows = spectral_radius_sweep(pencils, taus, form=cfg.stability_form)
    files.append(write_csv(out / "stability.csv", ("tau", "max_radius"), rows))
    if cfg.plots:
        pos = [(t, r) for t, r in rows if t > 0]
        if pos:
            t, r = zip(*pos)
            plt_path = plot_series(out / "stability.png", t, {"max radius": r}, "tau",
                                   "spectral radius", title=f"{cfg.stability_form} step")
            files.append(plt_path)
    return rows, files


def time_steps(op, state, warmup=2, repeats=5):
    """Median wall times (full step, split solve alone) of P-wave steps after warm-up.

    The garbage collector is paused while timing, as ``timeit`` does.
    """
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        return _time_steps(op, state, warmup, repeats)
    finally:
        if gc_was_enabled:
            gc.enable()


def _time_steps(op, state, warmup, repeats):
    for _ in range(warmup):
        state = pwave.step(state, op)
    step_t, solve_t = [], []
    for _ in range(repeats):
        t0 = time.perf_counter()
        state = pwave.step(state, op)
        t1 = time.perf_counter()
        op.solve_lhs(state.Uddot)
        solve_t.append(time.perf_counter() - t1)
        step_t.append(t1 - t0)
    return float(np.median(step_t)), float(np.median(solve_t))


def run_scaling_bench(cfg, sizes=None, out_dir=None):
    """Per-step wall time of the P-wave step against the number of unknowns."""
    sizes = list(cfg.sizes if sizes is None else sizes)
    if len(sizes) < 3:
        raise ConfigError(f"scaling benchmark needs at least 3 sizes, got {len(sizes)}")
    if any(int(n) < 2 for n in sizes):
        raise ConfigError(f"sizes must be >= 2 elements per direction, got {sizes}")
    out, files = _prepare_out(cfg, out_dir)
    unknowns, seconds, solves = [], [], []
    for n in sizes:
        spaces = [make_uniform_space(cfg.degree, int(n))] * cfg.dim
        op = pwave.build_split_operator(spaces, cfg.tau)
        state = pwave.initial_state(op, gaussian(cfg.center, cfg.width))
        t_step, t_solve = time_steps(op, state, repeats=cfg.bench_steps)
        seconds.append(t_step)
        solves.append(t_solve)
        unknowns.append(int(np.prod(op.dims)))
    unknowns, seconds, solves = np.array(unknowns), np.array(seconds), np.array(solves)
    res = BenchResult(sizes=sizes, unknowns=unknowns, seconds=seconds, solve_seconds=solves,
                      slope=loglog_slope(unknowns, seconds),
                      solve_slope=loglog_slope(unknowns, solves), files=files)
    files.append(write_csv(out / "scaling.csv", ("N", "seconds_per_step", "solve_seconds"),
                           zip(unknowns, seconds, solves)))
    if cfg.plots:
        files.append(plot_series(out / "scaling.png", unknowns,
                                 {f"full step (slope {res.slope:.2f})": seconds,
                                  f"split solve (slope {res.solve_slope:.2f})": solves},
                                 "unknowns N", "seconds", loglog=True))
    return res
