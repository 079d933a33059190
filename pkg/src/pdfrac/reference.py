"""Finite-difference solver for the limiting wave equation
``rho u_tt = 2 mu lap u + b`` and the horizon-sweep harness that compares
peridynamic runs against it.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import _bonds
from .diagnostics import lefm_energy, unstable_centroids
from .dynamics import (BodyForceSpec, ModelSpec, default_dt, jump_set, make_initial_data,
                       run, sine_mode, with_dt)
from .errors import ConfigurationError
from .kernels import calibrate
from .lattice import DomainSpec, build_grid, build_neighborhoods


@dataclass(frozen=True)
class WaveConfig:
    """Leapfrog discretization of the wave equation on a node grid of
    spacing ``h_ref`` with ``u = 0`` on the boundary.

    ``u0`` and ``v0`` are callables ``(points, bounds) -> values`` or None.
    """

    rho: float
    mu: float
    h_ref: float
    dt_ref: float
    T: float
    u0: object = None
    v0: object = None
    b: BodyForceSpec = BodyForceSpec()
    bounds: tuple = (0.0, 1.0, 0.0, 1.0)

    def __post_init__(self):
        for key in ("rho", "mu", "h_ref", "dt_ref"):
            if not getattr(self, key) > 0:
                raise ConfigurationError("must be positive", key, "wave")
        if not self.T >= 0:
            raise ConfigurationError("must be non-negative", "T", "wave")
        x0, x1, y0, y1 = self.bounds
        for length in (x1 - x0, y1 - y0):
            n = length / self.h_ref
            if abs(n - round(n)) > 1e-9 * max(n, 1.0):
                raise ConfigurationError("domain is not a whole number of cells", "h_ref", "wave")
        if self.dt_ref > self.cfl_limit * (1 + 1e-12):
            raise ConfigurationError(
                f"CFL violated: dt_ref={self.dt_ref:.6g} > h_ref/(c sqrt 2)={self.cfl_limit:.6g}",
                "dt_ref", "wave")

    @property
    def wave_speed(self):
        return math.sqrt(2.0 * self.mu / self.rho)

    @property
    def cfl_limit(self):
        return self.h_ref / (self.wave_speed * math.sqrt(2.0))


@dataclass
class WaveTrajectory:
    x: np.ndarray
    y: np.ndarray
    times: np.ndarray
    fields: list
    dt: float

    def sample(self, t):
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 0.5 * self.dt:
            raise ValueError(f"no reference sample within dt/2 of t={t}")
        return WaveSample(t=float(self.times[k]), x=self.x, y=self.y, u=self.fields[k], dt=self.dt)


@dataclass
class WaveSample:
    t: float
    x: np.ndarray
    y: np.ndarray
    u: np.ndarray
    dt: float

    def at(self, points):
        interp = RegularGridInterpolator((self.x, self.y), self.u, method="linear",
                                         bounds_error=False, fill_value=0.0)
        return interp(np.atleast_2d(points))


def _laplacian(U, h):
    L = np.zeros_like(U)
    L[1:-1, 1:-1] = (U[2:, 1:-1] + U[:-2, 1:-1] + U[1:-1, 2:] + U[1:-1, :-2]
                     - 4.0 * U[1:-1, 1:-1]) / (h * h)
    return L


def wave_solve(cfg, sample_times=None):
    """Leapfrog integration with a second-order Taylor start.

    Fields are stored at the steps nearest to ``sample_times`` (default: every
    step) on the node grid including the boundary.
    """
    x0, x1, y0, y1 = cfg.bounds
    h = cfg.h_ref
    nx, ny = int(round((x1 - x0) / h)), int(round((y1 - y0) / h))
    x = x0 + h * np.arange(nx + 1)
    y = y0 + h * np.arange(ny + 1)
    X, Y = np.meshgrid(x, y, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    inner = np.zeros(X.shape, dtype=bool)
    inner[1:-1, 1:-1] = True

    def load(fn):
        if fn is None:
            return np.zeros(X.shape)
        return np.where(inner, np.asarray(fn(pts, cfg.bounds), float).reshape(X.shape), 0.0)

    if cfg.b.is_zero:
        b_shape = np.zeros(X.shape)
    elif cfg.b.kind == "constant":
        b_shape = inner.astype(float)
    else:
        b_shape = np.where(inner, sine_mode(1.0)(pts, cfg.bounds).reshape(X.shape), 0.0)

    def accel(U, t):
        return (2.0 * cfg.mu * _laplacian(U, h)
                + cfg.b.amplitude * math.cos(cfg.b.omega * t) * b_shape) / cfg.rho

    dt = cfg.dt_ref
    n_steps = int(math.floor(cfg.T / dt + 1e-9))
    wanted = None
    if sample_times is not None:
        wanted = {int(round(t / dt)) for t in sample_times}
    times, fields = [], []

    def keep(n, U):
        if wanted is None or n in wanted:
            times.append(n * dt)
            fields.append(U.copy())

    prev = load(cfg.u0)
    keep(0, prev)
    if n_steps == 0:
        return WaveTrajectory(x, y, np.array(times), fields, dt)
    cur = prev + dt * load(cfg.v0) + 0.5 * dt * dt * accel(prev, 0.0)
    cur[~inner] = 0.0
    keep(1, cur)
    for n in range(2, n_steps + 1):
        nxt = 2.0 * cur - prev + dt * dt * accel(cur, (n - 1) * dt)
        nxt[~inner] = 0.0
        prev, cur = cur, nxt
        keep(n, cur)
    return WaveTrajectory(x, y, np.array(times), fields, dt)


def field_error(pd_state, ref_sample, grid):
    """Cell-weighted L2(D) distance between a particle field and a reference
    sample interpolated bilinearly to the particle positions."""
    if abs(pd_state.t - ref_sample.t) > 0.5 * ref_sample.dt:
        raise ValueError(f"time mismatch: state at t={pd_state.t}, reference at t={ref_sample.t}")
    idx = grid.interior_indices
    diff = pd_state.u[idx] - ref_sample.at(grid.positions[idx])
    return math.sqrt(grid.cell_area * float(np.sum(diff ** 2)))


def l2_norm(values, grid):
    idx = grid.interior_indices
    return math.sqrt(grid.cell_area * float(np.sum(values[idx] ** 2)))


@dataclass
class SweepReport:
    """Per-horizon results of a convergence sweep, ordered by decreasing
    horizon."""

    eps: list
    errors: list = field(default_factory=list)
    reference_norm: float = 0.0
    max_abs_u: list = field(default_factory=list)
    initial_sup: float = 0.0
    energies: list = field(default_factory=list)
    initial_pd: list = field(default_factory=list)
    unstable: list = field(default_factory=list)
    sample_times: np.ndarray = None
    final_states: list = field(default_factory=list, repr=False)
    tables: list = field(default_factory=list, repr=False)
    complete: bool = True
    failures: dict = field(default_factory=dict)

    @property
    def relative_errors(self):
        if self.reference_norm == 0.0:
            return [0.0 if e == 0.0 else math.inf for e in self.errors]
        return [e / self.reference_norm for e in self.errors]

    def errors_decreasing(self):
        e = [x for x in self.errors if x is not None]
        return len(e) == len(self.eps) and all(b < a for a, b in zip(e, e[1:]))

    def summary(self):
        lines = [f"complete = {self.complete}",
                 f"reference_norm = {self.reference_norm:.17g}",
                 f"initial_sup = {self.initial_sup:.17g}"]
        for i, eps in enumerate(self.eps):
            err = self.errors[i] if i < len(self.errors) else None
            lines.append(f"eps[{i}] = {eps:.17g}")
            if err is not None:
                lines.append(f"error[{i}] = {err:.17g}")
            if i < len(self.max_abs_u) and self.max_abs_u[i] is not None:
                lines.append(f"max_abs_u[{i}] = {self.max_abs_u[i]:.17g}")
        if any(e is not None for e in self.errors):
            lines.append(f"errors_decreasing = {self.errors_decreasing()}")
        else:
            lines.append("errors_decreasing = n/a (no reference)")
        bounded = (all(m is not None and m < 10 * self.initial_sup for m in self.max_abs_u)
                   if self.initial_sup > 0 else True)
        lines.append(f"max_abs_u_bounded = {bounded}")
        for eps, msg in self.failures.items():
            lines.append(f"failure[{eps:.17g}] = {msg}")
        return "\n".join(lines)


def aligned_dt(spacing, dt_max):
    """Largest step not above ``dt_max`` that divides ``spacing``."""
    if spacing <= 0:
        return dt_max
    return spacing / math.ceil(spacing / dt_max - 1e-12)


def convergence_sweep(eps_list, rho, potential, influence, T, u0=None, v0=None,
                      b=None, cracks=(), band_halfwidth=0.1, horizon_ratio=4.0,
                      bounds=(0.0, 1.0, 0.0, 1.0), n_samples=10, reference=True,
                      threads=1, dt_factor=1.0):
    """Run the peridynamic model at each horizon and compare with the wave
    reference at ``n_samples`` equispaced times in ``(0, T]``.

    ``dt_factor`` scales the default step of each run. Sub-run failures are
    recorded in ``failures`` and the report is marked incomplete.
    """
    eps_list = sorted((float(e) for e in eps_list), reverse=True)
    if len(eps_list) < 3:
        raise ConfigurationError("need at least three horizons", "eps", "sweep")
    if len(set(eps_list)) != len(eps_list):
        raise ConfigurationError("horizons must be distinct", "eps", "sweep")
    b = b or BodyForceSpec()
    mu, _ = calibrate(potential, influence)
    spacing = T / n_samples
    samples = spacing * np.arange(1, n_samples + 1)

    def one(eps):
        domain = DomainSpec(eps, horizon_ratio, bounds)
        grid = build_grid(domain)
        table = build_neighborhoods(grid, influence)
        model = ModelSpec(rho, potential, influence, domain, T=T)
        dt = aligned_dt(spacing, dt_factor * default_dt(model, table))
        model = with_dt(model, dt)
        init = make_initial_data(grid, cracks, u0, v0, band_halfwidth)
        stride = max(1, int(round(spacing / dt)))
        traj = run(model, table, init, b, stride=stride, keep_states=True)
        pd0 = _bonds.strain_energy(grid.to_array(init.u), table, potential)
        return grid, table, model, init, traj, pd0

    report = SweepReport(eps=eps_list, sample_times=samples)
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        futures = [pool.submit(one, eps) for eps in eps_list]
        results = []
        for eps, fut in zip(eps_list, futures):
            try:
                results.append(fut.result())
            except Exception as exc:  # noqa: BLE001 - reported, not swallowed
                results.append(None)
                report.failures[eps] = f"{type(exc).__name__}: {exc}"
                report.complete = False

    wave = None
    finest = [r for r in results if r is not None]
    if reference and finest:
        h_ref = finest[-1][0].spacing / 2.0
        c = math.sqrt(2.0 * mu / rho)
        dt_ref = aligned_dt(spacing, 0.9 * h_ref / (c * math.sqrt(2.0)))
        cfg = WaveConfig(rho, mu, h_ref, dt_ref, T, u0, v0, b, bounds)
        wave = wave_solve(cfg, samples)
        grid_f = finest[-1][0]
        report.reference_norm = max(
            math.sqrt(grid_f.cell_area * float(np.sum(
                wave.sample(t).at(grid_f.positions[grid_f.interior_indices]) ** 2)))
            for t in samples)

    for eps, res in zip(eps_list, results):
        if res is None:
            report.errors.append(None)
            report.max_abs_u.append(None)
            report.energies.append(None)
            report.initial_pd.append(None)
            report.unstable.append(None)
            report.final_states.append(None)
            report.tables.append(None)
            continue
        grid, table, model, init, traj, pd0 = res
        report.initial_sup = max(report.initial_sup, float(np.max(np.abs(init.u))))
        sampled = traj.states[1:]
        if wave is not None:
            errs = [field_error(st, wave.sample(st.t), grid) for st in sampled]
            report.errors.append(max(errs) if errs else 0.0)
        else:
            report.errors.append(None)
        report.max_abs_u.append(traj.max_abs_u)
        report.energies.append(traj.records)
        report.initial_pd.append(pd0)
        report.unstable.append(unstable_centroids(traj.final, table, model))
        report.final_states.append(traj.final)
        report.tables.append(table)
    return report


@dataclass(frozen=True)
class GammaField:
    """Static test field: ``mode`` (amplitude * sin sin), ``step`` (unit
    jump across ``crack`` inside its band), ``combination`` or ``zero``."""

    kind: str = "mode"
    amplitude: float = 1.0
    crack: object = None
    band_halfwidth: float = 0.1

    def __post_init__(self):
        if self.kind not in ("mode", "step", "combination", "zero"):
            raise ConfigurationError(f"unknown test field {self.kind!r}", "field", "gamma")
        if self.kind in ("step", "combination") and self.crack is None:
            raise ConfigurationError("step fields need a crack segment", "crack", "gamma")

    def smooth(self):
        return sine_mode(self.amplitude) if self.kind in ("mode", "combination") else None

    def smooth_gradient(self):
        if self.kind not in ("mode", "combination"):
            return None
        A = self.amplitude

        def grad(points, bounds):
            x0, x1, y0, y1 = bounds
            lx, ly = x1 - x0, y1 - y0
            xs = np.pi * (points[:, 0] - x0) / lx
            ys = np.pi * (points[:, 1] - y0) / ly
            return np.column_stack([A * np.pi / lx * np.cos(xs) * np.sin(ys),
                                    A * np.pi / ly * np.sin(xs) * np.cos(ys)])

        return grad

    def cracks(self):
        return [self.crack] if self.kind in ("step", "combination") else []


@dataclass(frozen=True)
class GammaRow:
    eps: float
    pd: float
    target: float
    slack: float

    @property
    def rel_error(self):
        return (self.pd - self.target) / self.target if self.target else self.pd

    @property
    def within_upper_bound(self):
        return self.pd <= self.target + self.slack


def gamma_limit_check(test_field, eps_list, potential, influence, horizon_ratio=4.0,
                      bounds=(0.0, 1.0, 0.0, 1.0), full_jump_set=False):
    """``(eps, pd, target)`` rows for a static field.

    The target is the LEFM energy of the field with the crack segment as its
    jump set; ``full_jump_set`` also counts the edges of the step's band.
    The upper-bound slack is ``target * h`` for the row's spacing ``h``.
    """
    mu, Gc = calibrate(potential, influence)
    rows = []
    for eps in sorted((float(e) for e in eps_list), reverse=True):
        domain = DomainSpec(eps, horizon_ratio, bounds)
        grid = build_grid(domain)
        table = build_neighborhoods(grid, influence)
        state = make_initial_data(grid, test_field.cracks(), test_field.smooth(),
                                  band_halfwidth=test_field.band_halfwidth)
        pd = _bonds.strain_energy(grid.to_array(state.u), table, potential)
        cracks = test_field.cracks()
        if full_jump_set and cracks:
            cracks = jump_set(cracks[0], test_field.band_halfwidth)
        target = lefm_energy(grid, test_field.smooth_gradient(), cracks, mu, Gc)
        rows.append(GammaRow(eps=eps, pd=pd, target=target, slack=abs(target) * grid.spacing))
    return rows
