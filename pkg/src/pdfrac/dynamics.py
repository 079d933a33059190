"""Nonlocal force assembly, initial data with prescribed jumps, and
velocity-Verlet time stepping of ``rho u_tt = -grad PD(u) + b``."""
from dataclasses import dataclass, field, replace
import math

import numpy as np

from . import _bonds
from .diagnostics import energy_report
from .errors import ConfigurationError, EnergyBoundError, IntegrationError
from .kernels import InfluenceSpec, PotentialSpec
from .lattice import DomainSpec

GRONWALL_SLACK = 2.0


@dataclass(frozen=True)
class ModelSpec:
    rho: float
    potential: PotentialSpec
    influence: InfluenceSpec
    domain: DomainSpec
    T: float = 1.0
    dt: float = None

    def __post_init__(self):
        if not self.rho > 0:
            raise ConfigurationError("must be positive", "rho", "model")
        if not self.T >= 0:
            raise ConfigurationError("must be non-negative", "T", "time")
        if self.dt is not None and not self.dt > 0:
            raise ConfigurationError("must be positive", "dt", "time")

    @property
    def horizon(self):
        return self.domain.horizon


@dataclass
class State:
    t: float
    u: np.ndarray
    v: np.ndarray

    def copy(self):
        return State(self.t, self.u.copy(), self.v.copy())


@dataclass(frozen=True)
class CrackSegment:
    start: tuple
    end: tuple
    jump_height: float = 1.0

    def __post_init__(self):
        if self.length <= 0:
            raise ConfigurationError("crack segment has zero length", "cracks", "initial")

    @property
    def length(self):
        return float(np.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1]))

    @property
    def tangent(self):
        d = np.subtract(self.end, self.start, dtype=float)
        return d / np.hypot(*d)

    @property
    def normal(self):
        t = self.tangent
        return np.array([-t[1], t[0]])


@dataclass(frozen=True)
class BodyForceSpec:
    """``b(t, x) = amplitude * shape(x) * cos(omega t)``.

    ``kind`` is ``zero``, ``constant`` (shape 1) or ``mode`` (first
    sine mode of the rectangle).
    """

    kind: str = "zero"
    amplitude: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "mode"):
            raise ConfigurationError(f"unknown body force {self.kind!r}", "body_force", "load")

    def shape(self, grid):
        if self.kind == "zero":
            return np.zeros(grid.count)
        if self.kind == "constant":
            return np.where(grid.interior, 1.0, 0.0)
        return sine_mode(1.0)(grid.positions, grid.spec.bounds) * grid.interior

    def field(self, t, grid, shape=None):
        shape = self.shape(grid) if shape is None else shape
        return self.amplitude * math.cos(self.omega * t) * shape

    def rate(self, t, grid, shape=None):
        shape = self.shape(grid) if shape is None else shape
        return -self.amplitude * self.omega * math.sin(self.omega * t) * shape

    @property
    def is_zero(self):
        return self.kind == "zero" or self.amplitude == 0.0


def sine_mode(amplitude, m=1, n=1):
    """``amplitude * sin(m pi x') sin(n pi y')`` on the rectangle, with x', y' in [0, 1]."""

    def field(points, bounds=(0.0, 1.0, 0.0, 1.0)):
        x0, x1, y0, y1 = bounds
        p = np.atleast_2d(points)
        xs = (p[:, 0] - x0) / (x1 - x0)
        ys = (p[:, 1] - y0) / (y1 - y0)
        return amplitude * np.sin(m * np.pi * xs) * np.sin(n * np.pi * ys)

    return field


def _inside_closed(point, bounds, tol=1e-12):
    x0, x1, y0, y1 = bounds
    return x0 - tol <= point[0] <= x1 + tol and y0 - tol <= point[1] <= y1 + tol


def _band_corners(crack, halfwidth):
    a, b = np.asarray(crack.start, float), np.asarray(crack.end, float)
    n = crack.normal * halfwidth
    return a - n, a + n, b - n, b + n


def make_initial_data(grid, cracks=(), smooth_part=None, v0=None, band_halfwidth=0.1):
    """Initial state: smooth displacement plus one step per crack segment.

    Each segment adds ``+jump/2`` on its normal side and ``-jump/2`` on the
    other, restricted to the rectangle of half-width ``band_halfwidth``
    spanning the segment. ``smooth_part`` and ``v0`` are callables
    ``(points, bounds) -> values``.
    """
    bounds = grid.spec.bounds
    x0, x1, y0, y1 = bounds
    u = np.zeros(grid.count)
    v = np.zeros(grid.count)
    if smooth_part is not None:
        u += smooth_part(grid.positions, bounds)
    if v0 is not None:
        v += v0(grid.positions, bounds)
    for crack in cracks:
        for p in (crack.start, crack.end):
            if not (x0 < p[0] < x1 and y0 < p[1] < y1):
                raise ConfigurationError(f"crack endpoint {p} is not inside D",
                                         "cracks", "initial")
        for corner in _band_corners(crack, band_halfwidth):
            if not _inside_closed(corner, bounds):
                raise ConfigurationError("crack band reaches the collar", "cracks", "initial")
        u += crack_step(crack, band_halfwidth)(grid.positions)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise ConfigurationError("initial data must be bounded", "initial")
    u[~grid.interior] = 0.0
    v[~grid.interior] = 0.0
    return State(0.0, u, v)


def crack_step(crack, band_halfwidth):
    """The displacement contributed by one crack segment, as a point function."""
    a = np.asarray(crack.start, float)

    def field(points):
        p = np.atleast_2d(points) - a
        s = p @ crack.tangent
        d = p @ crack.normal
        in_band = (s >= 0) & (s <= crack.length) & (np.abs(d) < band_halfwidth)
        return np.where(in_band, np.where(d >= 0, 0.5, -0.5) * crack.jump_height, 0.0)

    return field


def jump_set(crack, band_halfwidth):
    """All discontinuity segments of the step built by :func:`crack_step`:
    the crack itself plus the four edges of its band (half-height jumps)."""
    lo_a, hi_a, lo_b, hi_b = _band_corners(crack, band_halfwidth)
    half = 0.5 * crack.jump_height
    return [
        crack,
        CrackSegment(tuple(lo_a), tuple(lo_b), half),
        CrackSegment(tuple(hi_a), tuple(hi_b), half),
        CrackSegment(tuple(lo_a), tuple(hi_a), half),
        CrackSegment(tuple(lo_b), tuple(hi_b), half),
    ]


def _check_finite(state, step):
    if not (np.all(np.isfinite(state.u)) and np.all(np.isfinite(state.v))):
        raise IntegrationError(step)


def assemble_force(state, table, model):
    """Per-particle force density ``-grad PD(u)``; zero on collar particles."""
    if not np.all(np.isfinite(state.u)):
        raise IntegrationError(-1, "non-finite displacement passed to force assembly")
    grid = table.grid
    if len(state.u) != grid.count:
        raise ValueError("state does not match the neighbor table")
    F = _bonds.internal_force(grid.to_array(state.u), table, model.potential)
    return grid.from_array(F)


def stable_dt(model, table, safety=0.5):
    """``safety * 2 / sqrt(L / rho)`` with ``L`` the largest absolute row sum
    of the linearized force at ``u = 0``."""
    L = float(np.max(_bonds.linear_row_sums(table, model.potential)))
    if L == 0.0:
        return math.inf
    return safety * 2.0 / math.sqrt(L / model.rho)


def default_dt(model, table):
    return 0.5 * stable_dt(model, table)


def step(state, table, model, b=None, dt=None):
    """One velocity-Verlet step."""
    b = b or BodyForceSpec()
    dt = dt or model.dt or default_dt(model, table)
    grid = table.grid
    shape = b.shape(grid)
    F0 = assemble_force(state, table, model)
    new, _, _ = _verlet(state, F0, b.field(state.t, grid, shape), table, model, b, shape, dt)
    _check_finite(new, 1)
    return new


def _verlet(state, F, bvec, table, model, b, shape, dt):
    grid = table.grid
    rho = model.rho
    v_half = state.v + (0.5 * dt / rho) * (F + bvec)
    u = state.u + dt * v_half
    u[~grid.interior] = 0.0
    t = state.t + dt
    Fp, pd = _bonds.internal_force(grid.to_array(u), table, model.potential, with_energy=True)
    F_new = grid.from_array(Fp)
    b_new = b.field(t, grid, shape)
    v = v_half + (0.5 * dt / rho) * (F_new + b_new)
    v[~grid.interior] = 0.0
    return State(t, u, v), F_new, (b_new, pd)


@dataclass
class Trajectory:
    records: list = field(default_factory=list)
    states: list = field(default_factory=list)
    final: State = None
    dt: float = 0.0
    n_steps: int = 0
    max_abs_u: float = 0.0

    @property
    def times(self):
        return np.array([r.t for r in self.records])


def run(model, table, initial, b=None, observers=(), stride=1, keep_states=False,
        check_bound=True):
    """Integrate from ``initial`` to ``model.T``.

    Every ``stride`` steps an :class:`EnergyReport` is recorded and each
    observer is called as ``observer(step, state, report)``. Raises
    :class:`EnergyBoundError` if kinetic plus strain energy leaves the
    Gronwall envelope, :class:`IntegrationError` on blow-up. With ``dt``
    above the linear stability limit an envelope breach is reported as
    blow-up of the explicit scheme rather than as a bound violation.
    """
    b = b or BodyForceSpec()
    if stride < 1:
        raise ConfigurationError("must be >= 1", "stride", "output")
    grid = table.grid
    dt = model.dt or default_dt(model, table)
    n_steps = int(math.floor(model.T / dt + 1e-9))
    unstable_step = dt > stable_dt(model, table, safety=1.0)
    shape = b.shape(grid)
    rho = model.rho
    cell = grid.cell_area

    state = initial.copy()
    state.u[~grid.interior] = 0.0
    state.v[~grid.interior] = 0.0
    _check_finite(state, 0)
    Fp, pd = _bonds.internal_force(grid.to_array(state.u), table, model.potential,
                                   with_energy=True)
    F = grid.from_array(Fp)
    bvec = b.field(state.t, grid, shape)

    traj = Trajectory(dt=dt, n_steps=n_steps)
    energy0 = pd + 0.5 * rho * cell * float(np.sum(state.v ** 2))
    b_sq_prev = cell * float(np.sum(bvec ** 2))
    b_sq_integral = 0.0

    def record(n, st, pd_now):
        rep = energy_report(st, table, model, b, pd=pd_now, shape=shape)
        traj.records.append(rep)
        if keep_states:
            traj.states.append(st.copy())
        for obs in observers:
            obs(n, st, rep)

    record(0, state, pd)
    traj.max_abs_u = float(np.max(np.abs(state.u)))
    for n in range(1, n_steps + 1):
        state, F, (bvec, pd) = _verlet(state, F, bvec, table, model, b, shape, dt)
        if not np.isfinite(pd):
            raise IntegrationError(n)
        _check_finite(state, n)
        traj.max_abs_u = max(traj.max_abs_u, float(np.max(np.abs(state.u))))
        if check_bound:
            b_sq = cell * float(np.sum(bvec ** 2))
            b_sq_integral += 0.5 * dt * (b_sq + b_sq_prev)
            b_sq_prev = b_sq
            energy = pd + 0.5 * rho * cell * float(np.sum(state.v ** 2))
            bound = GRONWALL_SLACK * math.exp(state.t) * (energy0 + 0.5 / rho * b_sq_integral)
            if energy > bound * (1 + 1e-12) + 1e-300:
                if unstable_step:
                    raise IntegrationError(n, "explicit scheme unstable (dt above the "
                                              "stability limit): energy blow-up")
                raise EnergyBoundError(state.t, energy, bound)
        if n % stride == 0:
            record(n, state, pd)
    traj.final = state
    return traj


def with_dt(model, dt):
    return replace(model, dt=dt)
