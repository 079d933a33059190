"""Energies, energy-balance residuals, unstable-bond fractions, centroid sets
of unstable neighborhoods and the LEFM energy of prescribed fields."""
from dataclasses import dataclass, field
import math

import numpy as np

from . import _bonds


@dataclass(frozen=True)
class EnergyReport:
    t: float
    pd: float
    kinetic: float
    work: float
    epd: float
    work_rate: float = 0.0

    def row(self):
        return (self.t, self.kinetic, self.pd, self.work, self.epd)


def energy_report(state, table, model, b=None, pd=None, shape=None):
    """Strain, kinetic and external-work energies of ``state``.

    ``work_rate`` is ``int_D (d b / d t) u dx``, the integrand of the
    balance correction term.
    """
    grid = table.grid
    if pd is None:
        pd = _bonds.strain_energy(grid.to_array(state.u), table, model.potential)
    cell = grid.cell_area
    kinetic = 0.5 * model.rho * cell * float(np.sum(state.v ** 2))
    work = work_rate = 0.0
    if b is not None and not b.is_zero:
        shape = b.shape(grid) if shape is None else shape
        work = cell * float(np.sum(b.field(state.t, grid, shape) * state.u))
        work_rate = cell * float(np.sum(b.rate(state.t, grid, shape) * state.u))
    return EnergyReport(t=state.t, pd=pd, kinetic=kinetic, work=work,
                        epd=kinetic + pd - work, work_rate=work_rate)


def strain_energy(u, table, model):
    """Total strain energy of a per-particle displacement."""
    return _bonds.strain_energy(table.grid.to_array(u), table, model.potential)


def balance_residual(records):
    """``EPD(t) - EPD(0) + int_0^t int_D b_t u``, raw and relative.

    The time integral uses the trapezoid rule over the records.
    """
    if len(records) < 2:
        raise ValueError("need at least two energy records")
    t = np.array([r.t for r in records])
    epd = np.array([r.epd for r in records])
    rate = np.array([r.work_rate for r in records])
    integral = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (rate[1:] + rate[:-1]))])
    raw = epd - epd[0] + integral
    scale = max(abs(epd[0]), np.finfo(float).tiny)
    return raw, raw / scale


def _supercritical_sums(U, table, potential):
    """Weighted sum of supercritical bonds per interior particle."""
    centre = U[table.grid.block]
    acc = np.zeros_like(centre)
    eps = table.horizon
    for k in range(len(table.offsets)):
        xi = table.xi[k]
        critical = math.sqrt(eps * xi) * potential.r_bar
        chi = np.abs(U[table.shifted(k)] - centre) > critical
        acc += chi * (table.weight * xi * table.J[k])
    return acc.ravel() / eps ** 2


def unstable_fraction_field(state, table, model):
    """Weighted fraction ``P`` of supercritical bonds, one value per interior
    particle (ordered as ``grid.interior_indices``)."""
    U = table.grid.to_array(state.u)
    return _supercritical_sums(U, table, model.potential) / table.m_discrete


def unstable_fraction(state, table, model, x):
    grid = table.grid
    if not grid.interior[x]:
        raise ValueError(f"particle {x} is not interior")
    pos = int(np.searchsorted(grid.interior_indices, x))
    return float(unstable_fraction_field(state, table, model)[pos])


@dataclass
class UnstableReport:
    t: float
    eps: float
    fractions: np.ndarray
    indices: np.ndarray
    measure: float
    grid: object = field(repr=False, default=None)

    def rows(self):
        """``(t, eps, x, y, P)`` for every unstable centroid."""
        pos = self.grid.positions[self.indices]
        P = self.fractions[np.searchsorted(self.grid.interior_indices, self.indices)]
        return [(self.t, self.eps, p[0], p[1], q) for p, q in zip(pos, P)]


def unstable_centroids(state, table, model):
    """Interior particles whose neighborhood has ``P > sqrt(eps)``."""
    grid = table.grid
    P = unstable_fraction_field(state, table, model)
    flagged = P > math.sqrt(table.horizon)
    indices = grid.interior_indices[flagged]
    return UnstableReport(t=state.t, eps=table.horizon, fractions=P, indices=indices,
                          measure=grid.cell_area * len(indices), grid=grid)


@dataclass
class ConcentrationReport:
    deltas: np.ndarray
    measures: np.ndarray
    exponent: float
    prefactor: float
    sets: list = field(repr=False, default_factory=list)
    grid: object = field(repr=False, default=None)

    @property
    def ratios(self):
        """``|C_delta| / sqrt(delta)``."""
        return self.measures / np.sqrt(self.deltas)

    def summary(self):
        if self.exponent is None:
            return "exponent unavailable (fewer than 2 nonempty delta levels)"
        return f"exponent {self.exponent:.6g} prefactor {self.prefactor:.6g}"


def _rasterize(report, fine):
    """Boolean mask over the fine grid's interior cells covered by ``report``."""
    coarse = report.grid
    flags = np.zeros(coarse.shape, dtype=bool)
    flags.flat[coarse.flat_index[report.indices]] = True
    centres = fine.positions[fine.interior_indices]
    i, j = coarse.cell_of(centres)
    return flags[i, j]


def concentration_measure(reports, deltas=None):
    """Union of unstable centroid sets over horizons below each ``delta``.

    Sets from coarser horizons are mapped onto the grid of the finest
    report by cell-center containment. ``deltas`` defaults to twice each
    horizon.
    """
    eps = np.array([r.eps for r in reports])
    if deltas is None:
        deltas = np.sort(2.0 * eps)
    deltas = np.sort(np.asarray(deltas, dtype=float))
    if len(set(eps[eps < deltas.max()])) < 3:
        raise ValueError("need at least three distinct horizons below max(delta)")
    fine = reports[int(np.argmin(eps))].grid
    masks = [_rasterize(r, fine) for r in reports]
    sets, measures = [], []
    for d in deltas:
        acc = np.zeros(int(fine.interior.sum()), dtype=bool)
        for r, m in zip(reports, masks):
            if r.eps < d:
                acc |= m
        sets.append(acc)
        measures.append(fine.cell_area * int(acc.sum()))
    measures = np.array(measures)
    nonempty = measures > 0
    exponent = prefactor = None
    if nonempty.sum() >= 2:
        slope, intercept = np.polyfit(np.log(deltas[nonempty]), np.log(measures[nonempty]), 1)
        exponent, prefactor = float(slope), float(np.exp(intercept))
    return ConcentrationReport(deltas=deltas, measures=measures, exponent=exponent,
                               prefactor=prefactor, sets=sets, grid=fine)


def _overlapping(a, b, tol=1e-12):
    ta = a.tangent
    pa, pb0, pb1 = (np.asarray(p, float) for p in (a.start, b.start, b.end))
    cross = lambda v: ta[0] * v[1] - ta[1] * v[0]
    if abs(cross(b.tangent)) > tol or abs(cross(pb0 - pa)) > tol:
        return False
    s0, s1 = sorted(((pb0 - pa) @ ta, (pb1 - pa) @ ta))
    return min(s1, a.length) - max(s0, 0.0) > tol


def lefm_energy(grid, smooth_gradient, cracks, mu, Gc):
    """``mu int_D |grad u|^2 + Gc * total crack length``.

    ``smooth_gradient(points, bounds)`` returns an ``(n, 2)`` array (or
    ``None`` for no bulk term); the bulk integral is the midpoint rule on
    the cells of D.
    """
    cracks = list(cracks)
    for i in range(len(cracks)):
        for j in range(i + 1, len(cracks)):
            if _overlapping(cracks[i], cracks[j]):
                raise ValueError("crack segments overlap; jump set would be double counted")
    bulk = 0.0
    if smooth_gradient is not None:
        pts = grid.positions[grid.interior]
        g = np.asarray(smooth_gradient(pts, grid.spec.bounds), dtype=float)
        bulk = mu * grid.cell_area * float(np.sum(g ** 2))
    return bulk + Gc * sum(c.length for c in cracks)
