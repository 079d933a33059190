"""Uniform particle lattice on a rectangle D plus its Dirichlet collar, and
horizon neighborhoods with midpoint quadrature weights.

Particles are cell centers. Internally every field also lives on a padded
2D array (``grid.shape``) so that a bond family with a fixed lattice offset
is a pair of array slices; this plays the role of the spatial hash used by
unstructured particle codes.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import ConfigurationError

_TOL = 1e-9


@dataclass(frozen=True)
class DomainSpec:
    """Rectangle ``bounds = (x0, x1, y0, y1)`` discretized with spacing
    ``horizon / horizon_ratio``; ``collar_width`` defaults to ``horizon + 2h``
    rounded up to whole cells."""

    horizon: float
    horizon_ratio: float = 4.0
    bounds: tuple = (0.0, 1.0, 0.0, 1.0)
    collar_width: float = None

    def __post_init__(self):
        if not self.horizon > 0:
            raise ConfigurationError("must be positive", "horizon", "domain")
        if self.horizon_ratio < 3:
            raise ConfigurationError(
                f"horizon/spacing = {self.horizon_ratio} < 3 gives too coarse a quadrature",
                "horizon_ratio", "domain")
        x0, x1, y0, y1 = self.bounds
        if not (x1 > x0 and y1 > y0):
            raise ConfigurationError("rectangle must have positive side lengths",
                                     "bounds", "domain")
        for length, name in ((x1 - x0, "x"), (y1 - y0, "y")):
            n = length / self.spacing
            if abs(n - round(n)) > _TOL * max(1.0, n):
                raise ConfigurationError(
                    f"{name}-length {length} is not a whole number of cells of size {self.spacing}",
                    "bounds", "domain")
        alpha = self.collar_width
        if alpha is not None:
            if alpha <= self.horizon:
                raise ConfigurationError(
                    "collar must be wider than the horizon (nonlocal Dirichlet condition "
                    "requires alpha > epsilon)", "collar_width", "domain")
            if alpha < self.horizon + self.spacing * (1 - _TOL):
                raise ConfigurationError("collar must be at least horizon + spacing wide",
                                         "collar_width", "domain")

    @property
    def spacing(self):
        return self.horizon / self.horizon_ratio

    @property
    def cells(self):
        x0, x1, y0, y1 = self.bounds
        h = self.spacing
        return int(round((x1 - x0) / h)), int(round((y1 - y0) / h))

    @property
    def collar(self):
        h = self.spacing
        if self.collar_width is None:
            return math.ceil((self.horizon + 2 * h) / h - _TOL) * h
        return self.collar_width

    @property
    def area(self):
        x0, x1, y0, y1 = self.bounds
        return (x1 - x0) * (y1 - y0)


@dataclass(frozen=True, eq=False)
class ParticleGrid:
    spec: DomainSpec
    positions: np.ndarray
    interior: np.ndarray
    cell_area: float
    pad: int
    shape: tuple
    flat_index: np.ndarray
    index_map: np.ndarray

    @property
    def count(self):
        return len(self.positions)

    @property
    def spacing(self):
        return self.spec.spacing

    @property
    def interior_indices(self):
        return np.flatnonzero(self.interior)

    @property
    def block(self):
        """Slices of the padded array covering the cells of D."""
        nx, ny = self.spec.cells
        return slice(self.pad, self.pad + nx), slice(self.pad, self.pad + ny)

    def to_array(self, values):
        out = np.zeros(self.shape)
        out.flat[self.flat_index] = values
        return out

    def from_array(self, array):
        return array.flat[self.flat_index].copy()

    def interior_values(self, array):
        """Per-particle values of D read from a padded array, in particle order."""
        return array[self.block].ravel()

    def cell_of(self, points):
        """Lattice index pair (padded coordinates) of the cell containing each point."""
        x0, _, y0, _ = self.spec.bounds
        h = self.spacing
        points = np.atleast_2d(points)
        i = np.floor((points[:, 0] - x0) / h).astype(int) + self.pad
        j = np.floor((points[:, 1] - y0) / h).astype(int) + self.pad
        return i, j


def build_grid(spec):
    """Cell-center lattice covering ``D_alpha = {x : dist(x, D) < alpha}``."""
    h = spec.spacing
    nx, ny = spec.cells
    alpha = spec.collar
    pad = math.ceil(alpha / h - _TOL)
    x0, x1, y0, y1 = spec.bounds
    xs = x0 + (np.arange(-pad, nx + pad) + 0.5) * h
    ys = y0 + (np.arange(-pad, ny + pad) + 0.5) * h
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    dx = np.maximum.reduce([x0 - X, np.zeros_like(X), X - x1])
    dy = np.maximum.reduce([y0 - Y, np.zeros_like(Y), Y - y1])
    keep = np.hypot(dx, dy) < alpha
    inside = (X > x0) & (X < x1) & (Y > y0) & (Y < y1)
    flat = np.flatnonzero(keep.ravel())
    index_map = np.full(keep.shape, -1, dtype=np.int64)
    index_map.flat[flat] = np.arange(len(flat))
    positions = np.column_stack([X.ravel()[flat], Y.ravel()[flat]])
    # interior particles must come out in block (row-major) order
    assert np.array_equal(np.flatnonzero(inside.ravel()[flat]),
                          index_map[pad:pad + nx, pad:pad + ny].ravel())
    return ParticleGrid(spec=spec, positions=positions, interior=inside.ravel()[flat],
                        cell_area=h * h, pad=pad, shape=keep.shape,
                        flat_index=flat, index_map=index_map)


@dataclass(frozen=True, eq=False)
class NeighborTable:
    """Horizon stencil shared by all interior particles.

    ``offsets`` are lattice offsets ``k`` with ``0 < |k| h <= horizon``;
    bond ``(x, x + k h)`` has rescaled length ``xi[k]`` and quadrature
    weight ``weight = h^2``.
    """

    grid: ParticleGrid
    influence: object
    horizon: float
    offsets: np.ndarray
    xi: np.ndarray
    direction: np.ndarray
    J: np.ndarray
    weight: float
    m_discrete: np.ndarray

    @property
    def n_bonds(self):
        return len(self.offsets) * int(self.grid.interior.sum())

    def shifted(self, k):
        """Slices of the padded array holding the neighbors at offset ``k``."""
        (si, sj), (di, dj) = self.grid.block, self.offsets[k]
        return (slice(si.start + di, si.stop + di), slice(sj.start + dj, sj.stop + dj))

    def pairs(self):
        """Flat bond list ``(i, j, k)``: interior particle, neighbor, offset id."""
        g = self.grid
        si, sj = g.block
        I, Jg = np.meshgrid(np.arange(si.start, si.stop), np.arange(sj.start, sj.stop),
                            indexing="ij")
        centers = g.index_map[I, Jg].ravel()
        K = len(self.offsets)
        i = np.repeat(centers, K)
        di = np.tile(self.offsets[:, 0], len(centers))
        dj = np.tile(self.offsets[:, 1], len(centers))
        j = g.index_map[np.repeat(I.ravel(), K) + di, np.repeat(Jg.ravel(), K) + dj]
        return i, j, np.tile(np.arange(K), len(centers))

    def neighbors_of(self, p):
        """``(indices, xi, direction, weight)`` for interior particle ``p``."""
        if not self.grid.interior[p]:
            raise ValueError(f"particle {p} is not interior")
        flat = self.grid.flat_index[p]
        ci, cj = np.unravel_index(flat, self.grid.shape)
        idx = self.grid.index_map[ci + self.offsets[:, 0], cj + self.offsets[:, 1]]
        return idx, self.xi, self.direction, np.full(len(idx), self.weight)

    def summary(self):
        g = self.grid
        nbytes = sum(a.nbytes for a in (g.positions, g.interior, g.flat_index, g.index_map,
                                         self.offsets, self.xi, self.direction, self.J,
                                         self.m_discrete))
        return "\n".join([
            f"horizon            {self.horizon:.17g}",
            f"spacing            {g.spacing:.17g}",
            f"horizon_ratio      {g.spec.horizon_ratio:.17g}",
            f"collar_width       {g.spec.collar:.17g}",
            f"particles          {g.count}",
            f"interior           {int(g.interior.sum())}",
            f"neighbors/particle {len(self.offsets)}",
            f"bonds              {self.n_bonds}",
            f"m_discrete         {self.m_discrete[0]:.17g}",
            f"memory_bytes       {nbytes}",
        ])


def build_neighborhoods(grid, inf, eps=None):
    """Stencil of lattice offsets inside the closed horizon disk."""
    eps = grid.spec.horizon if eps is None else eps
    if abs(eps - grid.spec.horizon) > _TOL * eps:
        raise ConfigurationError("neighborhood horizon differs from the grid's horizon",
                                 "horizon")
    h = grid.spacing
    m = int(math.floor(eps / h + _TOL))
    r = np.arange(-m, m + 1)
    KI, KJ = np.meshgrid(r, r, indexing="ij")
    dist = np.hypot(KI, KJ) * h / eps
    mask = (dist > 0) & (dist <= 1 + _TOL)
    offsets = np.column_stack([KI[mask], KJ[mask]]).astype(np.int64)
    if len(offsets) == 0:
        raise ConfigurationError("empty neighborhood", "horizon_ratio")
    xi = np.minimum(dist[mask], 1.0)
    direction = offsets / np.hypot(offsets[:, 0], offsets[:, 1])[:, None]
    J = inf(xi)
    if offsets.max() > grid.pad:
        raise ConfigurationError("collar narrower than the horizon stencil", "collar_width")
    m_val = float(np.sum(h * h / eps ** 2 * xi * J))
    if not m_val > 0:
        raise ConfigurationError("influence function vanishes on every bond", "influence")
    m_discrete = np.full(int(grid.interior.sum()), m_val)
    return NeighborTable(grid=grid, influence=inf, horizon=eps, offsets=offsets, xi=xi,
                         direction=direction, J=J, weight=h * h, m_discrete=m_discrete)
