"""Linearized growth coefficient of a jump perturbation at a particle and
the search for the most unstable crack direction.

The coefficient integrates ``eps^2 d^2W/d eta^2`` over two half disks. The
factor ``J(|xi|)/|xi|`` is singular at the origin, so the quadrature uses
product weights ``int_{cell} J(|xi|)/|xi| dxi`` computed once per lattice
resolution; the remaining factor is taken at the cell center. Inside the
cell containing the particle itself the relative displacement is not
resolved by the lattice and is closed with the nearest ring of particles
on the side being probed.
"""
from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy import integrate

_TIE = 1e-12


@lru_cache(maxsize=32)
def product_stencil(cell, influence, n_inner=16, n_cut=96):
    """Offsets ``k`` whose cell ``[k - 1/2, k + 1/2]^2 * cell`` meets the unit
    disk, and weights ``int_{cell_k ∩ H_1} J(|xi|)/|xi| dxi``.

    ``cell = h / eps`` is the cell side in rescaled units.
    """
    half = 0.5 * cell
    m = int(math.ceil(1.0 / cell + 0.5))
    r = np.arange(-m, m + 1)
    KI, KJ = np.meshgrid(r, r, indexing="ij")
    offsets = np.column_stack([KI.ravel(), KJ.ravel()])
    centres = offsets * cell
    near = np.hypot(np.maximum(np.abs(centres[:, 0]) - half, 0.0),
                    np.maximum(np.abs(centres[:, 1]) - half, 0.0))
    far = np.hypot(np.abs(centres[:, 0]) + half, np.abs(centres[:, 1]) + half)
    keep = near < 1.0
    offsets, centres, far = offsets[keep], centres[keep], far[keep]

    gx, gw = np.polynomial.legendre.leggauss(n_inner)
    gx, gw = gx * half, gw * half
    sub = (np.arange(n_cut) + 0.5) / n_cut * cell - half
    weights = np.empty(len(offsets))
    for idx, (c, rmax) in enumerate(zip(centres, far)):
        if c[0] == 0 and c[1] == 0:
            weights[idx] = _self_cell_weight(half, influence)
            continue
        if rmax <= 1.0:
            X, Y = np.meshgrid(c[0] + gx, c[1] + gx, indexing="ij")
            W = np.outer(gw, gw)
        else:
            X, Y = np.meshgrid(c[0] + sub, c[1] + sub, indexing="ij")
            W = np.full(X.shape, (cell / n_cut) ** 2)
        R = np.hypot(X, Y)
        weights[idx] = float(np.sum(W * influence(R) / R))
    return offsets, weights


def _self_cell_weight(half, influence):
    # polar coordinates about the singular point; eight symmetric triangles
    radial = lambda theta: integrate.quad(influence, 0.0, half / math.cos(theta),
                                          epsabs=1e-13)[0]
    return 8.0 * integrate.quad(radial, 0.0, math.pi / 4, epsabs=1e-13)[0]


@dataclass
class NucleationResult:
    point: np.ndarray
    thetas: np.ndarray
    directions: np.ndarray
    coefficients: np.ndarray
    orientation: np.ndarray
    nu_star: np.ndarray
    theta_star: float
    A_star: float
    unstable: bool
    growth_rate: float


class _Probe:
    """Per-particle stiffness samples ``a_k`` on the product stencil."""

    def __init__(self, state, table, model, x):
        grid = table.grid
        if not grid.interior[x]:
            raise ValueError(f"particle {x} is not interior")
        eps = table.horizon
        cell = grid.spacing / eps
        offsets, weights = product_stencil(round(cell, 14), table.influence)
        if np.abs(offsets).max() > grid.pad:
            raise ValueError("collar too narrow for the nucleation stencil")
        U = grid.to_array(state.u)
        ci, cj = np.unravel_index(grid.flat_index[x], grid.shape)
        eta = U[ci + offsets[:, 0], cj + offsets[:, 1]] - U[ci, cj]
        xi = np.hypot(offsets[:, 0], offsets[:, 1]) * cell
        pot = model.potential
        self_cell = xi == 0
        g = np.empty(len(offsets))
        g[~self_cell] = pot.stiffness_profile(eta[~self_cell] ** 2 / (eps * xi[~self_cell]))
        self.a = (2.0 / eps ** 2) * weights * g
        self.offsets = offsets.astype(float)
        self.self_index = int(np.flatnonzero(self_cell)[0])
        self.self_weight = (2.0 / eps ** 2) * weights[self_cell][0]
        self.g = g
        self.ring = np.flatnonzero(np.max(np.abs(offsets), axis=1) == 1)
        self.point = grid.positions[x]

    def coefficient(self, nu):
        """Literal two-half-disk coefficient for unit direction ``nu``."""
        normal = np.array([-nu[1], nu[0]])
        sigma = self.offsets @ normal
        sigma[np.abs(sigma) < _TIE] = 0.0
        plus = sigma > 0
        on_line = sigma == 0
        on_line[self.self_index] = False
        # E+ uses x + eps xi, E- uses the mirrored point x - eps xi; with a
        # symmetric stencil both land on the sigma > 0 side
        g_self = self.g[self.ring[sigma[self.ring] > 0]].mean()
        return -(self.a[plus].sum() + 0.5 * self.a[on_line].sum()
                 + 0.5 * self.self_weight * g_self)


def _unit(nu):
    nu = np.asarray(nu, dtype=float)
    if abs(np.hypot(*nu) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    return nu


def stability_coefficient(state, table, model, x, nu):
    """Growth coefficient ``A_nu`` of a jump across the line through particle
    ``x`` along ``nu``; ``A_nu > 0`` means the jump can grow."""
    return float(_Probe(state, table, model, x).coefficient(_unit(nu)))


def growth_rate(A, rho):
    return math.sqrt(A / rho) if A > 0 else 0.0


def most_unstable_direction(state, table, model, x, n_dir=64):
    """Scan ``theta_k = k pi / n_dir``; each line is scored by the larger of
    the coefficients of its two orientations."""
    if n_dir < 8:
        raise ValueError("need at least 8 directions")
    probe = _Probe(state, table, model, x)
    thetas = np.arange(n_dir) * math.pi / n_dir
    dirs = np.column_stack([np.cos(thetas), np.sin(thetas)])
    fwd = np.array([probe.coefficient(d) for d in dirs])
    back = np.array([probe.coefficient(-d) for d in dirs])
    coeffs = np.maximum(fwd, back)
    orient = np.where(back > fwd, -1, 1)
    k = int(np.argmax(coeffs))
    A = float(coeffs[k])
    return NucleationResult(point=probe.point, thetas=thetas, directions=dirs,
                            coefficients=coeffs, orientation=orient,
                            nu_star=orient[k] * dirs[k], theta_star=float(thetas[k]),
                            A_star=A, unstable=A > 0, growth_rate=growth_rate(A, model.rho))
