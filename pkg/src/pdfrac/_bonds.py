"""Bond sums over the horizon stencil, evaluated on padded lattice arrays.

Each offset family is processed as whole-array slices; per-offset partial
sums are reduced in a fixed order so results are reproducible.
"""
import numpy as np


def _offset_terms(table, potential):
    eps = table.horizon
    for k in range(len(table.offsets)):
        Jk = table.J[k]
        if Jk == 0.0:
            continue
        yield k, table.xi[k], Jk, eps


def strain_energy(U, table, potential):
    """Midpoint quadrature of the total strain energy for padded field ``U``."""
    h2 = table.weight
    centre = U[table.grid.block]
    parts = []
    for k, xi, Jk, eps in _offset_terms(table, potential):
        eta = U[table.shifted(k)] - centre
        s = eta * eta / (eps * xi)
        parts.append(np.sum(potential.f(s)) * Jk / eps ** 3)
    return h2 * h2 * float(np.sum(parts)) if parts else 0.0


def internal_force(U, table, potential, with_energy=False):
    """Force density ``-(1/h^2) dPD/du`` on a padded array (zero off D).

    With ``with_energy`` also return the strain energy of ``U``.
    """
    h2 = table.weight
    block = table.grid.block
    centre = U[block]
    F = np.zeros_like(U)
    parts = []
    for k, xi, Jk, eps in _offset_terms(table, potential):
        eta = U[table.shifted(k)] - centre
        s = eta * eta / (eps * xi)
        g = (2.0 * h2 * Jk / (eps ** 4 * xi)) * potential.df(s) * eta
        F[block] += g
        F[table.shifted(k)] -= g
        if with_energy:
            parts.append(np.sum(potential.f(s)) * Jk / eps ** 3)
    out = np.zeros_like(U)
    out[block] = F[block]
    if with_energy:
        return out, (h2 * h2 * float(np.sum(parts)) if parts else 0.0)
    return out


def linear_row_sums(table, potential):
    """Absolute row sums of the force Jacobian at ``u = 0`` for interior particles."""
    g = table.grid
    h2 = table.weight
    eps = table.horizon
    inside = np.zeros(g.shape)
    inside[g.block] = 1.0
    rows = np.zeros(g.shape)[g.block]
    for k, xi, Jk, _ in _offset_terms(table, potential):
        c = 2.0 * Jk * potential.f_prime_0 / (eps ** 4 * xi)
        # diagonal: 2c for interior partners, c for collar partners; off-diagonal: 2c
        rows += h2 * c * (1.0 + 3.0 * inside[table.shifted(k)])
    return rows.ravel()
