import math

import numpy as np
import pytest

from pdfrac.dynamics import CrackSegment, ModelSpec, make_initial_data
from pdfrac.kernels import InfluenceSpec, PotentialSpec
from pdfrac.lattice import DomainSpec, build_grid, build_neighborhoods
from pdfrac.nucleation import (growth_rate, most_unstable_direction, product_stencil,
                               stability_coefficient)

POT = PotentialSpec()
INF = InfluenceSpec()


def setup(eps=0.1, ratio=4.0, inf=INF, rho=1.0):
    domain = DomainSpec(eps, ratio)
    grid = build_grid(domain)
    return ModelSpec(rho, POT, inf, domain), grid, build_neighborhoods(grid, inf)


def diagonal_particle(grid):
    p = grid.positions
    score = np.abs(p[:, 0] - p[:, 1]) + np.hypot(*(p - 0.5).T)
    return int(np.argmin(np.where(grid.interior, score, np.inf)))


@pytest.mark.parametrize("kind, total", [("constant", 2 * math.pi), ("linear", math.pi)])
@pytest.mark.parametrize("cell", [1 / 3, 1 / 4, 1 / 6])
def test_product_weights_integrate_singular_kernel(kind, total, cell):
    _, w = product_stencil(cell, InfluenceSpec(kind))
    assert w.sum() == pytest.approx(total, rel=1e-4)


@pytest.mark.parametrize("ratio", [3.0, 4.0, 6.0])
def test_zero_state_matches_closed_form(ratio):
    model, grid, table = setup(0.1, ratio)
    s = make_initial_data(grid)
    r = most_unstable_direction(s, table, model, diagonal_particle(grid))
    target = -2 * math.pi * POT.f_prime_0 / 0.1 ** 2
    assert np.all(r.coefficients < 0)
    np.testing.assert_allclose(r.coefficients, target, rtol=0.02)
    assert not r.unstable and r.growth_rate == 0.0


def test_zero_state_orientation_symmetric():
    model, grid, table = setup(0.1)
    s = make_initial_data(grid)
    x = diagonal_particle(grid)
    for th in np.linspace(0, math.pi, 7):
        nu = np.array([math.cos(th), math.sin(th)])
        assert stability_coefficient(s, table, model, x, nu) == pytest.approx(
            stability_coefficient(s, table, model, x, -nu), rel=1e-12)


@pytest.mark.parametrize("eps", [0.1, 1 / 16])
def test_supercritical_diagonal_jump(eps):
    model, grid, table = setup(eps)
    jump = 2 * math.sqrt(eps) * POT.r_bar
    s = make_initial_data(grid, [CrackSegment((0.3, 0.3), (0.7, 0.7), jump)], band_halfwidth=0.2)
    r = most_unstable_direction(s, table, model, diagonal_particle(grid))
    assert r.unstable and r.A_star > 0
    gap = abs((r.theta_star - math.pi / 4 + math.pi / 2) % math.pi - math.pi / 2)
    assert gap <= math.pi / 64 + 1e-12
    assert r.growth_rate == pytest.approx(math.sqrt(r.A_star / model.rho))


def test_subcritical_jump_stays_stable():
    model, grid, table = setup(0.1)
    jump = 0.5 * math.sqrt(0.1 / 4) * POT.r_bar
    s = make_initial_data(grid, [CrackSegment((0.3, 0.3), (0.7, 0.7), jump)], band_halfwidth=0.2)
    assert not most_unstable_direction(s, table, model, diagonal_particle(grid)).unstable


def test_input_validation():
    model, grid, table = setup(0.1)
    s = make_initial_data(grid)
    x = diagonal_particle(grid)
    with pytest.raises(ValueError):
        stability_coefficient(s, table, model, x, (1.0, 1.0))
    with pytest.raises(ValueError):
        stability_coefficient(s, table, model, int(np.flatnonzero(~grid.interior)[0]), (1.0, 0.0))
    with pytest.raises(ValueError):
        most_unstable_direction(s, table, model, x, n_dir=4)


def test_growth_rate():
    assert growth_rate(4.0, 1.0) == 2.0
    assert growth_rate(-1.0, 1.0) == 0.0
