"""Stability coefficient versus direction at the centre of a jump along the
diagonal. The most unstable direction lines up with the jump."""
import math

import numpy as np

from pdfrac.dynamics import CrackSegment, ModelSpec, make_initial_data
from pdfrac.kernels import InfluenceSpec, PotentialSpec
from pdfrac.lattice import DomainSpec, build_grid, build_neighborhoods
from pdfrac.nucleation import most_unstable_direction


def main(eps=0.1):
    pot, inf = PotentialSpec(), InfluenceSpec()
    domain = DomainSpec(eps, 4.0)
    grid = build_grid(domain)
    table = build_neighborhoods(grid, inf)
    model = ModelSpec(1.0, pot, inf, domain)
    p = grid.positions
    x = int(np.argmin(np.where(grid.interior, np.abs(p[:, 0] - p[:, 1]) + np.hypot(*(p - 0.5).T),
                               np.inf)))
    jump = 2 * math.sqrt(eps) * pot.r_bar
    state = make_initial_data(grid, [CrackSegment((0.3, 0.3), (0.7, 0.7), jump)],
                              band_halfwidth=0.2)
    res = most_unstable_direction(state, table, model, x)
    for th, a in zip(res.thetas[::8], res.coefficients[::8]):
        print(f"theta={math.degrees(th):7.2f}  A={a:10.3f}")
    print(f"A*={res.A_star:.3f} at {math.degrees(res.theta_star):.2f} deg, "
          f"growth rate {res.growth_rate:.3f}")


if __name__ == "__main__":
    main()
