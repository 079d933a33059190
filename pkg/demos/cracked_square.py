"""Dynamic run of a pre-cracked unit square.

A sine mode is superposed on a straight jump across y = 1/2. The script
prints the energy budget and the unstable bond centroids left at T.
"""
import numpy as np

from pdfrac.diagnostics import unstable_centroids
from pdfrac.dynamics import CrackSegment, ModelSpec, make_initial_data, run, sine_mode
from pdfrac.kernels import InfluenceSpec, PotentialSpec
from pdfrac.lattice import DomainSpec, build_grid, build_neighborhoods


def main(eps=1 / 32, T=0.25):
    pot, inf = PotentialSpec(), InfluenceSpec()
    domain = DomainSpec(eps, 4.0)
    grid = build_grid(domain)
    table = build_neighborhoods(grid, inf)
    model = ModelSpec(1.0, pot, inf, domain, T=T)
    crack = CrackSegment((0.3, 0.5), (0.7, 0.5), 1.0)
    init = make_initial_data(grid, [crack], sine_mode(0.1))
    traj = run(model, table, init, stride=20)
    for r in traj.records:
        print(f"t={r.t:.4f} kinetic={r.kinetic:.6f} pd={r.pd:.6f} total={r.epd:.6f}")
    rep = unstable_centroids(traj.final, table, model)
    y = grid.positions[rep.indices, 1]
    print(f"{len(rep.indices)} unstable centroids, measure {rep.measure:.4g}, "
          f"y in [{y.min():.4f}, {y.max():.4f}]" if len(y) else "no unstable centroids")


if __name__ == "__main__":
    main()
