"""Peridynamic runs approaching the linear wave equation as the horizon
shrinks. Each horizon is compared with a finite-difference reference."""
from pdfrac.dynamics import sine_mode
from pdfrac.kernels import InfluenceSpec, PotentialSpec
from pdfrac.reference import convergence_sweep


def main():
    rep = convergence_sweep([1 / 4, 1 / 8, 1 / 16], 1.0, PotentialSpec(), InfluenceSpec(), 1.0,
                            u0=sine_mode(0.1), n_samples=10, threads=3)
    for eps, err in zip(rep.eps, rep.relative_errors):
        print(f"eps=1/{round(1 / eps)}  sup_t L2 error / reference norm = {err:.4f}")
    print(rep.summary())


if __name__ == "__main__":
    main()
