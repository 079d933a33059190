"""Bond-based peridynamic fracture in antiplane shear: constitutive law,
particle discretization, explicit dynamics, diagnostics and limit checks."""
from .errors import ConfigurationError, EnergyBoundError, IntegrationError, QuadratureError
from .kernels import InfluenceSpec, PotentialSpec, calibrate, critical_stretch
from .lattice import DomainSpec, build_grid, build_neighborhoods
from .dynamics import (BodyForceSpec, CrackSegment, ModelSpec, State, assemble_force,
                       make_initial_data, run, stable_dt, step)
from .diagnostics import (concentration_measure, energy_report, lefm_energy,
                          unstable_centroids, unstable_fraction)
from .nucleation import most_unstable_direction, stability_coefficient
from .reference import (GammaField, WaveConfig, convergence_sweep, field_error,
                        gamma_limit_check, wave_solve)

__version__ = "0.1.0"
