"""Command line entry point: ``pdfrac <subcommand> --config FILE``.

Exit status: 0 success, 1 invalid configuration, 2 numerical failure,
3 energy bound violated.
"""
import argparse
from concurrent.futures import ThreadPoolExecutor
import logging
import math
import os
import sys

import numpy as np

from . import output
from .config import parse_config
from .diagnostics import concentration_measure, unstable_centroids
from .dynamics import make_initial_data, run
from .errors import ConfigurationError, EnergyBoundError, IntegrationError, QuadratureError
from .kernels import calibrate
from .lattice import build_grid, build_neighborhoods
from .nucleation import most_unstable_direction
from .reference import (GammaField, WaveConfig, aligned_dt, convergence_sweep,
                        gamma_limit_check, wave_solve)

log = logging.getLogger("pdfrac")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_BOUND = 0, 1, 2, 3
SUBCOMMANDS = ("run", "calibrate", "nucleate", "sweep", "wave", "gamma")


def _setup(cfg, model=None):
    model = model or cfg.model()
    grid = build_grid(model.domain)
    table = build_neighborhoods(grid, model.influence)
    state = make_initial_data(grid, cfg.cracks(), cfg.smooth_part(), cfg.velocity(),
                              cfg.get("initial", "band_halfwidth"))
    return model, grid, table, state


def cmd_run(cfg, out, args):
    model, grid, table, state = _setup(cfg)
    stride = args.stride or cfg.get("output", "stride")
    snap_every = cfg.get("output", "snapshot_stride")
    records = []
    written = set()

    def snapshot(n, st):
        output.write_csv(os.path.join(out, f"snap_{n}.csv"), output.SNAPSHOT_HEADER,
                         output.snapshot_rows(st, grid))
        written.add(n)

    def observe(n, st, rep):
        records.append(rep)
        if n == 0 or (snap_every and n % snap_every == 0):
            snapshot(n, st)

    log.info("run: %d particles, %d bonds, dt=%.6g", grid.count, table.n_bonds, model.dt)
    try:
        traj = run(model, table, state, cfg.body_force(), observers=[observe], stride=stride)
    finally:
        output.write_csv(os.path.join(out, "energy.csv"), output.ENERGY_HEADER,
                         output.energy_rows(records))
    if traj.n_steps not in written:
        snapshot(traj.n_steps, traj.final)
    report = unstable_centroids(traj.final, table, model)
    output.write_csv(os.path.join(out, f"unstable_{output.eps_tag(model.horizon)}.csv"),
                     output.UNSTABLE_HEADER, report.rows())
    print(f"steps {traj.n_steps} dt {traj.dt:.17g} final_epd {traj.records[-1].epd:.17g} "
          f"unstable {len(report.indices)}")
    return EXIT_OK


def cmd_calibrate(cfg, out, args):
    pot, inf = cfg.potential(), cfg.influence()
    mu, Gc = calibrate(pot, inf)
    text = f"mu = {mu:.17g}\nGc = {Gc:.17g}\nr_bar = {pot.r_bar:.17g}"
    print(text)
    output.write_text(os.path.join(out, "calibrate.txt"), text)
    return EXIT_OK


def cmd_nucleate(cfg, out, args):
    model, grid, table, state = _setup(cfg)
    points = cfg.get("nucleate", "points")
    if not points:
        raise ConfigurationError("no points requested", "points", "nucleate")
    i, j = grid.cell_of(np.array(points))
    if np.any((i < 0) | (j < 0) | (i >= grid.shape[0]) | (j >= grid.shape[1])):
        raise ConfigurationError("point outside the lattice", "points", "nucleate")
    particles = grid.index_map[i, j]
    for p, x in zip(points, particles):
        if x < 0 or not grid.interior[x]:
            raise ConfigurationError(f"point {p} is not inside D", "points", "nucleate")
    n_dir = cfg.get("nucleate", "n_dir")
    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        results = list(pool.map(
            lambda x: most_unstable_direction(state, table, model, int(x), n_dir), particles))
    rows = [(r.point[0], r.point[1], r.A_star, r.theta_star, r.unstable) for r in results]
    output.write_csv(os.path.join(out, "nucleation.csv"),
                     ("x", "y", "A_star", "theta_star", "unstable"), rows)
    for row in rows:
        print(" ".join(output.cell(v) for v in row))
    return EXIT_OK


def cmd_sweep(cfg, out, args):
    eps = cfg.get("sweep", "eps")
    if len(eps) < 3:
        raise ConfigurationError("need at least three horizons", "eps", "sweep")
    dt_factor = cfg.get("time", "dt_factor") / 0.5
    report = convergence_sweep(
        eps, cfg.get("model", "rho"), cfg.potential(), cfg.influence(), cfg.get("time", "T"),
        u0=cfg.smooth_part(), v0=cfg.velocity(), b=cfg.body_force(), cracks=cfg.cracks(),
        band_halfwidth=cfg.get("initial", "band_halfwidth"),
        horizon_ratio=cfg.get("domain", "horizon_ratio"), bounds=cfg.get("domain", "bounds"),
        n_samples=cfg.get("sweep", "n_samples"), reference=cfg.get("sweep", "reference"),
        threads=args.threads, dt_factor=dt_factor)
    lines = [report.summary()]
    for e, records, rep in zip(report.eps, report.energies, report.unstable):
        if records is None:
            continue
        output.write_csv(os.path.join(out, f"energy_{output.eps_tag(e)}.csv"),
                         output.ENERGY_HEADER, output.energy_rows(records))
        output.write_csv(os.path.join(out, f"unstable_{output.eps_tag(e)}.csv"),
                         output.UNSTABLE_HEADER, rep.rows())
    done = [r for r in report.unstable if r is not None]
    if len(done) >= 3:
        deltas = cfg.get("sweep", "deltas") or None
        conc = concentration_measure(done, deltas)
        output.write_csv(os.path.join(out, "concentration.csv"), ("delta", "measure", "ratio"),
                         zip(conc.deltas, conc.measures, conc.ratios))
        lines.append(f"concentration = {conc.summary()}")
        nested = all(np.all(a <= b) for a, b in zip(conc.sets, conc.sets[1:]))
        lines.append(f"concentration_nested = {nested}")
    text = "\n".join(lines)
    output.write_text(os.path.join(out, "sweep_summary.txt"), text)
    print(text)
    if report.failures:
        bound = any(m.startswith("EnergyBoundError") for m in report.failures.values())
        return EXIT_BOUND if bound else EXIT_NUMERICAL
    return EXIT_OK


def cmd_wave(cfg, out, args):
    mu, _ = calibrate(cfg.potential(), cfg.influence())
    rho, T = cfg.get("model", "rho"), cfg.get("time", "T")
    h_ref = cfg.get("wave", "h_ref") or cfg.domain().spacing / 2.0
    n = cfg.get("wave", "sample_count")
    spacing = T / n
    dt_ref = cfg.get("wave", "dt_ref")
    if dt_ref is None:
        dt_ref = aligned_dt(spacing, 0.9 * h_ref / (math.sqrt(2.0 * mu / rho) * math.sqrt(2.0)))
    wcfg = WaveConfig(rho, mu, h_ref, dt_ref, T, cfg.smooth_part(), cfg.velocity(),
                      cfg.body_force(), cfg.get("domain", "bounds"))
    traj = wave_solve(wcfg, spacing * np.arange(n + 1))
    X, Y = np.meshgrid(traj.x, traj.y, indexing="ij")
    norms = []
    for t, U in zip(traj.times, traj.fields):
        step = int(round(t / traj.dt))
        output.write_csv(os.path.join(out, f"snap_{step}.csv"), ("x", "y", "u"),
                         zip(X.ravel(), Y.ravel(), U.ravel()))
        norms.append((t, h_ref * math.sqrt(float(np.sum(U ** 2)))))
    output.write_csv(os.path.join(out, "wave_norms.csv"), ("t", "l2_norm"), norms)
    print(f"h_ref {h_ref:.17g} dt_ref {dt_ref:.17g} samples {len(traj.times)}")
    return EXIT_OK


def cmd_gamma(cfg, out, args):
    g = cfg.values["gamma"]
    eps = g["eps"]
    if not eps:
        raise ConfigurationError("no horizons given", "eps", "gamma")
    cracks = cfg.cracks(("gamma", "crack"))
    field = GammaField(g["field"], g["amplitude"], cracks[0] if cracks else None,
                       g["band_halfwidth"])
    rows = gamma_limit_check(field, eps, cfg.potential(), cfg.influence(),
                             cfg.get("domain", "horizon_ratio"), cfg.get("domain", "bounds"),
                             full_jump_set=g["full_jump_set"])
    table = [(r.eps, r.pd, r.target, r.rel_error, r.within_upper_bound) for r in rows]
    output.write_csv(os.path.join(out, "gamma.csv"),
                     ("eps", "pd", "target", "rel_error", "within_upper_bound"), table)
    for row in table:
        print(" ".join(output.cell(v) for v in row))
    return EXIT_OK


COMMANDS = {"run": cmd_run, "calibrate": cmd_calibrate, "nucleate": cmd_nucleate,
            "sweep": cmd_sweep, "wave": cmd_wave, "gamma": cmd_gamma}


def build_parser():
    p = argparse.ArgumentParser(prog="pdfrac", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", required=True, help="INI configuration file")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--threads", type=int, default=1, help="worker threads (default: 1)")
    p.add_argument("--stride", type=int, default=None,
                   help="record energies every k steps (overrides [output] stride)")
    p.add_argument("--grid-summary", action="store_true",
                   help="write grid and neighbor statistics to grid_summary.txt")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def dispatch(subcommand, cfg, out, args):
    try:
        return COMMANDS[subcommand](cfg, out, args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EnergyBoundError as exc:
        print(f"energy bound violated: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (QuadratureError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("configuration error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.stride is not None and args.stride < 1:
        print("configuration error: --stride must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = parse_config(args.config, resolve_dt=args.subcommand in ("run", "nucleate"))
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(args.out, exist_ok=True)
    output.write_text(os.path.join(args.out, "resolved_config.txt"), cfg.to_ini())
    if args.grid_summary:
        try:
            model = cfg.model()
            table = build_neighborhoods(build_grid(model.domain), model.influence)
        except ConfigurationError as exc:
            print(f"configuration error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        output.write_text(os.path.join(args.out, "grid_summary.txt"), table.summary())
    return dispatch(args.subcommand, cfg, args.out, args)


if __name__ == "__main__":
    sys.exit(main())
