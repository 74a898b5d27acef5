"""Command line front end: run a scenario end to end and write all outputs.

Usage: ``ellipsim --scenario top-bottom --out results`` (presets by name)
or ``ellipsim --scenario my_run.ini``.  Exit codes: 0 success, 1 runtime
failure, 2 invalid configuration.
"""

import argparse
import csv
import os
import sys
import time

import numpy as np

from ellipsim.external import ExternalPotentials
from ellipsim.flow import FlowField, load_grid_field
from ellipsim.grids import Grid2D, Grid3D
from ellipsim.particles import DynamicsParams, MicroRun, run_ensemble
from ellipsim.potential import PotentialParams
from ellipsim.qmodel import QSystem, initial_block_q
from ellipsim.rhomodel import (DiffusiveParams, DiffusiveState, DiffusiveSystem,
                               RhoSystem, initial_block_rho)
from ellipsim.scenario import (PRESETS, Scenario, ScenarioError, dump_scenario,
                               load_scenario, preset)
from ellipsim.stationary import fit_decay_rate, solve_stationary_q
from ellipsim.stats import (angular_distribution, angular_distribution_weighted,
                            smooth, spatial_histogram)

__all__ = ["main", "run_scenario"]

SCHEMA_VERSION = "1"


def _fmt(x):
    """Shortest round-trip float text; keeps outputs byte-stable."""
    return repr(float(x))


def _write_csv(path, header, rows, manifest, schema):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    manifest.append((os.path.basename(path), schema, SCHEMA_VERSION))


def _flow_field(sc: Scenario) -> FlowField:
    if sc.flow == "none":
        return FlowField.uniform((0.0, 0.0))
    if sc.flow == "top-bottom":
        return FlowField.top_bottom()
    if sc.flow == "rotational":
        return FlowField.rotational()
    if sc.flow == "cavity-demo":
        return _cavity_demo_flow(sc.domain)
    return load_grid_field(sc.flow_path)


def _cavity_demo_flow(domain, n=101) -> FlowField:
    """Divergence-free cavity-like swirl from a product stream function.

    The lid profile is a Gaussian bump; the vertical factor y^2(y-1)
    vanishes with its slope at the bottom and reaches slope 1 at the lid,
    mimicking a driven cavity without an external flow solver.
    """
    x0, y0, x1, y1 = domain
    xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    xg, yg = np.meshgrid(xs, ys, indexing="ij")
    xr = (xg - x0) / (x1 - x0)
    yr = (yg - y0) / (y1 - y0)
    p = np.exp(-((xr - 0.5) ** 2) / 0.02)
    dp = p * (-2.0 * (xr - 0.5) / 0.02) / (x1 - x0)
    q = yr**2 * (yr - 1.0)
    dq = (3.0 * yr**2 - 2.0 * yr) / (y1 - y0)
    u1 = p * dq
    u2 = -dp * q
    h = (xs[1] - xs[0], ys[1] - ys[0])
    return FlowField.gridded(x0, y0, h[0], h[1], u1.T, u2.T)


def _spatial_grid(sc: Scenario) -> Grid2D:
    x0, y0, x1, y1 = sc.domain
    nx = int(round((x1 - x0) / sc.h))
    ny = int(round((y1 - y0) / sc.h))
    return Grid2D(x0=x0, y0=y0, h=sc.h, nx=nx, ny=ny)


def _tname(t):
    return f"{t:g}"


def run_scenario(sc: Scenario) -> dict:
    """Execute a validated scenario; returns a report with files written."""
    sc.validate()
    t_start = time.perf_counter()
    os.makedirs(sc.out_dir, exist_ok=True)
    manifest = []

    with open(os.path.join(sc.out_dir, "resolved_scenario"), "w") as fh:
        dump_scenario(sc, fh)

    dyn = DynamicsParams(gamma=sc.gamma, gamma_bar=sc.gamma_bar, m=sc.m,
                         I_c=sc.I_c, A=sc.A, B=sc.B)
    ext = ExternalPotentials(v1=sc.v1, v2=sc.v2)
    pot = PotentialParams(L=sc.L, D=sc.D, eps0=sc.eps0)
    ipot = pot if sc.interaction else None
    flow = _flow_field(sc)
    diagnostics = {}

    if sc.study == "stationary":
        _run_stationary_study(sc, ext, ipot, manifest, diagnostics)
    elif sc.model == "micro":
        _run_micro(sc, dyn, ext, pot, ipot, flow, manifest, diagnostics)
    elif sc.model in ("q-maxwellian", "q-monokinetic"):
        _run_q(sc, dyn, ext, ipot, flow, manifest)
    elif sc.model == "rho":
        _run_rho(sc, dyn, ext, ipot, flow, manifest)
    else:
        _run_diffusive(sc, dyn, ext, ipot, flow, manifest)

    _write_csv(os.path.join(sc.out_dir, "manifest.csv"),
               ["file", "schema", "version"], list(manifest), [], "manifest")
    return {"files": [row[0] for row in manifest] + ["manifest.csv"],
            "out_dir": sc.out_dir,
            "wall_time": time.perf_counter() - t_start,
            "diagnostics": diagnostics}


def _workers(realizations):
    raw = os.environ.get("ELLIPSIM_THREADS", "1")
    n = int(raw)
    if n == 0:
        n = os.cpu_count() or 1
    return max(1, min(n, realizations))


def _run_micro(sc, dyn, ext, pot, ipot, flow, manifest, diagnostics):
    run = MicroRun(n=sc.n, support=sc.support, dyn=dyn, ext=ext, flow=flow,
                   pot_params=pot, interaction=sc.interaction,
                   theta0=sc.theta0, v0=sc.v0, omega0=sc.omega0, dt=sc.dt,
                   t_end=sc.t_end, snapshot_times=sc.snapshots, seed=sc.seed,
                   wall_domain=sc.domain if sc.wall_ghosts else None)
    results = run_ensemble(run, sc.realizations,
                           workers=_workers(sc.realizations))
    geom = _spatial_grid(sc)
    times = sorted(set(float(t) for t in sc.snapshots) | {float(sc.t_end)})
    for t in times:
        tag = _tname(t)
        rows = []
        for k, snaps in enumerate(results):
            s = snaps[t]
            for i in range(sc.n):
                rows.append([_fmt(t), k * sc.n + i,
                             _fmt(s["r"][i, 0]), _fmt(s["r"][i, 1]),
                             _fmt(s["v"][i, 0]), _fmt(s["v"][i, 1]),
                             _fmt(s["theta"][i]), _fmt(s["omega"][i])])
        _write_csv(os.path.join(sc.out_dir, f"micro_particles_t{tag}.csv"),
                   ["t", "id", "x", "y", "vx", "vy", "theta", "omega"],
                   rows, manifest, "particles")
        hist = spatial_histogram([snaps[t]["r"] for snaps in results], geom)
        diagnostics[f"escaped_t{tag}"] = hist.escaped
        _write_csv(os.path.join(sc.out_dir, f"micro_hist_t{tag}.csv"),
                   ["ix", "iy", "value"],
                   [[i, j, _fmt(hist.values[i, j])]
                    for i in range(geom.nx) for j in range(geom.ny)],
                   manifest, "hist2d")
        sm = smooth(hist, 2.0 * sc.h)
        _write_csv(os.path.join(sc.out_dir, f"micro_hist_smooth_t{tag}.csv"),
                   ["ix", "iy", "value"],
                   [[i, j, _fmt(sm.values[i, j])]
                    for i in range(geom.nx) for j in range(geom.ny)],
                   manifest, "hist2d")
        ang = angular_distribution([snaps[t]["theta"] for snaps in results],
                                   nbins=sc.ntheta)
        _write_csv(os.path.join(sc.out_dir, f"micro_angular_t{tag}.csv"),
                   ["itheta", "value"],
                   [[i, _fmt(v)] for i, v in enumerate(ang.values)],
                   manifest, "hist1d")


def _run_q(sc, dyn, ext, ipot, flow, manifest):
    geom2 = _spatial_grid(sc)
    geom = Grid3D(x0=geom2.x0, y0=geom2.y0, h=geom2.h, nx=geom2.nx,
                  ny=geom2.ny, ntheta=sc.ntheta)
    closure = "maxwellian" if sc.model == "q-maxwellian" else "monokinetic"
    system = QSystem(geom, closure, flow, dyn, ext, pot_params=ipot,
                     bc_space=sc.bc)
    state = initial_block_q(geom, sc.support, theta_lo=sc.theta0)

    def emit(t, qgrid):
        tag = _tname(t)
        data = qgrid.data
        rows = [[_fmt(t), i, j, a, _fmt(data[i, j, a, 0]),
                 _fmt(data[i, j, a, 1]), _fmt(data[i, j, a, 2]),
                 _fmt(data[i, j, a, 3])]
                for i in range(geom.nx) for j in range(geom.ny)
                for a in range(geom.ntheta)]
        _write_csv(os.path.join(sc.out_dir, f"q_grid_t{tag}.csv"),
                   ["t", "ix", "iy", "itheta", "q", "qv1", "qv2", "qw"],
                   rows, manifest, "qgrid")
        dens = qgrid.spatial_density()
        _write_csv(os.path.join(sc.out_dir, f"q_rho_t{tag}.csv"),
                   ["t", "ix", "iy", "rho"],
                   [[_fmt(t), i, j, _fmt(dens[i, j])]
                    for i in range(geom.nx) for j in range(geom.ny)],
                   manifest, "rho2d")
        ang = angular_distribution(qgrid, nbins=geom.ntheta)
        _write_csv(os.path.join(sc.out_dir, f"q_angular_t{tag}.csv"),
                   ["itheta", "value"],
                   [[i, _fmt(v)] for i, v in enumerate(ang.values)],
                   manifest, "hist1d")

    system.run(state, sc.t_end, on_snapshot=emit, snapshot_times=sc.snapshots)


def _emit_rho_like(sc, prefix, geom, t, rho, phi, vel, manifest):
    tag = _tname(t)
    rows = [[_fmt(t), i, j, _fmt(rho[i, j]), _fmt(phi[i, j]),
             _fmt(vel[i, j, 0]), _fmt(vel[i, j, 1]), _fmt(vel[i, j, 2])]
            for i in range(geom.nx) for j in range(geom.ny)]
    _write_csv(os.path.join(sc.out_dir, f"{prefix}_grid_t{tag}.csv"),
               ["t", "ix", "iy", "rho", "phi", "v1", "v2", "w"],
               rows, manifest, "rhogrid")
    ang = angular_distribution_weighted(phi, rho, nbins=sc.ntheta)
    _write_csv(os.path.join(sc.out_dir, f"{prefix}_angular_t{tag}.csv"),
               ["itheta", "value"],
               [[i, _fmt(v)] for i, v in enumerate(ang.values)],
               manifest, "hist1d")


def _run_rho(sc, dyn, ext, ipot, flow, manifest):
    geom = _spatial_grid(sc)
    system = RhoSystem(geom, flow, dyn, ext, pot_params=ipot, bc_space=sc.bc,
                       wall_interaction=sc.wall_ghosts)
    state = initial_block_rho(geom, sc.support, phi0=sc.theta0)
    state.data[..., 2] = state.rho * sc.v0[0]
    state.data[..., 3] = state.rho * sc.v0[1]
    state.data[..., 4] = state.rho * sc.omega0

    def emit(t, rgrid):
        _emit_rho_like(sc, "rho", geom, t, rgrid.rho, rgrid.phi(),
                       rgrid.mean_velocity(), manifest)

    system.run(state, sc.t_end, on_snapshot=emit, snapshot_times=sc.snapshots)


def _run_diffusive(sc, dyn, ext, ipot, flow, manifest):
    geom = _spatial_grid(sc)
    params = DiffusiveParams.from_dynamics(dyn)
    system = DiffusiveSystem(geom, flow, params, ext, pot_params=ipot,
                             bc_space=sc.bc, m=sc.m, i_c=sc.I_c)
    state = DiffusiveState.from_rho_grid(
        initial_block_rho(geom, sc.support, phi0=sc.theta0))
    zeros = np.zeros((geom.nx, geom.ny, 3))

    def emit(t, st):
        _emit_rho_like(sc, "diffusive", geom, t, st.rho, st.phi(), zeros,
                       manifest)

    system.run(state, sc.t_end, on_snapshot=emit, snapshot_times=sc.snapshots)


def _run_stationary_study(sc, ext, ipot, manifest, diagnostics):
    """Error series and fitted decay rates over the requested noise levels."""
    geom2 = _spatial_grid(sc)
    geom = Grid3D(x0=geom2.x0, y0=geom2.y0, h=geom2.h, nx=geom2.nx,
                  ny=geom2.ny, ntheta=sc.ntheta)
    stat = solve_stationary_q(geom, ext, pot_params=ipot)
    vol = geom.cell_volume
    sample_times = np.arange(0.0, sc.t_end + 1e-9, 0.1)
    decay_rows = []
    for a in sc.study_noise:
        dyn = DynamicsParams(gamma=sc.gamma, gamma_bar=sc.gamma_bar, m=sc.m,
                             I_c=sc.I_c, A=a, B=a)
        flow = _flow_field(sc)
        system = QSystem(geom, "maxwellian", flow, dyn, ext, pot_params=ipot,
                         bc_space=sc.bc)
        state = initial_block_q(geom, sc.support, theta_lo=sc.theta0)
        times, errors = [], []

        def record(t, qgrid):
            err = float(np.sqrt(((qgrid.q - stat.q_stat) ** 2).sum() * vol))
            times.append(t)
            errors.append(err)

        record(0.0, state)
        system.run(state, sc.t_end, on_snapshot=record,
                   snapshot_times=tuple(sample_times[1:]))
        tag = f"{a:g}"
        _write_csv(os.path.join(sc.out_dir, f"q_error_series_A{tag}.csv"),
                   ["t", "l2_error"],
                   [[_fmt(t), _fmt(e)] for t, e in zip(times, errors)],
                   manifest, "error_series")
        lam = fit_decay_rate(np.array(times), np.array(errors))
        decay_rows.append([_fmt(a), _fmt(a), _fmt(lam)])
        diagnostics[f"lambda_A{tag}"] = lam
    _write_csv(os.path.join(sc.out_dir, "q_decay_rates.csv"),
               ["A", "B", "lambda"], decay_rows, manifest, "decay_rates")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ellipsim",
        description="Run ellipsoid suspension scenarios (microscopic, "
                    "hydrodynamic or diffusive).")
    parser.add_argument("--scenario", required=True,
                        help="scenario INI file, or a preset name: "
                             + ", ".join(sorted(PRESETS)))
    parser.add_argument("--out", help="output directory override")
    parser.add_argument("--seed", type=int, help="random seed override")
    parser.add_argument("--realizations", type=int,
                        help="Monte-Carlo realization count override")
    parser.add_argument("--model", help="model override: micro, q-maxwellian, "
                                        "q-monokinetic, rho or diffusive")
    args = parser.parse_args(argv)

    try:
        if args.scenario in PRESETS:
            sc = preset(args.scenario)
        else:
            sc = load_scenario(args.scenario)
        if args.out is not None:
            sc.out_dir = args.out
        if args.seed is not None:
            sc.seed = args.seed
        if args.realizations is not None:
            sc.realizations = args.realizations
        if args.model is not None:
            sc.model = args.model
        sc.validate()
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return 2

    try:
        report = run_scenario(sc)
    except Exception as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(report['files'])} files to {report['out_dir']} "
          f"in {report['wall_time']:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
