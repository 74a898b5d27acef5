"""Position-angle hydrodynamic system: fluxes, sources, conservation."""

import numpy as np
import pytest

from ellipsim.external import ExternalPotentials
from ellipsim.flow import FlowField
from ellipsim.grids import Grid3D
from ellipsim.potential import PotentialParams
from ellipsim.qmodel import (QGrid, QSystem, build_q_kernel_table,
                             initial_block_q, q_flux, q_interaction,
                             q_wave_speed)
from ellipsim.particles import DynamicsParams


def small_geom():
    return Grid3D(x0=-1.0, y0=-1.0, h=0.25, nx=8, ny=8, ntheta=4)


def test_flux_closed_form():
    # q=2, v=(1, -0.5), w=3: advective part is v_axis * state
    state = np.array([[2.0, 2.0, -1.0, 6.0]])
    mono = q_flux(state, 0, "monokinetic")
    assert np.allclose(mono, [[2.0, 2.0, -1.0, 6.0]])
    maxw = q_flux(state, 0, "maxwellian")
    assert np.allclose(maxw, [[2.0, 4.0, -1.0, 6.0]])  # pressure q on comp 1
    maxw_y = q_flux(state, 1, "maxwellian")
    assert np.allclose(maxw_y, [[-1.0, -1.0, 2.5, -3.0]])
    with pytest.raises(ValueError):
        q_flux(state, 0, "isothermal")


def test_wave_speeds():
    state = np.array([[1.0, 3.0, -4.0, 0.0]])
    assert q_wave_speed(state, 0, "monokinetic") == 3.0
    assert q_wave_speed(state, 0, "maxwellian") == 4.0
    assert q_wave_speed(state, 1, "maxwellian") == 5.0


def test_initial_block_unit_mass():
    geom = small_geom()
    grid = initial_block_q(geom, (-0.5, -0.5, 0.5, 0.5), theta_lo=0.0)
    assert np.isclose(grid.total_mass(), 1.0)
    # mass sits in a single angle cell
    per_angle = grid.q.sum(axis=(0, 1))
    assert np.count_nonzero(per_angle) == 1
    with pytest.raises(ValueError):
        initial_block_q(geom, (5.0, 5.0, 6.0, 6.0))


def test_interaction_matches_table_convolution():
    geom = small_geom()
    pot = PotentialParams(L=0.3, D=0.15)
    table = build_q_kernel_table(geom, pot, m=2.0, i_c=0.5)
    rng = np.random.default_rng(0)
    grid = QGrid(geom)
    grid.data[..., 0] = rng.uniform(0, 1, grid.q.shape)
    kern = q_interaction(grid, table)
    assert np.abs(kern - table.convolve(grid.q)).max() == 0.0
    assert kern.shape == grid.q.shape + (3,)


@pytest.mark.parametrize("closure", ["maxwellian", "monokinetic"])
def test_mass_conserved_under_full_dynamics(closure):
    geom = small_geom()
    pot = PotentialParams(L=0.3, D=0.15)
    dyn = DynamicsParams(gamma=1.0, gamma_bar=1.0, A=1.0, B=1.0, I_c=0.5)
    ext = ExternalPotentials(v1="quadratic", v2="sine")
    system = QSystem(geom, closure, FlowField.rotational(), dyn, ext, pot,
                     bc_space="reflective")
    grid = initial_block_q(geom, (-0.5, -0.5, 0.5, 0.5))
    m0 = grid.total_mass()
    for _ in range(60):
        grid = system.step(grid, 0.01)
    assert abs(grid.total_mass() - m0) <= 1e-10
    assert np.all(np.isfinite(grid.data))


def test_velocity_relaxes_to_uniform_flow():
    # gamma(u - v) only: mean velocity approaches u everywhere mass lives
    geom = small_geom()
    dyn = DynamicsParams(gamma=5.0)
    system = QSystem(geom, "monokinetic", FlowField.uniform((0.4, 0.0)),
                     dyn, ExternalPotentials(), None, bc_space="neumann")
    grid = initial_block_q(geom, (-0.6, -0.6, 0.6, 0.6))
    grid = system.run(grid, 1.5, max_dt=0.01)
    alive = grid.q > 1e-3
    v1 = grid.data[..., 1][alive] / grid.q[alive]
    assert np.allclose(v1, 0.4, atol=0.02)


def test_angular_velocity_tracks_jeffery_rate():
    # rotational flow: g = -1, so w relaxes toward -1
    geom = small_geom()
    pot = PotentialParams(L=0.3, D=0.15)
    dyn = DynamicsParams(gamma=0.0, gamma_bar=4.0, I_c=1.0)
    system = QSystem(geom, "monokinetic", FlowField.rotational(), dyn,
                     ExternalPotentials(), None)
    grid = initial_block_q(geom, (-0.6, -0.6, 0.6, 0.6))
    grid = system.run(grid, 1.0, max_dt=0.01)
    alive = grid.q > 1e-3
    w = grid.data[..., 3][alive] / grid.q[alive]
    assert np.allclose(w, -1.0, atol=0.05)


def test_run_lands_on_snapshots_once():
    geom = small_geom()
    system = QSystem(geom, "maxwellian", FlowField.uniform((0, 0)),
                     DynamicsParams(), ExternalPotentials(), None)
    grid = initial_block_q(geom, (-0.5, -0.5, 0.5, 0.5))
    seen = []
    system.run(grid, 0.2, snapshot_times=(0.1, 0.2, 0.5),
               on_snapshot=lambda t, g: seen.append(t), max_dt=0.05)
    assert seen == [0.1, 0.2]
