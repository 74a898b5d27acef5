"""Langevin particle dynamics: force sums, integrator, ghosts, ensembles."""

import numpy as np
import pytest

from ellipsim.external import ExternalPotentials
from ellipsim.flow import FlowField
from ellipsim.particles import (DynamicsParams, MicroRun, ParticleEnsemble,
                                interaction_forces, run_ensemble, step,
                                wall_ghosts)
from ellipsim.potential import PotentialParams, potential_grad


PARAMS = PotentialParams(L=0.1, D=0.05)


def brute_force(r, theta, params, m, i_c, extra=None, boost=10.0):
    """O(N^2) double loop over all pairs with exact gradient calls."""
    n = len(r)
    pos, ang = r, theta
    eps = np.ones(n)
    if extra is not None:
        pos = np.vstack([r, extra[0]])
        ang = np.concatenate([theta, extra[1]])
        eps = np.concatenate([eps, np.full(len(extra[0]), boost)])
    acc = np.zeros((n, 2))
    alpha = np.zeros(n)
    for i in range(n):
        for j in range(len(pos)):
            if j == i:
                continue
            g, dth = potential_grad(r[i], pos[j], theta[i], ang[j], params)
            acc[i] -= eps[j] * g / (m * n)
            alpha[i] -= eps[j] * dth / (i_c * n)
    return acc, alpha


def test_single_particle_zero_force():
    acc, alpha = interaction_forces(np.zeros((1, 2)), np.zeros(1), PARAMS,
                                    1.0, 1.0)
    assert np.all(acc == 0.0) and np.all(alpha == 0.0)


def test_cell_list_equals_direct_sum():
    rng = np.random.default_rng(0)
    n = 120
    r = rng.uniform(-0.4, 0.4, (n, 2))
    th = rng.uniform(0, 2 * np.pi, n)
    acc0, al0 = brute_force(r, th, PARAMS, m=1.0, i_c=0.001)
    acc, al = interaction_forces(r, th, PARAMS, 1.0, 0.001)
    assert np.abs(acc - acc0).max() <= 1e-12 * max(1.0, np.abs(acc0).max())
    assert np.abs(al - al0).max() <= 1e-12 * max(1.0, np.abs(al0).max())


def test_newton_third_law():
    rng = np.random.default_rng(1)
    r = rng.uniform(-0.3, 0.3, (60, 2))
    th = rng.uniform(0, 2 * np.pi, 60)
    acc, _ = interaction_forces(r, th, PARAMS, 1.0, 1.0)
    # same mass for all particles: accelerations sum to zero
    assert np.abs(acc.sum(axis=0)).max() <= 1e-12


def test_ghosts_enter_with_boost():
    rng = np.random.default_rng(2)
    r = rng.uniform(-0.45, 0.45, (40, 2))
    th = rng.uniform(0, 2 * np.pi, 40)
    ghosts = wall_ghosts((-0.5, -0.5, 0.5, 0.5), PARAMS)
    acc0, al0 = brute_force(r, th, PARAMS, 1.0, 0.001, extra=ghosts)
    acc, al = interaction_forces(r, th, PARAMS, 1.0, 0.001, ghosts=ghosts)
    assert np.abs(acc - acc0).max() <= 1e-12 * max(1.0, np.abs(acc0).max())
    assert np.abs(al - al0).max() <= 1e-12 * max(1.0, np.abs(al0).max())


def test_wall_ghost_layout():
    # unit square with l = 0.1: 21 nodes per side at spacing l/2 = 0.05
    gpos, gth = wall_ghosts((0.0, 0.0, 1.0, 1.0), PotentialParams(L=0.05, D=0.025))
    bottom = gpos[:, 1] == 0.0
    assert bottom.sum() == 21
    assert np.all(gth[bottom] == 0.0)
    left = (gpos[:, 0] == 0.0) & ~np.isin(gpos[:, 1], [0.0, 1.0])
    assert np.all(gth[left] == np.pi / 2)
    # corners deduplicated, horizontal orientation kept
    assert len(np.unique(gpos.round(12), axis=0)) == len(gpos)
    corner = (gpos[:, 0] == 0.0) & (gpos[:, 1] == 0.0)
    assert corner.sum() == 1 and gth[corner][0] == 0.0


def test_deterministic_relaxation_matches_closed_form():
    # gamma (u - v) with constant u and no forces: v(t) = u + (v0-u) e^{-gt}
    dyn = DynamicsParams(gamma=2.0, gamma_bar=1.0)
    flow = FlowField.uniform((1.0, 0.0))
    ext = ExternalPotentials()
    errs = []
    for dt in (1e-3, 5e-4):
        ens = ParticleEnsemble(np.zeros((1, 2)), np.array([[0.0, 0.0]]),
                               np.zeros(1), np.zeros(1), seed=0)
        steps = int(round(1.0 / dt))
        for _ in range(steps):
            step(ens, dyn, ext, flow, dt, pot_params=None, lam=0.0)
        exact = 1.0 - np.exp(-2.0)
        errs.append(abs(ens.v[0, 0] - exact))
    ratio = errs[0] / errs[1]
    assert 1.7 <= ratio <= 2.3  # first order in dt


def test_rng_untouched_without_noise():
    dyn = DynamicsParams(A=0.0, B=0.0)
    ens = ParticleEnsemble(np.zeros((3, 2)), np.zeros((3, 2)),
                           np.zeros(3), np.zeros(3), seed=7)
    before = ens.rng.integers(0, 2**32)  # consume one to fix the stream
    ens2 = ParticleEnsemble(np.zeros((3, 2)), np.zeros((3, 2)),
                            np.zeros(3), np.zeros(3), seed=7)
    ens2.rng.integers(0, 2**32)
    for _ in range(10):
        step(ens2, dyn, ExternalPotentials(), FlowField.uniform((0, 0)),
             1e-2, pot_params=None, lam=0.0)
    assert ens.rng.integers(0, 2**32) == ens2.rng.integers(0, 2**32)


def test_theta_stays_wrapped():
    dyn = DynamicsParams()
    ens = ParticleEnsemble(np.zeros((2, 2)), np.zeros((2, 2)),
                           np.array([0.1, 6.0]), np.array([50.0, -50.0]), seed=1)
    for _ in range(100):
        step(ens, dyn, ExternalPotentials(), FlowField.uniform((0, 0)),
             1e-2, pot_params=None, lam=0.0)
    assert np.all((ens.theta >= 0.0) & (ens.theta < 2 * np.pi))


def test_nonfinite_state_raises():
    dyn = DynamicsParams()
    ens = ParticleEnsemble(np.zeros((1, 2)), np.array([[1e308, 0.0]]),
                           np.zeros(1), np.zeros(1), seed=0)
    with pytest.raises(RuntimeError, match="non-finite"):
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(10):
                step(ens, DynamicsParams(gamma=0.0), ExternalPotentials(v1="quadratic"),
                     FlowField.uniform((0, 0)), 1e3, pot_params=None, lam=0.0)


def test_run_ensemble_reproducible_and_distinct_streams():
    run = MicroRun(n=20, support=(-0.5, -0.5, 0.5, 0.5),
                   dyn=DynamicsParams(A=1.0, B=1.0, I_c=0.1),
                   ext=ExternalPotentials(), flow=FlowField.top_bottom(),
                   pot_params=PARAMS, dt=1e-2, t_end=0.1, seed=3)
    a = run_ensemble(run, 2)
    b = run_ensemble(run, 2)
    for k in range(2):
        assert np.array_equal(a[k][0.1]["r"], b[k][0.1]["r"])
    assert not np.array_equal(a[0][0.1]["r"], a[1][0.1]["r"])


def test_parallel_workers_match_serial():
    run = MicroRun(n=15, support=(-0.5, -0.5, 0.5, 0.5),
                   dyn=DynamicsParams(A=0.5, B=0.5, I_c=0.1),
                   ext=ExternalPotentials(), flow=FlowField.rotational(),
                   pot_params=PARAMS, dt=1e-2, t_end=0.05, seed=9)
    serial = run_ensemble(run, 3, workers=1)
    parallel = run_ensemble(run, 3, workers=2)
    for k in range(3):
        for key in ("r", "v", "theta", "omega"):
            assert np.array_equal(serial[k][0.05][key], parallel[k][0.05][key])
