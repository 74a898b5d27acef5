"""Pair potential: closed forms, gradients vs finite differences, symmetry."""

import numpy as np
import pytest

from ellipsim.potential import (PotentialParams, amplitude, cutoff_radius,
                                potential, potential_grad, shape_matrix)


PARAMS = PotentialParams(L=1.0, D=0.5, eps0=1.0)


def random_configs(n, rng, params, smax=0.95):
    """Pairs inside the cutoff whose overlap stays below ``smax``."""
    out = []
    cut = cutoff_radius(params)
    while len(out) < n:
        r = rng.uniform(-1.0, 1.0, 2)
        rbar = r + rng.uniform(-cut, cut, 2)
        th = rng.uniform(0.0, 2 * np.pi)
        thb = rng.uniform(0.0, 2 * np.pi)
        u = potential(r, rbar, th, thb, params)
        if u > 1e-8 * params.eps0:
            g = shape_matrix(th, params) + shape_matrix(thb, params)
            d = rbar - r
            s = d @ np.linalg.solve(g, d)
            if s < smax:
                out.append((r, rbar, th, thb))
    return out


def test_params_validation():
    with pytest.raises(ValueError):
        PotentialParams(L=0.5, D=1.0)
    with pytest.raises(ValueError):
        PotentialParams(L=1.0, D=0.5, eps0=0.0)
    with pytest.raises(ValueError):
        PotentialParams(L=1.0, D=-0.5)


def test_shape_matrix_closed_form():
    # gamma(theta) = (l^2 - d^2) eta eta^T + d^2 Id with l=2L, d=2D
    g0 = shape_matrix(0.0, PARAMS)
    assert np.allclose(g0, np.diag([4.0, 1.0]))
    g90 = shape_matrix(np.pi / 2, PARAMS)
    assert np.allclose(g90, np.diag([1.0, 4.0]))
    g45 = shape_matrix(np.pi / 4, PARAMS)
    assert np.allclose(g45, np.array([[2.5, 1.5], [1.5, 2.5]]))


def test_amplitude_closed_form():
    lam = PARAMS.lambda_shape
    assert np.isclose(lam, 0.6)
    assert np.isclose(amplitude(0.3, 0.3, PARAMS), (1 - lam**2) ** -0.5)
    assert np.isclose(amplitude(0.0, np.pi / 2, PARAMS), 1.0)
    # periodicity and swap symmetry
    rng = np.random.default_rng(0)
    t, tb = rng.uniform(0, 2 * np.pi, (2, 50))
    assert np.allclose(amplitude(t, tb, PARAMS), amplitude(tb, t, PARAMS))
    assert np.allclose(amplitude(t, tb, PARAMS), amplitude(t + np.pi, tb, PARAMS))


def test_compact_support():
    cut = cutoff_radius(PARAMS)
    assert np.isclose(cut, np.sqrt(2.0) * 2.0)
    rng = np.random.default_rng(1)
    th, thb = rng.uniform(0, 2 * np.pi, (2, 200))
    d = rng.uniform(cut, 3 * cut, 200)
    ang = rng.uniform(0, 2 * np.pi, 200)
    rbar = np.stack([d * np.cos(ang), d * np.sin(ang)], axis=-1)
    u = potential(np.zeros((200, 2)), rbar, th, thb, PARAMS)
    assert np.all(u == 0.0)
    grad, dth = potential_grad(np.zeros((200, 2)), rbar, th, thb, PARAMS)
    assert np.all(grad == 0.0) and np.all(dth == 0.0)


def test_touching_value_positive_inside():
    cfgs = random_configs(50, np.random.default_rng(2), PARAMS)
    for r, rbar, th, thb in cfgs:
        assert potential(r, rbar, th, thb, PARAMS) > 0.0


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    cfgs = random_configs(100, rng, PARAMS)
    eps = 1e-6
    for r, rbar, th, thb in cfgs:
        grad, dth = potential_grad(r, rbar, th, thb, PARAMS)
        for k in range(2):
            dr = np.zeros(2)
            dr[k] = eps
            fd = (potential(r + dr, rbar, th, thb, PARAMS)
                  - potential(r - dr, rbar, th, thb, PARAMS)) / (2 * eps)
            assert abs(grad[k] - fd) <= 1e-6 * max(1.0, abs(fd))
        fd = (potential(r, rbar, th + eps, thb, PARAMS)
              - potential(r, rbar, th - eps, thb, PARAMS)) / (2 * eps)
        assert abs(dth - fd) <= 1e-6 * max(1.0, abs(fd))


def test_swap_symmetry_and_third_law():
    rng = np.random.default_rng(4)
    for r, rbar, th, thb in random_configs(50, rng, PARAMS):
        u1 = potential(r, rbar, th, thb, PARAMS)
        u2 = potential(rbar, r, thb, th, PARAMS)
        assert np.isclose(u1, u2, rtol=0, atol=1e-14)
        g1, _ = potential_grad(r, rbar, th, thb, PARAMS)
        g2, _ = potential_grad(rbar, r, thb, th, PARAMS)
        assert np.allclose(g1 + g2, 0.0, atol=1e-12)


def test_eps0_scaling():
    boosted = PotentialParams(L=1.0, D=0.5, eps0=10.0)
    rng = np.random.default_rng(5)
    for r, rbar, th, thb in random_configs(20, rng, PARAMS):
        assert np.isclose(potential(r, rbar, th, thb, boosted),
                          10.0 * potential(r, rbar, th, thb, PARAMS))
