"""Microscopic Langevin dynamics of N interacting ellipses.

Deterministic drift is integrated with a kick-drift (semi-implicit Euler)
scheme: velocities are updated from forces at the current configuration,
then positions move with the new velocities.  Noise enters after the kick
as Euler-Maruyama increments.  Pair forces are weak-coupling scaled by
1/N and evaluated through a linked-cell list whose cell size equals the
interaction cutoff; the per-particle accumulation order is fixed by the
particle index, so results are bitwise reproducible.
"""

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ellipsim.flow import FlowField, eval_field, jeffery_g
from ellipsim.potential import PotentialParams, cutoff_radius

__all__ = [
    "DynamicsParams",
    "MicroRun",
    "ParticleEnsemble",
    "interaction_forces",
    "run_ensemble",
    "step",
    "wall_ghosts",
]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class DynamicsParams:
    """Relaxation rates, inertia and noise amplitudes of the particle model."""

    gamma: float = 1.0
    gamma_bar: float = 1.0
    m: float = 1.0
    I_c: float = 1.0
    A: float = 0.0
    B: float = 0.0

    def __post_init__(self):
        if self.m <= 0 or self.I_c <= 0:
            raise ValueError("mass and moment of inertia must be positive")
        if min(self.gamma, self.gamma_bar, self.A, self.B) < 0:
            raise ValueError("rates and noise amplitudes must be nonnegative")


class ParticleEnsemble:
    """State arrays of N particles plus the realization's random stream."""

    def __init__(self, r, v, theta, omega, rng=None, seed=None):
        self.r = np.atleast_2d(np.asarray(r, dtype=float)).copy()
        self.v = np.atleast_2d(np.asarray(v, dtype=float)).copy()
        self.theta = np.atleast_1d(np.asarray(theta, dtype=float)).copy() % TWO_PI
        self.omega = np.atleast_1d(np.asarray(omega, dtype=float)).copy()
        n = len(self.r)
        if n < 1 or self.v.shape != (n, 2) or self.theta.shape != (n,) \
                or self.omega.shape != (n,):
            raise ValueError("inconsistent particle state shapes")
        self.seed = seed
        self.rng = rng if rng is not None else \
            np.random.Generator(np.random.Philox(key=seed or 0))

    def __len__(self):
        return len(self.r)

    def snapshot(self):
        """Detached copy of the state arrays as a dict."""
        return {"r": self.r.copy(), "v": self.v.copy(),
                "theta": self.theta.copy(), "omega": self.omega.copy()}


@njit(cache=True)
def _pair_sums(pos, theta, eps, n_real, cell, aniso, dsq, lam, cutoff2,
               fx, fy, tau):
    """Linked-cell sums of grad_r U and d_theta U acting on real particles.

    ``pos``/``theta``/``eps`` hold real particles first, then static ghosts;
    ``eps[j]`` is the amplitude strength contributed by the source particle j.
    """
    n = pos.shape[0]
    xmin = pos[:, 0].min()
    ymin = pos[:, 1].min()
    ncx = int((pos[:, 0].max() - xmin) / cell) + 1
    ncy = int((pos[:, 1].max() - ymin) / cell) + 1

    cid = np.empty(n, dtype=np.int64)
    counts = np.zeros(ncx * ncy + 1, dtype=np.int64)
    for i in range(n):
        cx = min(int((pos[i, 0] - xmin) / cell), ncx - 1)
        cy = min(int((pos[i, 1] - ymin) / cell), ncy - 1)
        cid[i] = cx * ncy + cy
        counts[cid[i] + 1] += 1
    for c in range(1, ncx * ncy + 1):
        counts[c] += counts[c - 1]
    order = np.empty(n, dtype=np.int64)
    fill = counts[:-1].copy()
    for i in range(n):
        order[fill[cid[i]]] = i
        fill[cid[i]] += 1

    for i in range(n_real):
        xi, yi = pos[i, 0], pos[i, 1]
        ci, si = np.cos(theta[i]), np.sin(theta[i])
        cx = min(int((xi - xmin) / cell), ncx - 1)
        cy = min(int((yi - ymin) / cell), ncy - 1)
        sfx = 0.0
        sfy = 0.0
        stau = 0.0
        for ox in range(max(cx - 1, 0), min(cx + 2, ncx)):
            for oy in range(max(cy - 1, 0), min(cy + 2, ncy)):
                c = ox * ncy + oy
                for idx in range(counts[c], counts[c + 1]):
                    j = order[idx]
                    if j == i:
                        continue
                    d1 = pos[j, 0] - xi
                    d2 = pos[j, 1] - yi
                    if d1 * d1 + d2 * d2 >= cutoff2:
                        continue
                    cj, sj = np.cos(theta[j]), np.sin(theta[j])
                    g11 = aniso * (ci * ci + cj * cj) + 2.0 * dsq
                    g22 = aniso * (si * si + sj * sj) + 2.0 * dsq
                    g12 = aniso * (ci * si + cj * sj)
                    det = g11 * g22 - g12 * g12
                    w1 = (g22 * d1 - g12 * d2) / det
                    w2 = (g11 * d2 - g12 * d1) / det
                    s = d1 * w1 + d2 * w2
                    if s >= 1.0:
                        continue
                    cpsi = np.cos(theta[i] - theta[j])
                    spsi = np.sin(theta[i] - theta[j])
                    rad = 1.0 - lam * lam * cpsi * cpsi
                    a = eps[j] / np.sqrt(rad)
                    one_minus = 1.0 - s
                    u = a * np.exp(-s / one_minus)
                    du_ds = -u / (one_minus * one_minus)
                    sfx += -2.0 * du_ds * w1
                    sfy += -2.0 * du_ds * w2
                    w_eta = w1 * ci + w2 * si
                    w_etap = -w1 * si + w2 * ci
                    ds_dth = -2.0 * aniso * w_eta * w_etap
                    dloga = -lam * lam * cpsi * spsi / rad
                    stau += u * dloga + du_ds * ds_dth
        fx[i] = sfx
        fy[i] = sfy
        tau[i] = stau


def interaction_forces(r, theta, pot_params: PotentialParams, m, i_c,
                       ghosts=None, ghost_boost=10.0):
    """Per-particle pair acceleration ``(-1/(m N) sum grad U, -1/(I_c N) sum dU)``.

    ``ghosts`` is an optional ``(positions, angles)`` pair of static wall
    particles whose contributions use ``ghost_boost * eps0``; the 1/N
    scaling always counts real particles only.
    """
    r = np.atleast_2d(np.asarray(r, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    n_real = len(r)
    if ghosts is not None and len(ghosts[0]):
        gpos, gtheta = ghosts
        pos = np.vstack([r, np.atleast_2d(gpos)])
        ang = np.concatenate([theta, np.atleast_1d(gtheta)])
        eps = np.full(len(pos), pot_params.eps0)
        eps[n_real:] = ghost_boost * pot_params.eps0
    else:
        pos, ang = r, theta
        eps = np.full(n_real, pot_params.eps0)

    fx = np.zeros(n_real)
    fy = np.zeros(n_real)
    tau = np.zeros(n_real)
    if len(pos) > 1:
        cut = cutoff_radius(pot_params)
        _pair_sums(np.ascontiguousarray(pos), np.ascontiguousarray(ang), eps,
                   n_real, cut, pot_params.l**2 - pot_params.d**2,
                   pot_params.d**2, pot_params.lambda_shape, cut * cut,
                   fx, fy, tau)
    acc = np.stack([fx, fy], axis=-1) * (-1.0 / (m * n_real))
    alpha = tau * (-1.0 / (i_c * n_real))
    return acc, alpha


def wall_ghosts(domain, pot_params: PotentialParams):
    """Static wall particles spaced l/2 along each side of ``domain``.

    Orientations are parallel to the wall (0 on horizontal, pi/2 on
    vertical sides); duplicate corner positions keep the horizontal
    orientation.  Ghost interactions are meant to use eps0 * 10.
    """
    x0, y0, x1, y1 = domain
    half = 0.5 * pot_params.l
    if x1 - x0 < pot_params.l or y1 - y0 < pot_params.l:
        raise ValueError("domain sides must be at least the particle length")
    xs = x0 + half * np.arange(int(np.floor((x1 - x0) / half)) + 1)
    ys = y0 + half * np.arange(int(np.floor((y1 - y0) / half)) + 1)
    pts = []
    angs = []
    for y in (y0, y1):
        for x in xs:
            pts.append((x, y))
            angs.append(0.0)
    for x in (x0, x1):
        for y in ys:
            pts.append((x, y))
            angs.append(0.5 * np.pi)
    pos = np.array(pts)
    ang = np.array(angs)
    _, keep = np.unique(pos.round(12), axis=0, return_index=True)
    keep.sort()
    return pos[keep], ang[keep]


def step(ens: ParticleEnsemble, dyn: DynamicsParams, ext, flow: FlowField, dt,
         pot_params=None, ghosts=None, lam=None) -> ParticleEnsemble:
    """Advance the ensemble by one kick-drift step of size ``dt`` in place.

    ``pot_params=None`` disables pair interactions; ``lam`` overrides the
    aspect factor used in the preferred-rotation term (defaults to the
    potential's shape factor, or 0 without one).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    sample = eval_field(flow, ens.r)
    if lam is None:
        lam = pot_params.lambda_shape if pot_params is not None else 0.0
    g = jeffery_g(ens.theta, sample, lam)

    if pot_params is not None:
        acc, alpha = interaction_forces(ens.r, ens.theta, pot_params,
                                        dyn.m, dyn.I_c, ghosts=ghosts)
    else:
        acc = 0.0
        alpha = 0.0

    ens.v += dt * (dyn.gamma * (sample.u - ens.v) + acc
                   - ext.grad_v1(ens.r) - 0.5 * dyn.A**2 * ens.v)
    ens.omega += dt * (dyn.gamma_bar * (g - ens.omega) + alpha
                       - ext.dv2(ens.theta) - 0.5 * dyn.B**2 * ens.omega)
    if dyn.A > 0:
        ens.v += dyn.A * np.sqrt(dt) * ens.rng.standard_normal(ens.v.shape)
    if dyn.B > 0:
        ens.omega += dyn.B * np.sqrt(dt) * ens.rng.standard_normal(ens.omega.shape)

    ens.r += dt * ens.v
    ens.theta = (ens.theta + dt * ens.omega) % TWO_PI

    if not (np.all(np.isfinite(ens.r)) and np.all(np.isfinite(ens.v))
            and np.all(np.isfinite(ens.theta)) and np.all(np.isfinite(ens.omega))):
        raise RuntimeError(
            "non-finite particle state after step: dt too large or force blow-up "
            f"(dt={dt:g}, worst |v|={np.abs(ens.v).max():g})")
    return ens


@dataclass
class MicroRun:
    """Everything needed to run one microscopic scenario."""

    n: int
    support: tuple                 # initial-position rectangle (x0, y0, x1, y1)
    dyn: DynamicsParams
    ext: object
    flow: FlowField
    pot_params: PotentialParams = None
    interaction: bool = True
    theta0: float = 0.0
    v0: tuple = (0.0, 0.0)
    omega0: float = 0.0
    dt: float = 1e-3
    t_end: float = 1.0
    snapshot_times: tuple = ()
    seed: int = 0
    wall_domain: tuple = None      # rectangle growing ghost walls, or None

    def initial_ensemble(self, realization=0) -> ParticleEnsemble:
        rng = np.random.Generator(np.random.Philox(key=self.seed + realization))
        x0, y0, x1, y1 = self.support
        r = np.column_stack([rng.uniform(x0, x1, self.n),
                             rng.uniform(y0, y1, self.n)])
        v = np.tile(np.asarray(self.v0, dtype=float), (self.n, 1))
        return ParticleEnsemble(r, v, np.full(self.n, float(self.theta0)),
                                np.full(self.n, float(self.omega0)), rng=rng,
                                seed=self.seed + realization)


def _run_one(run: MicroRun, realization):
    ens = run.initial_ensemble(realization)
    ghosts = None
    pot = run.pot_params if run.interaction else None
    if run.wall_domain is not None and pot is not None:
        ghosts = wall_ghosts(run.wall_domain, pot)
    lam = run.pot_params.lambda_shape if run.pot_params is not None else 0.0

    times = sorted(set(float(t) for t in run.snapshot_times) | {float(run.t_end)})
    snaps = {}
    steps_done = 0
    for t_target in times:
        n_steps = int(round(t_target / run.dt))
        while steps_done < n_steps:
            step(ens, run.dyn, run.ext, run.flow, run.dt,
                 pot_params=pot, ghosts=ghosts, lam=lam)
            steps_done += 1
        snaps[t_target] = ens.snapshot()
    return snaps


def run_ensemble(run: MicroRun, realizations, workers=1):
    """Independent Monte-Carlo realizations with streams keyed seed + k.

    Returns a list (one entry per realization) of ``{time: snapshot}``
    dicts.  Realizations are embarrassingly parallel; with ``workers > 1``
    they run in separate processes, results ordered by realization index
    either way.
    """
    if realizations < 1:
        raise ValueError("need at least one realization")
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_one, run, k) for k in range(realizations)]
            out = []
            for k, fut in enumerate(futures):
                try:
                    out.append(fut.result())
                except Exception as exc:
                    raise RuntimeError(f"realization {k} failed: {exc}") from exc
            return out
    out = []
    for k in range(realizations):
        try:
            out.append(_run_one(run, k))
        except Exception as exc:
            raise RuntimeError(f"realization {k} failed: {exc}") from exc
    return out
