"""Position-level hydrodynamics and its overdamped (diffusive) limit.

The mono-kinetic, mono-angular closure carries five conserved components
per spatial cell: rho, rho*phi, rho*v1, rho*v2, rho*w.  Transport is
pressureless advection with the mean velocity; sources follow the same
convention as the position-angle system (relaxation toward the flow,
downhill external forcing, repulsive interaction).  The nonlocal terms
evaluate the kernel table at the local mean angles by bilinear periodic
interpolation, so one table of modest angular resolution serves the
whole run.

The diffusive limit replaces the momentum equations by an explicit drift
sigma1*(gamma*u - K1[rho] - grad V1); density and mean angle are advected
with it by a conservative upwind flux.  Its kernels depend on the evolving
phi field and are recomputed every step.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from ellipsim import fv
from ellipsim.flow import FlowField, eval_field, jeffery_g
from ellipsim.grids import Grid2D
from ellipsim.kernels import KernelTable, build_kernel_table

__all__ = [
    "DiffusiveParams",
    "DiffusiveState",
    "DiffusiveSystem",
    "RhoGrid",
    "RhoSystem",
    "build_rho_kernel_table",
    "initial_block_rho",
    "rho_flux",
    "rho_interaction",
    "rho_wave_speed",
]

RHO_TABLE_NTHETA = 60


class RhoGrid:
    """Conserved (rho, rho phi, rho v1, rho v2, rho w) on an (x, y) lattice."""

    def __init__(self, geom: Grid2D, data=None):
        self.geom = geom
        if data is None:
            data = np.zeros((geom.nx, geom.ny, 5))
        self.field = fv.ConservedField(np.asarray(data, dtype=float),
                                       (geom.h, geom.h))
        if self.field.data.shape != (geom.nx, geom.ny, 5):
            raise ValueError("data shape does not match the grid geometry")

    @property
    def data(self):
        return self.field.data

    @property
    def rho(self):
        return self.field.data[..., 0]

    def phi(self):
        """Mean angle per cell; zero where the density sits on the floor."""
        return _ratio(self.field.data[..., 1], self.rho)

    def mean_velocity(self):
        """(v1, v2, w) per cell, shape (nx, ny, 3)."""
        return np.stack([_ratio(self.field.data[..., c], self.rho)
                         for c in (2, 3, 4)], axis=-1)

    def total_mass(self) -> float:
        return self.field.total_mass()

    def copy(self) -> "RhoGrid":
        return RhoGrid(self.geom, self.field.data.copy())


def _ratio(num, rho):
    out = np.zeros_like(num)
    alive = rho > fv.DENSITY_FLOOR
    out[alive] = num[alive] / rho[alive]
    return out


def initial_block_rho(geom: Grid2D, support, phi0=0.0) -> RhoGrid:
    """Unit-mass uniform block over ``support`` with mean angle ``phi0``."""
    x0, y0, x1, y1 = support
    grid = RhoGrid(geom)
    inx = (geom.xs >= x0) & (geom.xs <= x1)
    iny = (geom.ys >= y0) & (geom.ys <= y1)
    sel = np.ix_(inx.nonzero()[0], iny.nonzero()[0])
    grid.data[sel + ([0],)] = 1.0
    mass = grid.total_mass()
    if mass <= 0:
        raise ValueError("initial support contains no cell centers")
    grid.data[..., 0] /= mass
    grid.data[..., 1] = grid.data[..., 0] * float(phi0)
    return grid


def rho_flux(state, axis):
    """Pressureless flux along axis 0 (x) or 1 (y)."""
    rho = np.maximum(state[..., 0], fv.DENSITY_FLOOR)
    v = state[..., 2 + axis] / rho
    return v[..., None] * state


def rho_wave_speed(state, axis):
    rho = np.maximum(state[..., 0], fv.DENSITY_FLOOR)
    return float(np.abs(state[..., 2 + axis] / rho).max())


def build_rho_kernel_table(geom: Grid2D, pot_params, m, i_c,
                           ntheta=RHO_TABLE_NTHETA) -> KernelTable:
    """Interaction table sampled on ``ntheta`` angles for interpolation."""
    thetas = (np.arange(ntheta) + 0.5) * (2.0 * np.pi / ntheta)
    return build_kernel_table(geom.h, thetas, pot_params, m, i_c, geom.h**2)


@njit(cache=True)
def _gather_k(table, rho, phi, floor, out):
    """K(r) = sum over offsets of table(offset; phi(r), phi(rbar)) rho(rbar).

    Bilinear periodic interpolation in both angle indices; table entries
    already carry the quadrature volume and mass scalings.
    """
    s = (table.shape[0] - 1) // 2
    nt = table.shape[2]
    nc = table.shape[4]
    nx, ny = rho.shape
    k = 2.0 * np.pi / nt
    for i in range(nx):
        for j in range(ny):
            a = phi[i, j] / k - 0.5
            ia = int(np.floor(a))
            fa = a - ia
            a0 = ia % nt
            a1 = (ia + 1) % nt
            for di in range(max(-s, -i), min(s, nx - 1 - i) + 1):
                for dj in range(max(-s, -j), min(s, ny - 1 - j) + 1):
                    r = rho[i + di, j + dj]
                    if r <= floor:
                        continue
                    b = phi[i + di, j + dj] / k - 0.5
                    ib = int(np.floor(b))
                    fb = b - ib
                    b0 = ib % nt
                    b1 = (ib + 1) % nt
                    for c in range(nc):
                        w = ((1 - fa) * ((1 - fb) * table[di + s, dj + s, a0, b0, c]
                                         + fb * table[di + s, dj + s, a0, b1, c])
                             + fa * ((1 - fb) * table[di + s, dj + s, a1, b0, c]
                                     + fb * table[di + s, dj + s, a1, b1, c]))
                        out[i, j, c] += w * r


def rho_interaction(rho, phi, table: KernelTable, wall_ghosts=False,
                    ghost_boost=10.0):
    """Per-cell (K1_x, K1_y, K2) integrals, shape (nx, ny, 3).

    With ``wall_ghosts`` the domain is padded by the stencil radius with
    cells at the packing density 1/h^2 scaled by ``ghost_boost`` (the
    potential is linear in its amplitude, so boosting the ghost density
    is equivalent to boosting eps0).  Ghost orientations lie parallel to
    the nearest wall: pi/2 on the vertical strips, 0 elsewhere.
    """
    if wall_ghosts:
        s = table.s
        nx, ny = rho.shape
        rp = np.full((nx + 2 * s, ny + 2 * s),
                     ghost_boost / table.h**2)
        rp[s:s + nx, s:s + ny] = rho
        pp = np.zeros_like(rp)
        pp[:s, :] = pp[-s:, :] = 0.5 * np.pi
        pp[s:s + nx, s:s + ny] = phi
        full = np.zeros(rp.shape + (table.ncomp,))
        _gather_k(np.ascontiguousarray(table.values), rp, pp,
                  fv.DENSITY_FLOOR, full)
        return full[s:s + nx, s:s + ny]
    out = np.zeros(rho.shape + (table.ncomp,))
    _gather_k(np.ascontiguousarray(table.values), np.ascontiguousarray(rho),
              np.ascontiguousarray(phi), fv.DENSITY_FLOOR, out)
    return out


class RhoSystem:
    """Godunov-split stepper for the five-component position-level system."""

    def __init__(self, geom: Grid2D, flow: FlowField, dyn, ext,
                 pot_params=None, bc_space="neumann",
                 table_ntheta=RHO_TABLE_NTHETA, wall_interaction=False):
        self.geom = geom
        self.dyn = dyn
        self.ext = ext
        self.wall_interaction = wall_interaction
        self.bc = fv.BoundarySpec((bc_space, bc_space))
        self.reflect_comps = (2, 3, 4)
        self.lam = pot_params.lambda_shape if pot_params is not None else 0.0

        centers = geom.centers()
        self.sample = eval_field(flow, centers)
        self.grad_v1 = ext.grad_v1(centers)

        self.table = None
        if pot_params is not None:
            self.table = build_rho_kernel_table(geom, pot_params, dyn.m,
                                                dyn.I_c, ntheta=table_ntheta)

        self._flux_fns = [lambda st, a=a: rho_flux(st, a) for a in range(2)]
        self._speed_fns = [lambda st, a=a: rho_wave_speed(st, a) for a in range(2)]

    def stable_dt(self, rgrid: RhoGrid, cfl=0.5) -> float:
        return fv.stable_dt(rgrid.field, self._speed_fns, cfl=cfl)

    def step(self, rgrid: RhoGrid, dt) -> RhoGrid:
        field = fv.hyperbolic_step(rgrid.field, self._flux_fns, self._speed_fns,
                                   self.bc, dt, self.reflect_comps)
        rho = field.data[..., 0]
        phi = _ratio(field.data[..., 1], rho)
        if self.table is not None:
            kern = rho_interaction(rho, phi, self.table,
                                   wall_ghosts=self.wall_interaction)
        else:
            kern = np.zeros(rho.shape + (3,))

        d = self.dyn
        g = jeffery_g(phi, self.sample, self.lam)
        rates = np.zeros(5)
        rates[2] = rates[3] = d.gamma + 0.5 * d.A**2
        rates[4] = d.gamma_bar + 0.5 * d.B**2
        affine = np.zeros_like(field.data)
        affine[..., 1] = field.data[..., 4]
        affine[..., 2] = rho * (d.gamma * self.sample.u[..., 0]
                                - self.grad_v1[..., 0] - kern[..., 0])
        affine[..., 3] = rho * (d.gamma * self.sample.u[..., 1]
                                - self.grad_v1[..., 1] - kern[..., 1])
        affine[..., 4] = rho * (d.gamma_bar * g - self.ext.dv2(phi) - kern[..., 2])

        field = fv.implicit_source_step(field, rates, affine, dt)
        field = fv.apply_density_floor(field)
        return RhoGrid(self.geom, field.data)

    def run(self, rgrid: RhoGrid, t_end, cfl=0.5, t0=0.0, on_snapshot=None,
            snapshot_times=(), max_dt=0.05):
        """Advance with CFL-adapted steps, landing exactly on snapshots.

        ``max_dt`` caps the step when wave speeds are small (cold starts),
        keeping the split source integration resolved.
        """
        t = t0
        pending = sorted(set(float(ts) for ts in snapshot_times
                             if t0 < ts <= t_end) | {float(t_end)})
        for target in pending:
            while t < target - 1e-12:
                dt = min(self.stable_dt(rgrid, cfl), max_dt, target - t)
                rgrid = self.step(rgrid, dt)
                t += dt
            t = target
            if on_snapshot is not None:
                on_snapshot(t, rgrid)
        return rgrid


@dataclass(frozen=True)
class DiffusiveParams:
    """Overdamped mobilities; requires friction to dominate the noise."""

    gamma: float = 1.0
    gamma_bar: float = 1.0
    A: float = 0.0
    B: float = 0.0

    def __post_init__(self):
        if 2.0 * self.gamma <= self.A**2:
            raise ValueError("diffusive limit needs 2 gamma > A^2")
        if 2.0 * self.gamma_bar <= self.B**2:
            raise ValueError("diffusive limit needs 2 gamma_bar > B^2")

    @property
    def sigma1(self) -> float:
        return 2.0 / (2.0 * self.gamma - self.A**2)

    @property
    def sigma2(self) -> float:
        return 2.0 / (2.0 * self.gamma_bar - self.B**2)

    @classmethod
    def from_dynamics(cls, dyn) -> "DiffusiveParams":
        return cls(gamma=dyn.gamma, gamma_bar=dyn.gamma_bar, A=dyn.A, B=dyn.B)


class DiffusiveState:
    """(rho, rho phi) pair of the drift equations."""

    def __init__(self, geom: Grid2D, data=None):
        self.geom = geom
        if data is None:
            data = np.zeros((geom.nx, geom.ny, 2))
        self.data = np.asarray(data, dtype=float)
        if self.data.shape != (geom.nx, geom.ny, 2):
            raise ValueError("data shape does not match the grid geometry")

    @classmethod
    def from_rho_grid(cls, rgrid: RhoGrid) -> "DiffusiveState":
        return cls(rgrid.geom, rgrid.data[..., :2].copy())

    @property
    def rho(self):
        return self.data[..., 0]

    def phi(self):
        return _ratio(self.data[..., 1], self.rho)

    def total_mass(self) -> float:
        return float(self.data[..., 0].sum()) * self.geom.cell_area

    def copy(self) -> "DiffusiveState":
        return DiffusiveState(self.geom, self.data.copy())


def _upwind_sweep(data, drift, axis, dt, h, bc):
    """Conservative donor-cell update of every component with one drift.

    The interface velocity is the mean of the adjacent cell drifts; with
    reflective walls the ghost drift is negated, which zeroes the wall
    flux exactly.
    """
    w = np.moveaxis(drift, axis, 0)
    u = np.moveaxis(data, axis, 0)
    if bc == "reflective":
        wp = np.concatenate([-w[:1], w, -w[-1:]], axis=0)
    elif bc == "neumann":
        wp = np.concatenate([w[:1], w, w[-1:]], axis=0)
    elif bc == "periodic":
        wp = np.concatenate([w[-1:], w, w[:1]], axis=0)
    else:
        raise ValueError(f"unknown boundary condition {bc!r}")
    if bc == "periodic":
        up = np.concatenate([u[-1:], u, u[:1]], axis=0)
    else:
        up = np.concatenate([u[:1], u, u[-1:]], axis=0)

    wi = 0.5 * (wp[:-1] + wp[1:])  # interface drift, len n+1
    flux = (np.maximum(wi, 0.0)[..., None] * up[:-1]
            + np.minimum(wi, 0.0)[..., None] * up[1:])
    un = u - (dt / h) * (flux[1:] - flux[:-1])
    return np.moveaxis(un, 0, axis)


class DiffusiveSystem:
    """First-order drift solver for the overdamped density/angle pair."""

    def __init__(self, geom: Grid2D, flow: FlowField, params: DiffusiveParams,
                 ext, pot_params=None, bc_space="neumann",
                 table_ntheta=RHO_TABLE_NTHETA, m=1.0, i_c=1.0):
        self.geom = geom
        self.params = params
        self.ext = ext
        self.bc = bc_space
        self.lam = pot_params.lambda_shape if pot_params is not None else 0.0

        centers = geom.centers()
        self.sample = eval_field(flow, centers)
        self.grad_v1 = ext.grad_v1(centers)

        self.table = None
        if pot_params is not None:
            self.table = build_rho_kernel_table(geom, pot_params, m, i_c,
                                                ntheta=table_ntheta)

    def _drift_and_torque(self, state: DiffusiveState):
        """Common drift sigma1*(gamma u - K1 - grad V1) and the K2 field."""
        if self.table is not None:
            kern = rho_interaction(state.rho, state.phi(), self.table)
        else:
            kern = np.zeros(state.rho.shape + (3,))
        p = self.params
        drift = p.sigma1 * (p.gamma * self.sample.u - kern[..., :2]
                            - self.grad_v1)
        return drift, kern[..., 2]

    def stable_dt(self, state: DiffusiveState, cfl=0.5) -> float:
        drift, _ = self._drift_and_torque(state)
        vmax = np.abs(drift).max()
        if vmax == 0:
            return np.inf
        return cfl * self.geom.h / float(vmax)

    def step(self, state: DiffusiveState, dt, drift=None, k2=None) -> DiffusiveState:
        """One upwind transport step plus the explicit angle source."""
        if drift is None:
            drift, k2 = self._drift_and_torque(state)
        data = state.data
        for axis in range(2):
            data = _upwind_sweep(data, drift[..., axis], axis, dt,
                                 self.geom.h, self.bc)
        rho = data[..., 0]
        phi = _ratio(data[..., 1], rho)
        p = self.params
        g = jeffery_g(phi, self.sample, self.lam)
        data[..., 1] += dt * p.sigma2 * rho * (p.gamma_bar * g
                                               - self.ext.dv2(phi) - k2)
        small = data[..., 0] < fv.DENSITY_FLOOR
        data[..., 0][small] = 0.0
        data[..., 1][small] = 0.0
        return DiffusiveState(self.geom, data)

    def run(self, state: DiffusiveState, t_end, cfl=0.5, t0=0.0,
            on_snapshot=None, snapshot_times=(), max_dt=0.1):
        t = t0
        pending = sorted(set(float(ts) for ts in snapshot_times
                             if t0 < ts <= t_end) | {float(t_end)})
        for target in pending:
            while t < target - 1e-12:
                drift, k2 = self._drift_and_torque(state)
                vmax = float(np.abs(drift).max())
                dt = max_dt if vmax == 0 else cfl * self.geom.h / vmax
                dt = min(dt, max_dt, target - t)
                state = self.step(state, dt, drift=drift, k2=k2)
                t += dt
            t = target
            if on_snapshot is not None:
                on_snapshot(t, state)
        return state
