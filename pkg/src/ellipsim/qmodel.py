"""Position-angle hydrodynamics with Maxwellian or mono-kinetic closure.

The state carries four conserved components per (x, y, theta) cell:
density q and the momenta q*v1, q*v2, q*w.  Both closures transport every
component with the mean velocity (v1, v2, w); the Maxwellian closure adds
an isothermal pressure q to the normal-momentum flux on each axis, the
mono-kinetic closure is pressureless.  Sources combine relaxation toward
the flow, external potentials, velocity/angular friction and the nonlocal
pair repulsion evaluated by kernel convolution.
"""

import numpy as np

from ellipsim import fv
from ellipsim.flow import FlowField, FlowSample, eval_field, jeffery_g
from ellipsim.grids import Grid3D
from ellipsim.kernels import KernelTable, build_kernel_table

__all__ = [
    "QGrid",
    "QSystem",
    "advance_q",
    "build_q_kernel_table",
    "initial_block_q",
    "q_flux",
    "q_interaction",
    "q_wave_speed",
]

CLOSURES = ("maxwellian", "monokinetic")


class QGrid:
    """Conserved (q, q v1, q v2, q w) on an (x, y, theta) lattice."""

    def __init__(self, geom: Grid3D, data=None):
        self.geom = geom
        if data is None:
            data = np.zeros((geom.nx, geom.ny, geom.ntheta, 4))
        self.field = fv.ConservedField(np.asarray(data, dtype=float),
                                       (geom.h, geom.h, geom.k))
        if self.field.data.shape != (geom.nx, geom.ny, geom.ntheta, 4):
            raise ValueError("data shape does not match the grid geometry")

    @property
    def data(self):
        return self.field.data

    @property
    def q(self):
        return self.field.data[..., 0]

    def total_mass(self) -> float:
        return self.field.total_mass()

    def spatial_density(self):
        """Angle-summed density on the (x, y) lattice."""
        return self.q.sum(axis=2) * self.geom.k

    def copy(self) -> "QGrid":
        return QGrid(self.geom, self.field.data.copy())


def initial_block_q(geom: Grid3D, support, theta_lo=0.0) -> QGrid:
    """Unit-mass block: uniform over the cells inside ``support`` and the
    single angle cell containing ``theta_lo``, zero velocities."""
    x0, y0, x1, y1 = support
    grid = QGrid(geom)
    xs, ys = geom.xs, geom.ys
    inx = (xs >= x0) & (xs <= x1)
    iny = (ys >= y0) & (ys <= y1)
    # angle cell whose interval [it*k, (it+1)*k) starts at theta_lo
    it = int(np.floor((theta_lo % (2 * np.pi)) / geom.k + 0.5)) % geom.ntheta
    grid.data[np.ix_(inx.nonzero()[0], iny.nonzero()[0], [it], [0])] = 1.0
    mass = grid.total_mass()
    if mass <= 0:
        raise ValueError("initial support contains no cell centers")
    grid.data[..., 0] /= mass
    return grid


def _velocities(state):
    q = np.maximum(state[..., 0], fv.DENSITY_FLOOR)
    return state[..., 1] / q, state[..., 2] / q, state[..., 3] / q


def q_flux(state, axis, closure):
    """Physical flux along one lattice axis (0: x, 1: y, 2: theta).

    Advection of all four components with the reconstructed mean velocity;
    the Maxwellian closure adds the pressure q to component ``axis + 1``.
    """
    if closure not in CLOSURES:
        raise ValueError(f"unknown closure {closure!r}")
    vels = _velocities(state)
    flux = vels[axis][..., None] * state
    if closure == "maxwellian":
        flux[..., axis + 1] += state[..., 0]
    return flux


def q_wave_speed(state, axis, closure):
    """Estimate of the largest signal speed along ``axis``.

    Mean speed plus the unit isothermal sound speed of the Maxwellian
    closure; the pressureless closure has no acoustic contribution.
    """
    vels = _velocities(state)
    c = 1.0 if closure == "maxwellian" else 0.0
    return float(np.abs(vels[axis]).max()) + c


def build_q_kernel_table(geom: Grid3D, pot_params, m, i_c) -> KernelTable:
    """Midpoint-rule interaction table on the (x, y, theta) lattice."""
    return build_kernel_table(geom.h, geom.thetas, pot_params, m, i_c,
                              geom.cell_volume)


def q_interaction(qgrid: QGrid, table: KernelTable, spectrum_tol=0.0):
    """Nonlocal (force, torque) integrals per cell, shape (nx, ny, nt, 3).

    Components 0-1 are (1/m) * iint grad_r U q,  component 2 is
    (1/I_c) * iint d_theta U q; sources subtract these.
    """
    return table.convolve(qgrid.q, spectrum_tol=spectrum_tol)


class QSystem:
    """Time stepper for the position-angle system.

    Precomputes everything that is stationary over a run: the flow sample
    and preferred rotation rate on cell centers, external-potential
    gradients, and the interaction kernel table.
    """

    def __init__(self, geom: Grid3D, closure, flow: FlowField, dyn, ext,
                 pot_params=None, bc_space="neumann", spectrum_tol=1e-10):
        if closure not in CLOSURES:
            raise ValueError(f"unknown closure {closure!r}")
        self.geom = geom
        self.closure = closure
        self.dyn = dyn
        self.spectrum_tol = spectrum_tol
        self.bc = fv.BoundarySpec((bc_space, bc_space, "periodic"))
        self.reflect_comps = (1, 2, 3)

        centers = geom.centers()  # (nx, ny, 2)
        sample = eval_field(flow, centers)
        thetas = geom.thetas
        lam = pot_params.lambda_shape if pot_params is not None else 0.0
        # broadcast to (nx, ny, ntheta)
        self.u_grid = sample.u[:, :, None, :]
        wide = FlowSample(u=sample.u[:, :, None, :],
                          jac=sample.jac[:, :, None, :, :],
                          rot=sample.rot[:, :, None])
        self.g_grid = jeffery_g(thetas[None, None, :], wide, lam)
        self.grad_v1 = ext.grad_v1(centers)[:, :, None, :]
        self.dv2 = ext.dv2(thetas)[None, None, :]

        self.table = None
        if pot_params is not None:
            self.table = build_q_kernel_table(geom, pot_params, dyn.m, dyn.I_c)

        self._flux_fns = [lambda s, a=a: q_flux(s, a, self.closure) for a in range(3)]
        self._speed_fns = [lambda s, a=a: q_wave_speed(s, a, self.closure)
                           for a in range(3)]

    def stable_dt(self, qgrid: QGrid, cfl=0.5) -> float:
        return fv.stable_dt(qgrid.field, self._speed_fns, cfl=cfl)

    def step(self, qgrid: QGrid, dt) -> QGrid:
        """One Godunov-split step: FORCE sweeps, then the implicit source."""
        field = fv.hyperbolic_step(qgrid.field, self._flux_fns, self._speed_fns,
                                   self.bc, dt, self.reflect_comps)

        q = field.data[..., 0]
        if self.table is not None:
            kern = self.table.convolve(q, spectrum_tol=self.spectrum_tol)
        else:
            kern = np.zeros(q.shape + (3,))

        d = self.dyn
        rates = np.zeros(4)
        rates[1] = rates[2] = d.gamma + 0.5 * d.A**2
        rates[3] = d.gamma_bar + 0.5 * d.B**2
        affine = np.zeros_like(field.data)
        affine[..., 1] = q * (d.gamma * self.u_grid[..., 0]
                              - self.grad_v1[..., 0] - kern[..., 0])
        affine[..., 2] = q * (d.gamma * self.u_grid[..., 1]
                              - self.grad_v1[..., 1] - kern[..., 1])
        affine[..., 3] = q * (d.gamma_bar * self.g_grid - self.dv2 - kern[..., 2])

        field = fv.implicit_source_step(field, rates, affine, dt)
        field = fv.apply_density_floor(field)
        return QGrid(self.geom, field.data)

    def run(self, qgrid: QGrid, t_end, cfl=0.5, t0=0.0, on_snapshot=None,
            snapshot_times=(), max_dt=0.05):
        """Advance to ``t_end`` with CFL-adapted steps.

        Steps never overshoot a requested snapshot time; ``on_snapshot``
        is called as ``on_snapshot(t, qgrid)`` at each one (and at t_end).
        ``max_dt`` caps the step when wave speeds are small (cold starts),
        keeping the split source integration resolved.
        """
        t = t0
        pending = sorted(set(float(ts) for ts in snapshot_times
                             if t0 < ts <= t_end) | {float(t_end)})
        for target in pending:
            while t < target - 1e-12:
                dt = min(self.stable_dt(qgrid, cfl), max_dt, target - t)
                qgrid = self.step(qgrid, dt)
                t += dt
            t = target
            if on_snapshot is not None:
                on_snapshot(t, qgrid)
        return qgrid


def advance_q(qgrid: QGrid, closure, flow, ext, dyn, table, dt,
              bc_space="neumann", spectrum_tol=0.0) -> QGrid:
    """Single split step as a free function (builds a throwaway stepper).

    Prefer :class:`QSystem` for multi-step runs; this exists for callers
    that advance one state once.
    """
    pot_params = None
    system = QSystem(qgrid.geom, closure, flow, dyn, ext, pot_params,
                     bc_space=bc_space, spectrum_tol=spectrum_tol)
    system.table = table
    return system.step(qgrid, dt)
