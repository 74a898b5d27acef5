"""Prescribed stationary velocity fields and the preferred-rotation rate.

Three analytic fields are built in (a stretching top-bottom field, a rigid
clockwise rotation, and a uniform stream) together with a gridded field
imported from a plain-text file, e.g. the output of an external
incompressible flow solver.  All fields expose the velocity, its Jacobian
and the scalar curl through :func:`eval_field`; :func:`jeffery_g` turns a
sample into the preferred rotation rate of an ellipse with aspect factor
``lam``.
"""

import io
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FlowField",
    "FlowSample",
    "FlowFileError",
    "eval_field",
    "jeffery_g",
    "load_grid_field",
    "write_grid_field",
]

_ANALYTIC_KINDS = ("top-bottom", "rotational", "uniform")


class FlowFileError(ValueError):
    """Raised when a gridded-field file does not match the documented format."""


@dataclass(frozen=True)
class FlowSample:
    """Velocity, Jacobian d u_i / d x_j and scalar curl at one or more points.

    ``rot`` is redundant (``jac[...,1,0] - jac[...,0,1]``) but kept so
    consumers never re-derive the sign convention.
    """

    u: np.ndarray    # (..., 2)
    jac: np.ndarray  # (..., 2, 2)
    rot: np.ndarray  # (...)


class FlowField:
    """Immutable stationary velocity field.

    Use the classmethod constructors; ``kind`` is one of
    ``top-bottom`` (u = (-x, y)), ``rotational`` (u = (y, -x)),
    ``uniform`` (u = c) or ``gridded``.
    """

    def __init__(self, kind, *, c=None, x0=None, y0=None, dx=None, dy=None,
                 u1=None, u2=None):
        if kind not in _ANALYTIC_KINDS + ("gridded",):
            raise ValueError(f"unknown flow kind {kind!r}")
        self.kind = kind
        if kind == "uniform":
            self.c = np.asarray(c, dtype=float).reshape(2)
        elif kind == "gridded":
            self.x0, self.y0, self.dx, self.dy = float(x0), float(y0), float(dx), float(dy)
            if self.dx <= 0 or self.dy <= 0:
                raise ValueError("grid spacing must be positive")
            self.u1 = np.asarray(u1, dtype=float)  # (ny, nx)
            self.u2 = np.asarray(u2, dtype=float)
            if self.u1.shape != self.u2.shape or self.u1.ndim != 2:
                raise ValueError("u1, u2 must be equal-shape 2D arrays")
            self.ny, self.nx = self.u1.shape
            # Node Jacobians: central differences inside, one-sided at edges.
            self._j11 = np.gradient(self.u1, self.dx, axis=1)
            self._j12 = np.gradient(self.u1, self.dy, axis=0)
            self._j21 = np.gradient(self.u2, self.dx, axis=1)
            self._j22 = np.gradient(self.u2, self.dy, axis=0)
            for a in (self.u1, self.u2):
                a.setflags(write=False)

    @classmethod
    def top_bottom(cls):
        return cls("top-bottom")

    @classmethod
    def rotational(cls):
        return cls("rotational")

    @classmethod
    def uniform(cls, c):
        return cls("uniform", c=c)

    @classmethod
    def gridded(cls, x0, y0, dx, dy, u1, u2):
        return cls("gridded", x0=x0, y0=y0, dx=dx, dy=dy, u1=u1, u2=u2)

    def sample(self, r) -> FlowSample:
        return eval_field(self, r)


def eval_field(field: FlowField, r) -> FlowSample:
    """Sample ``field`` at points ``r`` of shape (..., 2).

    Analytic kinds return exact velocities and Jacobians; the gridded kind
    interpolates bilinearly (clamping queries outside the box to the
    nearest boundary node, so evaluation is total on the whole plane).
    """
    r = np.asarray(r, dtype=float)
    x, y = r[..., 0], r[..., 1]
    base = x.shape
    u = np.empty(base + (2,))
    jac = np.zeros(base + (2, 2))

    if field.kind == "top-bottom":
        u[..., 0] = -x
        u[..., 1] = y
        jac[..., 0, 0] = -1.0
        jac[..., 1, 1] = 1.0
    elif field.kind == "rotational":
        u[..., 0] = y
        u[..., 1] = -x
        jac[..., 0, 1] = 1.0
        jac[..., 1, 0] = -1.0
    elif field.kind == "uniform":
        u[..., 0] = field.c[0]
        u[..., 1] = field.c[1]
    else:
        px = np.clip((x - field.x0) / field.dx, 0.0, field.nx - 1.0)
        py = np.clip((y - field.y0) / field.dy, 0.0, field.ny - 1.0)
        ix = np.minimum(px.astype(int), field.nx - 2) if field.nx > 1 else np.zeros_like(px, dtype=int)
        iy = np.minimum(py.astype(int), field.ny - 2) if field.ny > 1 else np.zeros_like(py, dtype=int)
        fx = px - ix
        fy = py - iy

        def interp(a):
            if field.nx == 1 and field.ny == 1:
                return np.broadcast_to(a[0, 0], base).copy()
            a00 = a[iy, ix]
            a01 = a[iy, np.minimum(ix + 1, field.nx - 1)]
            a10 = a[np.minimum(iy + 1, field.ny - 1), ix]
            a11 = a[np.minimum(iy + 1, field.ny - 1), np.minimum(ix + 1, field.nx - 1)]
            return ((1 - fy) * ((1 - fx) * a00 + fx * a01)
                    + fy * ((1 - fx) * a10 + fx * a11))

        u[..., 0] = interp(field.u1)
        u[..., 1] = interp(field.u2)
        jac[..., 0, 0] = interp(field._j11)
        jac[..., 0, 1] = interp(field._j12)
        jac[..., 1, 0] = interp(field._j21)
        jac[..., 1, 1] = interp(field._j22)

    rot = jac[..., 1, 0] - jac[..., 0, 1]
    return FlowSample(u=u, jac=jac, rot=rot)


def jeffery_g(theta, sample: FlowSample, lam):
    """Preferred rotation rate of an ellipse in the sampled flow.

    g = rot(u)/2 + lam * (-sin t, cos t) E (cos t, sin t)^T with the
    strain E = (jac + jac^T)/2; exactly pi-periodic in theta.
    """
    theta = np.asarray(theta, dtype=float)
    jac = sample.jac
    e12 = 0.5 * (jac[..., 0, 1] + jac[..., 1, 0])
    ediff = 0.5 * (jac[..., 1, 1] - jac[..., 0, 0])
    return 0.5 * sample.rot + lam * (e12 * np.cos(2 * theta) + ediff * np.sin(2 * theta))


def load_grid_field(stream) -> FlowField:
    """Parse a gridded field from a text stream or path.

    Format: line 1 holds ``nx ny x0 y0 dx dy``; then nx*ny lines of
    ``u1 u2`` in row-major order (y outer, x inner).  Malformed input
    raises :class:`FlowFileError` naming the offending line.
    """
    if isinstance(stream, (str, bytes)) or hasattr(stream, "__fspath__"):
        with open(stream, "r", encoding="utf-8") as fh:
            return load_grid_field(fh)
    if isinstance(stream, (io.RawIOBase, io.BufferedIOBase)):
        stream = io.TextIOWrapper(stream, encoding="utf-8")

    lines = stream.read().splitlines()
    if not lines:
        raise FlowFileError("line 1: empty field file")
    header = lines[0].split()
    if len(header) != 6:
        raise FlowFileError(f"line 1: expected 6 header fields 'nx ny x0 y0 dx dy', got {len(header)}")
    try:
        nx, ny = int(header[0]), int(header[1])
        x0, y0, dx, dy = (float(v) for v in header[2:])
    except ValueError as exc:
        raise FlowFileError(f"line 1: malformed header ({exc})") from None
    if nx < 1 or ny < 1:
        raise FlowFileError(f"line 1: grid dimensions must be >= 1, got nx={nx} ny={ny}")

    rows = [ln for ln in lines[1:] if ln.strip()]
    if len(rows) != nx * ny:
        raise FlowFileError(
            f"line {len(lines)}: expected {nx * ny} rows of 'u1 u2', got {len(rows)}")
    u1 = np.empty((ny, nx))
    u2 = np.empty((ny, nx))
    for k, ln in enumerate(rows):
        parts = ln.split()
        lineno = k + 2
        if len(parts) != 2:
            raise FlowFileError(f"line {lineno}: expected 2 values, got {len(parts)}")
        try:
            a, b = float(parts[0]), float(parts[1])
        except ValueError:
            raise FlowFileError(f"line {lineno}: non-numeric entry") from None
        if not (np.isfinite(a) and np.isfinite(b)):
            raise FlowFileError(f"line {lineno}: non-finite entry")
        iy, ix = divmod(k, nx)
        u1[iy, ix] = a
        u2[iy, ix] = b
    return FlowField.gridded(x0, y0, dx, dy, u1, u2)


def write_grid_field(field: FlowField, stream) -> None:
    """Write a gridded field in the format read by :func:`load_grid_field`.

    Emits 17 significant digits so a write/read round trip is lossless.
    """
    if field.kind != "gridded":
        raise ValueError("only gridded fields can be written")
    if isinstance(stream, (str, bytes)) or hasattr(stream, "__fspath__"):
        with open(stream, "w", encoding="utf-8") as fh:
            write_grid_field(field, fh)
            return
    stream.write(f"{field.nx} {field.ny} {field.x0!r} {field.y0!r} {field.dx!r} {field.dy!r}\n")
    for iy in range(field.ny):
        for ix in range(field.nx):
            stream.write(f"{field.u1[iy, ix]:.17g} {field.u2[iy, ix]:.17g}\n")
