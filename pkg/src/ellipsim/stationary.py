"""Stationary mean-field states and exponential decay-rate fitting.

The equilibrium of the position-angle system with quadratic confinement
has the Gibbs form q = Z^-1 exp(-V1 - V2 - K[q]) where K feeds the scalar
interaction potential back through the density.  A damped fixed-point
iteration solves the self-consistency; without interaction the map is
constant, so a single application is exact.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from ellipsim.grids import Grid3D
from ellipsim.kernels import KernelTable, build_value_kernel

__all__ = [
    "StationaryState",
    "StationaryError",
    "fit_decay_rate",
    "oscillation_count",
    "is_oscillatory",
    "solve_stationary_q",
    "stationary_map",
]


class StationaryError(RuntimeError):
    """Fixed-point iteration failed to converge."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


@dataclass
class StationaryState:
    """Converged normalized equilibrium density with solve diagnostics."""

    q_stat: np.ndarray
    z: float
    iterations: int
    residual: float
    geom: Grid3D


def build_stationary_kernel(geom: Grid3D, pot_params, m=1.0) -> KernelTable:
    """Scalar potential-value table with the (1/m) interaction scaling."""
    return build_value_kernel(geom.h, geom.thetas, pot_params, m,
                              geom.cell_volume)


def stationary_map(q, geom: Grid3D, ext, table=None, spectrum_tol=0.0):
    """One application of q -> Z^-1 exp(-V1 - V2 - K[q])."""
    centers = geom.centers()
    expo = -(ext.value_v1(centers)[:, :, None]
             + ext.value_v2(geom.thetas)[None, None, :])
    if table is not None:
        expo = expo - table.convolve(q, spectrum_tol=spectrum_tol)[..., 0]
    raw = np.exp(expo)
    z = raw.sum() * geom.cell_volume
    return raw / z, z


def solve_stationary_q(geom: Grid3D, ext, pot_params=None, table=None,
                       alpha=0.5, tol=1e-10, max_iter=10_000,
                       spectrum_tol=0.0) -> StationaryState:
    """Damped fixed-point solve of the stationary self-consistency.

    The first sweep applies the map undamped (exact without interaction);
    later sweeps blend with weight ``alpha``.  Convergence is the
    volume-weighted L2 change between successive iterates.
    """
    if table is None and pot_params is not None:
        table = build_stationary_kernel(geom, pot_params)
    vol = geom.cell_volume
    q = np.full((geom.nx, geom.ny, geom.ntheta), 1.0 / (vol * geom.nx * geom.ny
                                                        * geom.ntheta))
    z = 1.0
    residual = np.inf
    for it in range(1, max_iter + 1):
        mapped, z = stationary_map(q, geom, ext, table, spectrum_tol)
        qn = mapped if it == 1 else (1.0 - alpha) * q + alpha * mapped
        qn = qn / (qn.sum() * vol)
        residual = float(np.sqrt(((qn - q) ** 2).sum() * vol))
        q = qn
        if residual < tol:
            return StationaryState(q_stat=q, z=float(z), iterations=it,
                                   residual=residual, geom=geom)
    raise StationaryError(
        f"no convergence after {max_iter} iterations (residual {residual:g})",
        residual)


def fit_decay_rate(times, errors, window=None):
    """Exponential rate lambda from a least-squares fit of log(error).

    ``window`` is an (index_lo, index_hi) slice; the default runs from the
    first sample to the first time the error falls below 1e-3 of its
    initial value, so the fit ignores the residual floor.  Returns a
    nonnegative rate (clipped at zero for growing series).
    """
    times = np.asarray(times, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if window is None:
        below = np.nonzero(errors < 1e-3 * errors[0])[0]
        hi = below[0] + 1 if len(below) else len(errors)
        window = (0, hi)
    lo, hi = window
    t = times[lo:hi]
    e = errors[lo:hi]
    keep = e > 0
    if keep.sum() < 3:
        raise ValueError("need at least 3 positive error samples to fit")
    slope = np.polyfit(t[keep], np.log(e[keep]), 1)[0]
    return max(0.0, -float(slope))


def oscillation_count(errors, prominence_rel=1e-3):
    """Number of interior local maxima with a minimal relative prominence."""
    errors = np.asarray(errors, dtype=float)
    peaks, _ = find_peaks(errors, prominence=prominence_rel * errors.max())
    return len(peaks)


def is_oscillatory(errors, prominence_rel=1e-3) -> bool:
    """True when the series shows at least two local maxima after the start."""
    return oscillation_count(errors, prominence_rel) >= 2
