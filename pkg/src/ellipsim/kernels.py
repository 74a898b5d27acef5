"""Precomputed interaction kernels for the nonlocal PDE source terms.

The pair repulsion has compact support, so its contribution to a cell is a
discrete convolution of the density with a table of midpoint-rule weights
over a fixed (2s+1)^2 spatial stencil and all angle pairs.  The table is
built once per run from the closed-form potential derivatives.

``KernelTable.convolve`` evaluates the convolution spectrally: spatial
circular FFTs on a zero-padded box combined with a DFT contraction over
the two angle indices.  Keeping every angular mode reproduces direct
summation to rounding error; a relative ``spectrum_tol`` drops negligible
angle-pair modes (the kernel is analytic in both angles, so its angular
spectrum decays exponentially) and cuts production cost by an order of
magnitude.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from ellipsim.potential import PotentialParams, cutoff_radius, potential, potential_grad

__all__ = ["KernelTable", "build_kernel_table", "build_value_kernel"]


@dataclass
class KernelTable:
    """Tabulated interaction weights indexed by (dx, dy, theta, theta_bar).

    ``values`` has shape (2s+1, 2s+1, ntheta, ntheta, ncomp); spatial
    offsets run over cell-center differences ``(di*h, dj*h)`` with
    ``|di|, |dj| <= s``.  Entries beyond the interaction cutoff are zero.
    """

    values: np.ndarray
    h: float
    thetas: np.ndarray
    _convolvers: dict = field(default_factory=dict, repr=False)

    @property
    def s(self) -> int:
        return (self.values.shape[0] - 1) // 2

    @property
    def ntheta(self) -> int:
        return self.values.shape[2]

    @property
    def ncomp(self) -> int:
        return self.values.shape[-1]

    def convolve(self, field_values, spectrum_tol=0.0):
        """Convolve a (nx, ny, ntheta) field with the table.

        Returns shape (nx, ny, ntheta, ncomp); the field is taken as zero
        outside its box.  ``spectrum_tol`` is the relative threshold below
        which angular modes of the kernel are dropped (0 keeps all).
        """
        field_values = np.asarray(field_values, dtype=float)
        nx, ny, nt = field_values.shape
        if nt != self.ntheta:
            raise ValueError(f"field has {nt} angle cells, table has {self.ntheta}")
        key = (nx, ny, float(spectrum_tol))
        conv = self._convolvers.get(key)
        if conv is None:
            conv = _SpectralConvolver(self, nx, ny, spectrum_tol)
            self._convolvers[key] = conv
        return conv(field_values)


class _SpectralConvolver:
    """Cached spatial FFTs of the kernel's retained angular modes."""

    def __init__(self, table: KernelTable, nx, ny, tol):
        s, nt, nc = table.s, table.ntheta, table.ncomp
        self.s, self.nt, self.nc = s, nt, nc
        self.nx, self.ny = nx, ny
        self.mx, self.my = nx + 2 * s, ny + 2 * s

        kerrev = table.values[::-1, ::-1]
        kang = np.fft.fft2(kerrev, axes=(2, 3))  # (u, v, p, q, c)
        amp = np.abs(kang).max(axis=(0, 1, 4))
        keep = amp > tol * amp.max() if amp.max() > 0 else amp > np.inf
        self.ps, self.qs = np.nonzero(keep)

        padded = np.zeros((len(self.ps), nc, self.mx, self.my), dtype=complex)
        padded[:, :, : 2 * s + 1, : 2 * s + 1] = np.moveaxis(
            kang[:, :, self.ps, self.qs, :], (0, 1, 2, 3), (2, 3, 0, 1))
        # kernel spectra are complex, so take the full fft and keep the
        # half-spectrum matching the field's rfft2 layout
        self.khat = np.fft.fft2(padded, axes=(2, 3))[..., : self.my // 2 + 1]
        # group pair indices by output harmonic for the accumulation loop
        self.groups = [(p, np.nonzero(self.ps == p)[0]) for p in np.unique(self.ps)]

    def __call__(self, field_values):
        s, nt, nc = self.s, self.nt, self.nc
        fp = np.zeros((nt, self.mx, self.my))
        fp[:, s : s + self.nx, s : s + self.ny] = np.moveaxis(field_values, 2, 0)
        fhat = np.fft.fft(np.fft.rfft2(fp, axes=(1, 2)), axis=0)
        frev = fhat[(-self.qs) % nt]  # f-hat at the negated source harmonic

        ghat = np.zeros((nt, nc) + fhat.shape[1:], dtype=complex)
        for p, idx in self.groups:
            ghat[p] = (self.khat[idx] * frev[idx, None]).sum(axis=0)
        ghat /= nt
        out = np.fft.irfft2(np.fft.ifft(ghat, axis=0), s=(self.mx, self.my), axes=(2, 3))
        out = out[:, :, 2 * s : 2 * s + self.nx, 2 * s : 2 * s + self.ny]
        return np.moveaxis(out, (0, 1), (2, 3)).copy()


def _offsets(h, params):
    cutoff = cutoff_radius(params)
    s = int(np.ceil(cutoff / h))
    if h > cutoff:
        warnings.warn(
            f"grid spacing {h:g} exceeds the interaction cutoff {cutoff:g}; "
            "the interaction is resolved by a single-cell stencil", stacklevel=3)
    d = np.arange(-s, s + 1) * h
    return s, d


def build_kernel_table(h, thetas, params: PotentialParams, m, i_c,
                       volume) -> KernelTable:
    """Force/torque weight table for the nonlocal momentum sources.

    Entry ``[di+s, dj+s, a, b]`` holds ``grad_r U(0, (di*h, dj*h),
    thetas[a], thetas[b]) * volume / m`` in components 0-1 and the
    matching angle derivative scaled by ``volume / i_c`` in component 2;
    ``volume`` is the quadrature cell volume (h^2 k on position-angle
    grids, h^2 on position grids).
    """
    thetas = np.asarray(thetas, dtype=float)
    s, d = _offsets(h, params)
    dx, dy, ta, tb = np.meshgrid(d, d, thetas, thetas, indexing="ij")
    zero = np.zeros(dx.shape + (2,))
    rbar = np.stack([dx, dy], axis=-1)
    grad, dtheta = potential_grad(zero, rbar, ta, tb, params)
    values = np.empty(dx.shape + (3,))
    values[..., :2] = grad * (volume / m)
    values[..., 2] = dtheta * (volume / i_c)
    return KernelTable(values=values, h=float(h), thetas=thetas)


def build_value_kernel(h, thetas, params: PotentialParams, m, volume) -> KernelTable:
    """Scalar potential-value table used by the stationary fixed point."""
    thetas = np.asarray(thetas, dtype=float)
    s, d = _offsets(h, params)
    dx, dy, ta, tb = np.meshgrid(d, d, thetas, thetas, indexing="ij")
    zero = np.zeros(dx.shape + (2,))
    rbar = np.stack([dx, dy], axis=-1)
    values = (potential(zero, rbar, ta, tb, params) * (volume / m))[..., None]
    return KernelTable(values=values, h=float(h), thetas=thetas)
