"""Ellipse geometry and the compact-support Gaussian-overlap repulsion.

The pair energy between two ellipses at positions ``r``, ``r_bar`` with
orientation angles ``theta``, ``theta_bar`` is

    U = a(theta, theta_bar) * exp(-s / (1 - s)),   s < 1,
    U = 0,                                         s >= 1,

where ``s`` is the anisotropic squared separation
``s = (r_bar - r)^T (gamma(theta) + gamma(theta_bar))^{-1} (r_bar - r)``
built from the per-particle shape matrices ``gamma``, and the amplitude
``a`` grows when the two axes align.  The exponent vanishes with all its
derivatives as ``s -> 1``, so extending by zero keeps U continuously
differentiable; all gradients here are closed forms (this is the hot path
of both the particle force loop and the PDE interaction kernels).
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PotentialParams",
    "shape_matrix",
    "amplitude",
    "potential",
    "potential_grad",
    "cutoff_radius",
]


@dataclass(frozen=True)
class PotentialParams:
    """Half-axes (length L >= width D > 0) and repulsion strength eps0."""

    L: float
    D: float
    eps0: float = 1.0

    def __post_init__(self):
        if not self.L >= self.D > 0:
            raise ValueError(f"need L >= D > 0, got L={self.L}, D={self.D}")
        if not self.eps0 > 0:
            raise ValueError(f"need eps0 > 0, got eps0={self.eps0}")

    @property
    def l(self) -> float:
        """Full axis length 2L."""
        return 2.0 * self.L

    @property
    def d(self) -> float:
        """Full axis width 2D."""
        return 2.0 * self.D

    @property
    def lambda_shape(self) -> float:
        """Aspect-ratio factor (l^2 - d^2)/(l^2 + d^2) in [0, 1); 0 for a disk."""
        l2, d2 = self.l**2, self.d**2
        return (l2 - d2) / (l2 + d2)

    def boosted(self, factor: float) -> "PotentialParams":
        """Same geometry with the interaction strength multiplied by ``factor``."""
        return PotentialParams(self.L, self.D, self.eps0 * factor)


def shape_matrix(theta, params: PotentialParams):
    """Range matrix gamma(theta) = (l^2-d^2) eta(theta) eta(theta)^T + d^2 I.

    ``eta(theta) = (cos theta, sin theta)``.  Eigenvalues are exactly
    {l^2, d^2} and gamma is pi-periodic in theta.
    """
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    aniso = params.l**2 - params.d**2
    g = np.empty(theta.shape + (2, 2))
    g[..., 0, 0] = aniso * c * c + params.d**2
    g[..., 0, 1] = aniso * c * s
    g[..., 1, 0] = g[..., 0, 1]
    g[..., 1, 1] = aniso * s * s + params.d**2
    return g


def amplitude(theta, theta_bar, params: PotentialParams):
    """Alignment-dependent energy scale a(theta, theta_bar) >= eps0.

    Symmetric and pi-periodic in both angles; equals eps0 for
    perpendicular axes and for disks (lambda_shape = 0).
    """
    lam = params.lambda_shape
    c = np.cos(np.asarray(theta, dtype=float) - np.asarray(theta_bar, dtype=float))
    return params.eps0 / np.sqrt(1.0 - lam**2 * c**2)


def cutoff_radius(params: PotentialParams) -> float:
    """Separation beyond which the potential is identically zero.

    The eigenvalues of gamma(theta) + gamma(theta_bar) are at most 2 l^2,
    so s >= |dr|^2 / (2 l^2) and |dr| >= sqrt(2) l implies s >= 1.
    """
    return np.sqrt(2.0) * params.l


def _overlap(r, r_bar, theta, theta_bar, params):
    """Shared core: returns (s, w, trig) with w = (gamma+gamma_bar)^{-1} (r_bar-r)."""
    r = np.asarray(r, dtype=float)
    r_bar = np.asarray(r_bar, dtype=float)
    theta = np.asarray(theta, dtype=float)
    theta_bar = np.asarray(theta_bar, dtype=float)

    aniso = params.l**2 - params.d**2
    c, s_ = np.cos(theta), np.sin(theta)
    cb, sb = np.cos(theta_bar), np.sin(theta_bar)

    # G = gamma(theta) + gamma(theta_bar), inverted by adjugate/determinant.
    g11 = aniso * (c * c + cb * cb) + 2.0 * params.d**2
    g22 = aniso * (s_ * s_ + sb * sb) + 2.0 * params.d**2
    g12 = aniso * (c * s_ + cb * sb)
    det = g11 * g22 - g12 * g12  # >= 4 d^4 > 0

    d1 = r_bar[..., 0] - r[..., 0]
    d2 = r_bar[..., 1] - r[..., 1]
    w1 = (g22 * d1 - g12 * d2) / det
    w2 = (g11 * d2 - g12 * d1) / det
    s = d1 * w1 + d2 * w2
    return s, w1, w2, (c, s_)


def potential(r, r_bar, theta, theta_bar, params: PotentialParams):
    """Pair energy U; exactly zero for s >= 1 (compact support)."""
    s, _, _, _ = _overlap(r, r_bar, theta, theta_bar, params)
    a = amplitude(theta, theta_bar, params)
    inside = s < 1.0
    denom = np.where(inside, 1.0 - s, 1.0)
    return np.where(inside, a * np.exp(-s / denom), 0.0)


def potential_grad(r, r_bar, theta, theta_bar, params: PotentialParams):
    """Closed-form (grad_r U, dU/dtheta), both extended by zero for s >= 1.

    Returns a pair ``(grad, dtheta)`` with ``grad`` of shape ``(..., 2)``.
    The gradient with respect to r_bar is ``-grad`` and the theta_bar
    derivative follows from the swap symmetry of U.
    """
    s, w1, w2, (c, s_) = _overlap(r, r_bar, theta, theta_bar, params)
    theta = np.asarray(theta, dtype=float)
    theta_bar = np.asarray(theta_bar, dtype=float)
    a = amplitude(theta, theta_bar, params)

    inside = s < 1.0
    one_minus = np.where(inside, 1.0 - s, 1.0)
    u = np.where(inside, a * np.exp(-s / one_minus), 0.0)
    # dU/ds = -U / (1-s)^2
    du_ds = -u / one_minus**2

    # s depends on r through delta = r_bar - r: grad_r s = -2 w.
    grad = np.stack([-2.0 * du_ds * w1, -2.0 * du_ds * w2], axis=-1)

    # theta-dependence: amplitude (through the axis alignment) and the
    # shape matrix (ds/dtheta = -2 (l^2-d^2) (w.eta)(w.eta')).
    lam = params.lambda_shape
    psi = theta - theta_bar
    cpsi, spsi = np.cos(psi), np.sin(psi)
    dloga = -(lam**2) * cpsi * spsi / (1.0 - lam**2 * cpsi**2)
    aniso = params.l**2 - params.d**2
    w_eta = w1 * c + w2 * s_
    w_etap = -w1 * s_ + w2 * c
    ds_dtheta = -2.0 * aniso * w_eta * w_etap
    dtheta = u * dloga + du_ds * ds_dtheta
    return grad, dtheta
