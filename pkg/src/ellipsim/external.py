"""Catalog of external potentials acting on position and orientation."""

from dataclasses import dataclass

import numpy as np

__all__ = ["ExternalPotentials", "V1_CATALOG", "V2_CATALOG"]


# position potentials: name -> (value(r), gradient(r))
V1_CATALOG = {
    "zero": (
        lambda r: np.zeros(np.asarray(r, dtype=float)[..., 0].shape),
        lambda r: np.zeros(np.asarray(r, dtype=float).shape),
    ),
    "quadratic": (
        lambda r: 0.5 * (np.asarray(r, dtype=float) ** 2).sum(axis=-1),
        lambda r: np.asarray(r, dtype=float).copy(),
    ),
}

# orientation potentials: name -> (value(theta), derivative(theta))
V2_CATALOG = {
    "zero": (
        lambda t: np.zeros(np.shape(t)),
        lambda t: np.zeros(np.shape(t)),
    ),
    "sine": (np.sin, np.cos),
}


@dataclass(frozen=True)
class ExternalPotentials:
    """Named selection from the potential catalogs (default: none)."""

    v1: str = "zero"
    v2: str = "zero"

    def __post_init__(self):
        if self.v1 not in V1_CATALOG:
            raise ValueError(f"unknown position potential {self.v1!r}")
        if self.v2 not in V2_CATALOG:
            raise ValueError(f"unknown orientation potential {self.v2!r}")

    def value_v1(self, r):
        return V1_CATALOG[self.v1][0](r)

    def grad_v1(self, r):
        return V1_CATALOG[self.v1][1](r)

    def value_v2(self, theta):
        return V2_CATALOG[self.v2][0](theta)

    def dv2(self, theta):
        return V2_CATALOG[self.v2][1](theta)
