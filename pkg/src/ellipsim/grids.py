"""Cell-centered lattice geometries shared by the PDE solvers."""

from dataclasses import dataclass

import numpy as np

__all__ = ["Grid2D", "Grid3D"]


@dataclass(frozen=True)
class Grid2D:
    """Uniform nx x ny lattice of square cells over [x0, x0+nx*h] x [y0, y0+ny*h]."""

    x0: float
    y0: float
    h: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.h <= 0 or self.nx < 1 or self.ny < 1:
            raise ValueError("need h > 0 and nx, ny >= 1")

    @property
    def xs(self):
        return self.x0 + (np.arange(self.nx) + 0.5) * self.h

    @property
    def ys(self):
        return self.y0 + (np.arange(self.ny) + 0.5) * self.h

    @property
    def cell_area(self) -> float:
        return self.h * self.h

    def centers(self):
        """Cell-center coordinates, shape (nx, ny, 2)."""
        xx, yy = np.meshgrid(self.xs, self.ys, indexing="ij")
        return np.stack([xx, yy], axis=-1)

    @classmethod
    def cover(cls, x0, y0, x1, y1, h):
        """Smallest grid with spacing h covering the rectangle from (x0, y0)."""
        nx = max(1, int(round((x1 - x0) / h)))
        ny = max(1, int(round((y1 - y0) / h)))
        return cls(x0, y0, h, nx, ny)


@dataclass(frozen=True)
class Grid3D(Grid2D):
    """Grid2D extended by an angular axis covering [0, 2 pi) with ntheta cells."""

    ntheta: int = 1

    def __post_init__(self):
        super().__post_init__()
        if self.ntheta < 1:
            raise ValueError("need ntheta >= 1")

    @property
    def k(self) -> float:
        return 2.0 * np.pi / self.ntheta

    @property
    def thetas(self):
        return (np.arange(self.ntheta) + 0.5) * self.k

    @property
    def cell_volume(self) -> float:
        return self.cell_area * self.k

    @property
    def spatial(self) -> Grid2D:
        return Grid2D(self.x0, self.y0, self.h, self.nx, self.ny)
