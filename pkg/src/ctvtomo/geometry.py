"""Voxel lattice, physical coordinates, and the per-column polar angle map.

The sampling grid is a regular Cartesian lattice with isotropic spacing.
Voxel ``(i, j, k)`` sits at ``((i - (nx-1)/2) * s, (j - (ny-1)/2) * s,
(k - (nz-1)/2) * s)``, so the geometric center of the lattice is the
physical origin.  The polar origin used by the cylindrical frame may be
offset from that center in the x-y plane; it defaults to the center.

Everything here is an immutable value type, safe to share across threads.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GridMismatchError(ValueError):
    """Two volumes (or a volume and an operator) live on different grids."""


@dataclass(frozen=True)
class VoxelGrid:
    """A 3D sampling lattice with physical spacing and a polar origin.

    Parameters
    ----------
    nx, ny, nz : int
        Voxel counts along x, y, z.  All must be >= 1.
    voxel_spacing : float
        Isotropic voxel pitch in mm (> 0).
    center_x, center_y : float
        Offset of the polar origin from the geometric grid center, in
        voxel units (so physical offset is ``center * voxel_spacing``).
    """

    nx: int
    ny: int
    nz: int
    voxel_spacing: float
    center_x: float = 0.0
    center_y: float = 0.0

    def __post_init__(self):
        if min(self.nx, self.ny, self.nz) < 1:
            raise ValueError(
                f"grid dimensions must be >= 1, got ({self.nx}, {self.ny}, {self.nz})"
            )
        if not self.voxel_spacing > 0:
            raise ValueError(f"voxel_spacing must be > 0, got {self.voxel_spacing}")

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def num_voxels(self) -> int:
        return self.nx * self.ny * self.nz

    @property
    def polar_center(self) -> tuple[float, float]:
        """Physical (x, y) of the polar origin, in mm."""
        return (self.center_x * self.voxel_spacing, self.center_y * self.voxel_spacing)

    def x_coords(self) -> np.ndarray:
        """Physical x of every voxel column, shape (nx,)."""
        return (np.arange(self.nx) - (self.nx - 1) / 2.0) * self.voxel_spacing

    def y_coords(self) -> np.ndarray:
        return (np.arange(self.ny) - (self.ny - 1) / 2.0) * self.voxel_spacing

    def z_coords(self) -> np.ndarray:
        return (np.arange(self.nz) - (self.nz - 1) / 2.0) * self.voxel_spacing

    def index_to_physical(self, i, j, k):
        """Physical (x, y, z) of voxel center (i, j, k).  Accepts arrays."""
        s = self.voxel_spacing
        return (
            (np.asarray(i) - (self.nx - 1) / 2.0) * s,
            (np.asarray(j) - (self.ny - 1) / 2.0) * s,
            (np.asarray(k) - (self.nz - 1) / 2.0) * s,
        )

    def physical_to_index(self, x, y, z):
        """Fractional (i, j, k) of a physical point; inverse of index_to_physical."""
        s = self.voxel_spacing
        return (
            np.asarray(x) / s + (self.nx - 1) / 2.0,
            np.asarray(y) / s + (self.ny - 1) / 2.0,
            np.asarray(z) / s + (self.nz - 1) / 2.0,
        )


def make_grid(nx, ny, nz, spacing, center=(0.0, 0.0)) -> VoxelGrid:
    """Construct a :class:`VoxelGrid`.

    Raises ``ValueError`` on non-positive dimensions or spacing.
    """
    cx, cy = center
    return VoxelGrid(int(nx), int(ny), int(nz), float(spacing), float(cx), float(cy))


@dataclass(frozen=True, eq=False)
class Volume:
    """Attenuation values on a :class:`VoxelGrid`, indexed ``values[i, j, k]``."""

    grid: VoxelGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {values.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.isfinite(values).all():
            raise ValueError("volume contains non-finite values")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: VoxelGrid) -> "Volume":
        return cls(grid, np.zeros(grid.shape))


@dataclass(frozen=True, eq=False)
class AngleField:
    """Polar angle of every voxel column about the grid's polar origin.

    ``theta[i, j]`` is in (-pi, pi]; it depends only on (i, j) because the
    cylindrical axis is z.  The origin voxel (radius zero) gets theta = 0
    so the local frame degenerates to the Cartesian frame there.
    """

    grid: VoxelGrid
    theta: np.ndarray

    def __post_init__(self):
        theta = np.ascontiguousarray(self.theta, dtype=np.float64)
        if theta.shape != (self.grid.nx, self.grid.ny):
            raise ValueError(
                f"theta shape {theta.shape} does not match grid ({self.grid.nx}, {self.grid.ny})"
            )
        object.__setattr__(self, "theta", theta)


def compute_angle_field(grid: VoxelGrid) -> AngleField:
    """Per-column polar angle ``atan2(y - y_c, x - x_c)`` about the polar origin."""
    xc, yc = grid.polar_center
    dx = grid.x_coords()[:, None] - xc
    dy = grid.y_coords()[None, :] - yc
    theta = np.arctan2(dy, dx)
    # atan2 returns -pi for (y=-0.0, x<0); fold onto the (-pi, pi] branch.
    theta[theta == -np.pi] = np.pi
    theta[(dx == 0.0) & (dy == 0.0)] = 0.0
    return AngleField(grid, theta)
