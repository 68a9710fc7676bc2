"""Cracked-column phantom, sinogram noise model, and reconstruction metrics.

The phantom is a homogeneous cylinder of unit attenuation along z, centered
on the grid's polar origin, with cracks carved out as low-value regions:
``radial`` (a half-plane containing the axis), ``transverse`` (a tilted
plane crossing the column) and ``concentric`` (an annular shell).  All
construction is a pure function of the grid and the specs, so phantoms are
bitwise reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import GridMismatchError, Volume, VoxelGrid
from .projector import Sinogram

CRACK_KINDS = ("radial", "transverse", "concentric")


@dataclass(frozen=True)
class CrackSpec:
    """Geometry of one crack.  Lengths in mm, angles in degrees.

    kind = "radial":      ``angle_deg`` is the azimuth of the half-plane.
    kind = "transverse":  ``z_position`` is the plane height relative to the
                          grid center, tilted by ``tilt_deg`` about the
                          ``tilt_azimuth_deg`` direction.
    kind = "concentric":  ``radius`` is the annulus center radius.

    ``width`` is the crack opening (>= one voxel); ``contrast`` is the
    attenuation drop inside the crack (1.0 carves a void).
    """

    kind: str
    width: float
    contrast: float = 1.0
    angle_deg: float = 0.0
    z_position: float = 0.0
    tilt_deg: float = 0.0
    tilt_azimuth_deg: float = 0.0
    radius: float = 0.0

    def __post_init__(self):
        if self.kind not in CRACK_KINDS:
            raise ValueError(f"unknown crack kind {self.kind!r}; expected one of {CRACK_KINDS}")
        if not self.width > 0:
            raise ValueError(f"crack width must be > 0, got {self.width}")
        if self.contrast < 0:
            raise ValueError(f"crack contrast must be >= 0, got {self.contrast}")


@dataclass(frozen=True)
class NoiseSpec:
    """Additive white Gaussian noise sized relative to the sinogram range."""

    relative_sigma: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if self.relative_sigma < 0:
            raise ValueError(f"relative_sigma must be >= 0, got {self.relative_sigma}")


def _crack_mask(grid: VoxelGrid, spec: CrackSpec, column_radius: float,
                extra_width: float = 0.0) -> np.ndarray:
    """Boolean (nx, ny, nz) region of one crack, before column clipping."""
    xc, yc = grid.polar_center
    dx = (grid.x_coords() - xc)[:, None, None]
    dy = (grid.y_coords() - yc)[None, :, None]
    z = grid.z_coords()[None, None, :]
    half = (spec.width + extra_width) / 2.0

    if spec.kind == "radial":
        phi = math.radians(spec.angle_deg)
        along = dx * math.cos(phi) + dy * math.sin(phi)
        perp = -dx * math.sin(phi) + dy * math.cos(phi)
        return np.broadcast_to((along > 0) & (np.abs(perp) <= half), grid.shape)

    if spec.kind == "transverse":
        tilt = math.radians(spec.tilt_deg)
        az = math.radians(spec.tilt_azimuth_deg)
        nx_, ny_, nz_ = (
            math.sin(tilt) * math.cos(az),
            math.sin(tilt) * math.sin(az),
            math.cos(tilt),
        )
        dist = nx_ * dx + ny_ * dy + nz_ * (z - spec.z_position)
        return np.abs(dist) <= half

    # concentric
    rho = np.sqrt(dx**2 + dy**2)
    return np.broadcast_to(np.abs(rho - spec.radius) <= half, grid.shape)


def _validate_crack(grid: VoxelGrid, spec: CrackSpec, column_radius: float) -> None:
    if spec.width < grid.voxel_spacing:
        raise ValueError(
            f"crack width {spec.width} mm is below one voxel ({grid.voxel_spacing} mm)"
        )
    if spec.kind == "concentric" and spec.radius + spec.width / 2.0 > column_radius:
        raise ValueError(
            f"concentric crack at radius {spec.radius} mm (width {spec.width}) "
            f"lies outside the column of radius {column_radius} mm"
        )
    if spec.kind == "transverse":
        half_z = grid.nz * grid.voxel_spacing / 2.0
        if abs(spec.z_position) > half_z:
            raise ValueError(
                f"transverse crack at z = {spec.z_position} mm is outside the grid "
                f"(half-extent {half_z} mm)"
            )


def make_column_phantom(
    grid: VoxelGrid, column_radius: float, cracks=()
) -> Volume:
    """Unit-attenuation cylinder about the polar origin with cracks carved out.

    Raises ``ValueError`` if the column does not fit inside the grid or a
    crack falls outside the column.
    """
    if not column_radius > 0:
        raise ValueError(f"column_radius must be > 0, got {column_radius}")
    xc, yc = grid.polar_center
    half_x = grid.nx * grid.voxel_spacing / 2.0
    half_y = grid.ny * grid.voxel_spacing / 2.0
    if column_radius + abs(xc) > half_x or column_radius + abs(yc) > half_y:
        raise ValueError(
            f"column of radius {column_radius} mm at ({xc}, {yc}) does not fit "
            f"inside the {grid.nx}x{grid.ny} grid"
        )

    dx = (grid.x_coords() - xc)[:, None]
    dy = (grid.y_coords() - yc)[None, :]
    inside = (dx**2 + dy**2 <= column_radius**2)[:, :, None]
    values = np.where(inside, 1.0, 0.0) * np.ones((1, 1, grid.nz))

    for spec in cracks:
        _validate_crack(grid, spec, column_radius)
        mask = _crack_mask(grid, spec, column_radius) & np.broadcast_to(
            inside, grid.shape
        )
        values[mask] = 1.0 - spec.contrast
    return Volume(grid, values)


def column_interior_mask(
    grid: VoxelGrid, column_radius: float, cracks=(), margin_voxels: int = 2
) -> np.ndarray:
    """Voxels of homogeneous column material, away from cracks and the rim.

    The mask shrinks the column by ``margin_voxels`` and widens every crack
    by the same amount on both sides, so first-order difference stencils
    evaluated on masked voxels never touch an edge.  Useful for
    region-restricted artifact metrics.
    """
    margin = margin_voxels * grid.voxel_spacing
    xc, yc = grid.polar_center
    dx = (grid.x_coords() - xc)[:, None, None]
    dy = (grid.y_coords() - yc)[None, :, None]
    rho = np.sqrt(dx**2 + dy**2)
    mask = np.broadcast_to(rho <= column_radius - margin, grid.shape).copy()
    for spec in cracks:
        mask &= ~_crack_mask(grid, spec, column_radius, extra_width=2.0 * margin)
    return mask


def add_noise(sino: Sinogram, spec: NoiseSpec) -> Sinogram:
    """Add i.i.d. Gaussian noise with sigma = relative_sigma * (max - min).

    The dynamic range is measured on the clean sinogram.  Uses a
    counter-based generator, so the result is deterministic per seed.
    """
    clean = sino.values
    sigma = spec.relative_sigma * float(clean.max() - clean.min())
    if sigma == 0.0:
        return Sinogram(sino.geometry, clean.copy())
    rng = np.random.Generator(np.random.Philox(spec.seed))
    return Sinogram(sino.geometry, clean + rng.normal(0.0, sigma, clean.shape))


def psnr(recon: Volume, reference: Volume) -> float:
    """Peak signal-to-noise ratio in dB; peak is the reference maximum.

    Returns ``math.inf`` for an exact match.  Raises
    :class:`~ctvtomo.geometry.GridMismatchError` if the grids differ.
    """
    if recon.grid != reference.grid:
        raise GridMismatchError(
            f"reconstruction grid {recon.grid} != reference grid {reference.grid}"
        )
    mse = float(np.mean((recon.values - reference.values) ** 2))
    if mse == 0.0:
        return math.inf
    peak = float(reference.values.max())
    return 10.0 * math.log10(peak**2 / mse)
