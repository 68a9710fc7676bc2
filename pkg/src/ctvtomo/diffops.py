"""First-order difference operators and the local cylindrical frame.

Gradients are always estimated on the Cartesian lattice with two-point
forward differences (higher-order stencils trade locality for ringing and
are deliberately not offered).  The cylindrical components are obtained
afterwards by rotating the in-plane gradient into each voxel column's
local (angular, radial) frame; no resampling of the volume is involved,
so the rotation is exact and magnitude-preserving.

Boundary convention: the difference at the last index along each axis is
zero, which keeps every operator norm bounded by ``sqrt(2)/spacing`` per
axis and makes constants have zero gradient.

Frame convention: for a column at polar angle ``theta``,

    radial    r = ( cos(theta), sin(theta), 0)   points away from the axis
    angular   p = (-sin(theta), cos(theta), 0)   its in-plane 90-degree rotation
    axial     z = (0, 0, 1)

Any voxelwise orthonormal in-plane frame preserves the isotropic gradient
magnitude; the choice above fixes which component is called "angular" and
which "radial".
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import AngleField, Volume, VoxelGrid
from .operators import LinearOperator

AXIS_X, AXIS_Y, AXIS_Z = 0, 1, 2


def _forward_diff(values: np.ndarray, axis: int, spacing: float) -> np.ndarray:
    """(v[n+1] - v[n]) / spacing along ``axis``, zero at the trailing index."""
    out = np.zeros_like(values)
    lo = [slice(None)] * values.ndim
    hi = [slice(None)] * values.ndim
    lo[axis] = slice(0, -1)
    hi[axis] = slice(1, None)
    out[tuple(lo)] = (values[tuple(hi)] - values[tuple(lo)]) / spacing
    return out


def _forward_diff_adjoint(u: np.ndarray, axis: int, spacing: float) -> np.ndarray:
    """Exact transpose of :func:`_forward_diff` (a backward difference)."""
    out = np.zeros_like(u)
    lo = [slice(None)] * u.ndim
    hi = [slice(None)] * u.ndim
    lo[axis] = slice(0, -1)
    hi[axis] = slice(1, None)
    # column j collects +u[j-1] and -u[j]; the trailing (zeroed) row of the
    # forward difference never contributes.
    out[tuple(lo)] -= u[tuple(lo)]
    out[tuple(hi)] += u[tuple(lo)]
    return out / spacing


@dataclass(frozen=True, eq=False)
class LocalFrame:
    """Per-column orthonormal (angular, radial, axial) directions.

    Stores ``cos(theta)`` and ``sin(theta)`` per (i, j); the axial direction
    is the constant (0, 0, 1).
    """

    grid: VoxelGrid
    cos_theta: np.ndarray
    sin_theta: np.ndarray

    def __post_init__(self):
        expected = (self.grid.nx, self.grid.ny)
        for name in ("cos_theta", "sin_theta"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if arr.shape != expected:
                raise ValueError(f"{name} shape {arr.shape} != {expected}")
            object.__setattr__(self, name, arr)

    def angular_vectors(self) -> np.ndarray:
        """Unit angular direction per column, shape (nx, ny, 3)."""
        p = np.zeros((self.grid.nx, self.grid.ny, 3))
        p[..., 0] = -self.sin_theta
        p[..., 1] = self.cos_theta
        return p

    def radial_vectors(self) -> np.ndarray:
        """Unit radial direction per column, shape (nx, ny, 3)."""
        r = np.zeros((self.grid.nx, self.grid.ny, 3))
        r[..., 0] = self.cos_theta
        r[..., 1] = self.sin_theta
        return r


def build_local_frame(angles: AngleField) -> LocalFrame:
    return LocalFrame(angles.grid, np.cos(angles.theta), np.sin(angles.theta))


@dataclass(frozen=True, eq=False)
class GradientField:
    """Three gradient components on a grid.

    ``system`` is ``"cartesian"`` for (d/dx, d/dy, d/dz) or ``"cylindrical"``
    for (angular, radial, axial).
    """

    grid: VoxelGrid
    g1: np.ndarray
    g2: np.ndarray
    g3: np.ndarray
    system: str = "cartesian"

    def __post_init__(self):
        if self.system not in ("cartesian", "cylindrical"):
            raise ValueError(f"unknown gradient system {self.system!r}")
        for name in ("g1", "g2", "g3"):
            arr = getattr(self, name)
            if arr.shape != self.grid.shape:
                raise ValueError(f"{name} shape {arr.shape} != grid {self.grid.shape}")


def cartesian_gradient(vol: Volume) -> GradientField:
    """Forward-difference gradient (d/dx, d/dy, d/dz), scaled by 1/spacing."""
    s = vol.grid.voxel_spacing
    return GradientField(
        vol.grid,
        _forward_diff(vol.values, AXIS_X, s),
        _forward_diff(vol.values, AXIS_Y, s),
        _forward_diff(vol.values, AXIS_Z, s),
        system="cartesian",
    )


def cylindrical_project(grad: GradientField, frame: LocalFrame) -> GradientField:
    """Rotate a Cartesian gradient into each column's (angular, radial) frame.

    The axial component passes through unchanged.  Per voxel this is the
    orthonormal change of basis, so the in-plane magnitude is preserved.
    """
    if grad.system != "cartesian":
        raise ValueError("cylindrical_project expects a Cartesian gradient")
    if grad.grid != frame.grid:
        raise ValueError("gradient and frame are defined on different grids")
    cos_t = frame.cos_theta[:, :, None]
    sin_t = frame.sin_theta[:, :, None]
    angular = -sin_t * grad.g1 + cos_t * grad.g2
    radial = cos_t * grad.g1 + sin_t * grad.g2
    return GradientField(grad.grid, angular, radial, grad.g3, system="cylindrical")


class AxisGradient(LinearOperator):
    """Forward difference along one Cartesian axis (x, y or z)."""

    def __init__(self, grid: VoxelGrid, axis: int):
        if axis not in (AXIS_X, AXIS_Y, AXIS_Z):
            raise ValueError(f"axis must be 0, 1 or 2, got {axis}")
        self.grid = grid
        self.axis = axis
        self.domain_shape = grid.shape
        self.range_shape = grid.shape

    def __call__(self, x):
        return _forward_diff(x, self.axis, self.grid.voxel_spacing)

    def adjoint(self, u):
        return _forward_diff_adjoint(u, self.axis, self.grid.voxel_spacing)


class _ProjectedGradient(LinearOperator):
    """cx * d/dx + cy * d/dy with per-column coefficients (cx, cy)."""

    def __init__(self, frame: LocalFrame, coeff_x: np.ndarray, coeff_y: np.ndarray):
        self.grid = frame.grid
        self._cx = coeff_x[:, :, None]
        self._cy = coeff_y[:, :, None]
        self.domain_shape = self.grid.shape
        self.range_shape = self.grid.shape

    def __call__(self, x):
        s = self.grid.voxel_spacing
        return self._cx * _forward_diff(x, AXIS_X, s) + self._cy * _forward_diff(
            x, AXIS_Y, s
        )

    def adjoint(self, u):
        s = self.grid.voxel_spacing
        return _forward_diff_adjoint(self._cx * u, AXIS_X, s) + _forward_diff_adjoint(
            self._cy * u, AXIS_Y, s
        )


class AngularGradient(_ProjectedGradient):
    """Gradient component along the local angular direction p."""

    def __init__(self, frame: LocalFrame):
        super().__init__(frame, -frame.sin_theta, frame.cos_theta)


class RadialGradient(_ProjectedGradient):
    """Gradient component along the local radial direction r."""

    def __init__(self, frame: LocalFrame):
        super().__init__(frame, frame.cos_theta, frame.sin_theta)


class AxialGradient(AxisGradient):
    """Gradient along z (identical in Cartesian and cylindrical frames)."""

    def __init__(self, grid: VoxelGrid):
        super().__init__(grid, AXIS_Z)
