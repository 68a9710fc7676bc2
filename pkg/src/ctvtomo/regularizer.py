"""Anisotropic total-variation functionals and the dual proximal maps.

Two priors share one evaluation path: standard TV sums per-axis l1 norms
of the Cartesian gradient, and cylindrical TV sums l1 norms of the
angular, radial and axial components after rotating the in-plane gradient
into each column's local frame.  Only the anisotropic (per-direction l1)
form is offered: grouping the three components isotropically would undo
the rotation, because the per-voxel magnitude is invariant under it.

The proximal maps below are the two dual updates the solver needs: the
conjugate of a weighted l1 norm (a clamp) and the conjugate of the
half-squared residual data term.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffops import (
    AngularGradient,
    AxialGradient,
    AxisGradient,
    LocalFrame,
    RadialGradient,
)
from .geometry import Volume


@dataclass(frozen=True)
class CtvWeights:
    """Regularization strength per cylindrical direction (all >= 0)."""

    angular: float
    radial: float
    axial: float

    def __post_init__(self):
        if min(self.angular, self.radial, self.axial) < 0:
            raise ValueError(f"weights must be nonnegative, got {self}")


@dataclass(frozen=True)
class TvWeights:
    """Regularization strength per Cartesian axis (all >= 0)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if min(self.x, self.y, self.z) < 0:
            raise ValueError(f"weights must be nonnegative, got {self}")

    @classmethod
    def shared(cls, value: float) -> "TvWeights":
        return cls(value, value, value)


def ctv_value(vol: Volume, weights: CtvWeights, frame: LocalFrame) -> float:
    """Weighted sum of l1 norms of the angular, radial and axial gradients."""
    if frame.grid != vol.grid:
        raise ValueError("volume and frame are defined on different grids")
    x = vol.values
    return float(
        weights.angular * np.abs(AngularGradient(frame)(x)).sum()
        + weights.radial * np.abs(RadialGradient(frame)(x)).sum()
        + weights.axial * np.abs(AxialGradient(vol.grid)(x)).sum()
    )


def tv_value(vol: Volume, weights: TvWeights) -> float:
    """Weighted sum of l1 norms of the Cartesian axis gradients."""
    x = vol.values
    return float(
        sum(
            w * np.abs(AxisGradient(vol.grid, axis)(x)).sum()
            for axis, w in enumerate((weights.x, weights.y, weights.z))
        )
    )


def prox_l1_conjugate(u: np.ndarray, threshold: float) -> np.ndarray:
    """Projection onto the inf-norm ball of radius ``threshold`` (a clamp).

    This is the proximal map of the convex conjugate of ``threshold *
    ||.||_1``, i.e. the dual update for an l1 penalty.
    """
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    return np.clip(u, -threshold, threshold)


def prox_datafit_conjugate(v: np.ndarray, y: np.ndarray, sigma: float) -> np.ndarray:
    """Dual update for the data term f(u) = 1/2 ||u - y||^2: (v - sigma*y)/(1 + sigma)."""
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    return (v - sigma * y) / (1.0 + sigma)
