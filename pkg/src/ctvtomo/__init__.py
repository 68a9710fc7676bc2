"""Sparse-view CT reconstruction with total variation in local cylindrical coordinates.

The package provides a parallel-beam projector with an exact adjoint,
first-order difference operators rotated per-voxel into a local
(angular, radial, axial) frame, anisotropic TV priors in both Cartesian
and cylindrical coordinates, and a primal-dual solver tying them
together, plus the phantom, noise model, and metrics used by the
simulation pipeline.
"""

from .geometry import (
    AngleField,
    GridMismatchError,
    Volume,
    VoxelGrid,
    compute_angle_field,
    make_grid,
)
from .operators import DenseMatrix, Diagonal, Identity, LinearOperator, Stacked, operator_norm
from .diffops import (
    AngularGradient,
    AxialGradient,
    AxisGradient,
    GradientField,
    LocalFrame,
    RadialGradient,
    build_local_frame,
    cartesian_gradient,
    cylindrical_project,
)
from .projector import (
    GeometryMismatchError,
    ParallelProjector,
    ScanGeometry,
    Sinogram,
    backproject,
    default_num_channels,
    make_scan_geometry,
    project,
)
from .regularizer import (
    CtvWeights,
    TvWeights,
    ctv_value,
    prox_datafit_conjugate,
    prox_l1_conjugate,
    tv_value,
)
from .solver import (
    DivergenceError,
    PdhgConfig,
    ReconResult,
    StepSizeError,
    objective,
    solve,
)
from .phantom import (
    CrackSpec,
    NoiseSpec,
    add_noise,
    column_interior_mask,
    make_column_phantom,
    psnr,
)
from . import volio

__version__ = "0.1.0"

__all__ = [
    "AngleField",
    "AngularGradient",
    "AxialGradient",
    "AxisGradient",
    "CrackSpec",
    "CtvWeights",
    "DenseMatrix",
    "Diagonal",
    "DivergenceError",
    "GeometryMismatchError",
    "GradientField",
    "GridMismatchError",
    "Identity",
    "LinearOperator",
    "LocalFrame",
    "NoiseSpec",
    "ParallelProjector",
    "PdhgConfig",
    "RadialGradient",
    "ReconResult",
    "ScanGeometry",
    "Sinogram",
    "Stacked",
    "StepSizeError",
    "TvWeights",
    "Volume",
    "VoxelGrid",
    "add_noise",
    "backproject",
    "build_local_frame",
    "cartesian_gradient",
    "column_interior_mask",
    "compute_angle_field",
    "ctv_value",
    "cylindrical_project",
    "default_num_channels",
    "make_column_phantom",
    "make_grid",
    "make_scan_geometry",
    "objective",
    "operator_norm",
    "project",
    "prox_datafit_conjugate",
    "prox_l1_conjugate",
    "psnr",
    "solve",
    "tv_value",
    "volio",
]
