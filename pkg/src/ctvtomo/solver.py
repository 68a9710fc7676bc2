"""Primal-dual hybrid gradient solver for the regularized CT problem.

Minimizes ``1/2 ||A x - y||^2 + R(x)`` where R is the cylindrical or
Cartesian anisotropic TV prior (or absent), optionally subject to x >= 0.
The saddle-point form stacks the projector with one difference operator
per nonzero regularization weight; each dual block has a closed-form
conjugate proximal map, so every iteration costs one forward and one
adjoint application of each operator and a few elementwise passes.

PDHG is not a descent method: the objective settles but is not monotone
per iteration, so diagnostics record the full history instead of a single
terminal value.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field

import numpy as np

from .diffops import (
    AngularGradient,
    AxialGradient,
    AxisGradient,
    RadialGradient,
    build_local_frame,
)
from .geometry import Volume, VoxelGrid, compute_angle_field
from .operators import LinearOperator, Stacked, operator_norm
from .regularizer import (
    CtvWeights,
    TvWeights,
    ctv_value,
    prox_datafit_conjugate,
    prox_l1_conjugate,
    tv_value,
)


class StepSizeError(ValueError):
    """tau * sigma * L^2 exceeds 1: the iteration is not guaranteed to converge."""


class DivergenceError(RuntimeError):
    """Non-finite iterate detected; carries the offending iteration index."""

    def __init__(self, iteration: int):
        super().__init__(f"non-finite iterate at iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class PdhgConfig:
    """Solver settings.

    ``tau``/``sigma`` default to the balanced choice 0.99 / L with L the
    power-iteration estimate of the stacked operator norm; explicit values
    are checked against tau * sigma * L^2 <= 1 once L is known.
    ``extrapolation`` is the over-relaxation factor in [0, 1].  ``stop_tol``
    enables an optional early stop on the relative primal change (off by
    default so runs are reproducible at a fixed iteration budget).
    """

    max_iters: int = 500
    tau: float | None = None
    sigma: float | None = None
    extrapolation: float = 1.0
    nonneg: bool = True
    norm_iters: int = 50
    seed: int = 0
    stop_tol: float | None = None
    verbose: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not 0.0 <= self.extrapolation <= 1.0:
            raise ValueError(f"extrapolation must be in [0, 1], got {self.extrapolation}")
        if self.tau is not None and not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.norm_iters < 1:
            raise ValueError(f"norm_iters must be >= 1, got {self.norm_iters}")


@dataclass(eq=False)
class ReconResult:
    """Final iterate plus per-iteration diagnostics."""

    volume: Volume
    objective: np.ndarray
    datafit: np.ndarray
    regularizer: np.ndarray
    primal_step: np.ndarray  # ||x_k - x_{k-1}|| per iteration
    iterations: int
    tau: float
    sigma: float
    operator_norm_estimate: float
    duals: list = field(repr=False, default_factory=list)


def _regularizer_blocks(reg, grid: VoxelGrid):
    """(operator, weight) pairs for every nonzero weight of ``reg``.

    Zero-weight blocks are dropped: their duals would stay pinned at zero
    while still inflating the stacked operator norm.
    """
    if reg is None:
        return []
    if isinstance(reg, CtvWeights):
        frame = build_local_frame(compute_angle_field(grid))
        pairs = [
            (AngularGradient(frame), reg.angular),
            (RadialGradient(frame), reg.radial),
            (AxialGradient(grid), reg.axial),
        ]
    elif isinstance(reg, TvWeights):
        pairs = [
            (AxisGradient(grid, 0), reg.x),
            (AxisGradient(grid, 1), reg.y),
            (AxisGradient(grid, 2), reg.z),
        ]
    else:
        raise TypeError(f"unsupported regularizer weights: {type(reg).__name__}")
    return [(op, w) for op, w in pairs if w > 0]


def _as_array(y) -> np.ndarray:
    return np.ascontiguousarray(getattr(y, "values", y), dtype=np.float64)


def objective(x: Volume, A: LinearOperator, y, reg=None) -> float:
    """1/2 ||A x - y||^2 plus the regularizer value (0 if ``reg`` is None)."""
    residual = A(x.values) - _as_array(y)
    value = 0.5 * float(np.vdot(residual, residual).real)
    if isinstance(reg, CtvWeights):
        frame = build_local_frame(compute_angle_field(x.grid))
        value += ctv_value(x, reg, frame)
    elif isinstance(reg, TvWeights):
        value += tv_value(x, reg)
    elif reg is not None:
        raise TypeError(f"unsupported regularizer weights: {type(reg).__name__}")
    return value


def solve(
    A: LinearOperator,
    y,
    reg=None,
    cfg: PdhgConfig | None = None,
    init: Volume | None = None,
    log=None,
) -> ReconResult:
    """Run PDHG on ``1/2 ||A x - y||^2 + R(x)`` (+ nonnegativity if configured).

    Parameters
    ----------
    A : LinearOperator
        Forward operator with domain shape equal to the grid shape.
    y : Sinogram or ndarray
        Data matching A's range shape.
    reg : CtvWeights, TvWeights or None
        Prior weights; None solves the plain (possibly constrained)
        least-squares problem.
    cfg : PdhgConfig
    init : Volume, optional
        Warm start; zero volume by default.
    log : writable text stream, optional
        Target of the per-iteration log when ``cfg.verbose``; defaults to
        stdout.

    Deterministic for fixed inputs and seed.  Raises :class:`StepSizeError`
    if explicit step sizes violate the convergence condition and
    :class:`DivergenceError` if an iterate becomes non-finite.
    """
    cfg = cfg or PdhgConfig()
    if not isinstance(getattr(A, "domain_shape", None), tuple):
        raise TypeError("A must be a LinearOperator with a domain_shape")
    grid = _domain_grid(A)
    data = _as_array(y)
    if data.shape != tuple(A.range_shape):
        raise ValueError(f"data shape {data.shape} != operator range {A.range_shape}")

    blocks = _regularizer_blocks(reg, grid)
    stack = Stacked([A] + [op for op, _ in blocks])
    norm_est = operator_norm(stack, iters=cfg.norm_iters, seed=cfg.seed)
    if norm_est == 0.0:
        raise ValueError("operator stack is numerically zero")

    tau = cfg.tau if cfg.tau is not None else 0.99 / norm_est
    sigma = cfg.sigma if cfg.sigma is not None else 0.99 / norm_est
    # 1e-9 slack absorbs roundoff in the norm estimate itself.
    if tau * sigma * norm_est**2 > 1.0 + 1e-9:
        raise StepSizeError(
            f"tau*sigma*L^2 = {tau * sigma * norm_est**2:.6g} > 1 "
            f"(tau={tau:.4g}, sigma={sigma:.4g}, L={norm_est:.4g})"
        )

    if init is not None:
        if init.grid != grid:
            raise ValueError("init volume grid does not match the operator domain")
        x = init.values.copy()
    else:
        x = np.zeros(grid.shape)
    x_bar = x.copy()
    z_data = np.zeros(A.range_shape)
    z_reg = [np.zeros(op.range_shape) for op, _ in blocks]

    theta = cfg.extrapolation
    stream = log if log is not None else sys.stdout
    obj_hist = np.zeros(cfg.max_iters)
    fit_hist = np.zeros(cfg.max_iters)
    reg_hist = np.zeros(cfg.max_iters)
    step_hist = np.zeros(cfg.max_iters)

    n_done = 0
    for k in range(cfg.max_iters):
        z_data = prox_datafit_conjugate(z_data + sigma * A(x_bar), data, sigma)
        for idx, (op, weight) in enumerate(blocks):
            z_reg[idx] = prox_l1_conjugate(z_reg[idx] + sigma * op(x_bar), weight)

        ascent = A.adjoint(z_data)
        for (op, _), z in zip(blocks, z_reg):
            ascent += op.adjoint(z)
        x_new = x - tau * ascent
        if cfg.nonneg:
            np.maximum(x_new, 0.0, out=x_new)
        if not np.isfinite(x_new).all():
            raise DivergenceError(k)

        x_bar = x_new + theta * (x_new - x)
        step = float(np.linalg.norm((x_new - x).reshape(-1)))
        x = x_new

        residual = A(x) - data
        fit = 0.5 * float(np.vdot(residual, residual).real)
        reg_val = float(
            sum(w * np.abs(op(x)).sum() for op, w in blocks)
        )
        fit_hist[k] = fit
        reg_hist[k] = reg_val
        obj_hist[k] = fit + reg_val
        step_hist[k] = step
        n_done = k + 1
        if cfg.verbose:
            print(
                f"iter={k + 1} objective={fit + reg_val:.9e} "
                f"datafit={fit:.9e} regularizer={reg_val:.9e}",
                file=stream,
            )
        if cfg.stop_tol is not None:
            ref = float(np.linalg.norm(x.reshape(-1)))
            if step <= cfg.stop_tol * max(ref, 1e-30):
                break

    return ReconResult(
        volume=Volume(grid, x),
        objective=obj_hist[:n_done],
        datafit=fit_hist[:n_done],
        regularizer=reg_hist[:n_done],
        primal_step=step_hist[:n_done],
        iterations=n_done,
        tau=tau,
        sigma=sigma,
        operator_norm_estimate=norm_est,
        duals=[z_data] + z_reg,
    )


def _domain_grid(A: LinearOperator) -> VoxelGrid:
    grid = getattr(A, "grid", None)
    if isinstance(grid, VoxelGrid):
        return grid
    shape = A.domain_shape
    if len(shape) != 3:
        raise ValueError(f"operator domain must be a 3D volume, got shape {shape}")
    return VoxelGrid(shape[0], shape[1], shape[2], 1.0)
