"""Matrix-free linear operators with exact adjoints, and spectral-norm estimation.

Operators map a volume-shaped ndarray to an output ndarray (or, for
:class:`Stacked`, a list of ndarrays) and expose the exact transpose via
``adjoint``.  Exactness of the adjoints is what lets the primal-dual solver
take consistent gradient steps; every concrete operator in this package is
covered by a dot-product test.
"""
from __future__ import annotations

import numpy as np


class LinearOperator:
    """Base class: a linear map with ``__call__``, ``adjoint`` and shapes."""

    domain_shape: tuple
    range_shape: tuple

    def __call__(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Identity(LinearOperator):
    def __init__(self, shape):
        self.domain_shape = tuple(shape)
        self.range_shape = tuple(shape)

    def __call__(self, x):
        return np.array(x, dtype=np.float64)

    def adjoint(self, u):
        return np.array(u, dtype=np.float64)


class Diagonal(LinearOperator):
    """Elementwise scaling; self-adjoint for real weights."""

    def __init__(self, weights: np.ndarray):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.domain_shape = self.weights.shape
        self.range_shape = self.weights.shape

    def __call__(self, x):
        return self.weights * x

    def adjoint(self, u):
        return self.weights * u


class DenseMatrix(LinearOperator):
    """Explicit matrix acting on a flattened domain; used by small test problems."""

    def __init__(self, matrix: np.ndarray, domain_shape):
        self.matrix = np.asarray(matrix, dtype=np.float64)
        self.domain_shape = tuple(domain_shape)
        n = int(np.prod(self.domain_shape))
        if self.matrix.ndim != 2 or self.matrix.shape[1] != n:
            raise ValueError(
                f"matrix shape {self.matrix.shape} incompatible with domain {self.domain_shape}"
            )
        self.range_shape = (self.matrix.shape[0],)

    def __call__(self, x):
        return self.matrix @ np.asarray(x).reshape(-1)

    def adjoint(self, u):
        return (self.matrix.T @ np.asarray(u)).reshape(self.domain_shape)


class Stacked(LinearOperator):
    """Vertical stack [K_1; ...; K_m] sharing one domain.

    ``__call__`` returns one array per block; ``adjoint`` takes the matching
    list and sums the per-block adjoints.
    """

    def __init__(self, ops):
        ops = list(ops)
        if not ops:
            raise ValueError("stack needs at least one operator")
        shapes = {op.domain_shape for op in ops}
        if len(shapes) != 1:
            raise ValueError(f"stacked operators disagree on domain: {shapes}")
        self.ops = ops
        self.domain_shape = ops[0].domain_shape
        self.range_shape = tuple(op.range_shape for op in ops)

    def __call__(self, x):
        return [op(x) for op in self.ops]

    def adjoint(self, blocks):
        out = self.ops[0].adjoint(blocks[0])
        for op, u in zip(self.ops[1:], blocks[1:]):
            out = out + op.adjoint(u)
        return out


def _block_sqnorm(u) -> float:
    if isinstance(u, list):
        return float(sum(np.vdot(b, b).real for b in u))
    return float(np.vdot(u, u).real)


def operator_norm(op: LinearOperator, iters: int = 50, seed: int = 0) -> float:
    """Estimate the largest singular value of ``op`` by power iteration.

    The estimate is the Rayleigh quotient of ``op.T op`` along the power
    sequence, which is nondecreasing in ``iters`` and deterministic for a
    given ``seed``.
    """
    if iters < 1:
        raise ValueError(f"iters must be >= 1, got {iters}")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(op.domain_shape)
    x /= np.linalg.norm(x.reshape(-1))
    estimate = 0.0
    for _ in range(iters):
        u = op(x)
        estimate = np.sqrt(_block_sqnorm(u))  # = sqrt(x^T K^T K x) for unit x
        x = op.adjoint(u)
        norm_x = np.linalg.norm(x.reshape(-1))
        if norm_x == 0.0:  # op is zero on the start vector
            return 0.0
        x /= norm_x
    return float(estimate)
