import numpy as np
import pytest

from ctvtomo.operators import DenseMatrix, Diagonal, Identity, Stacked, operator_norm


def dot_test(op, rng):
    x = rng.standard_normal(op.domain_shape)
    u = rng.standard_normal(op.range_shape)
    lhs = np.vdot(op(x), u)
    rhs = np.vdot(x, op.adjoint(u))
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs))


def test_identity_and_diagonal_adjoints():
    rng = np.random.default_rng(0)
    assert dot_test(Identity((4, 3, 2)), rng) < 1e-14
    assert dot_test(Diagonal(rng.standard_normal((4, 3, 2))), rng) < 1e-14


def test_dense_matrix_matches_numpy():
    rng = np.random.default_rng(1)
    mat = rng.standard_normal((7, 12))
    op = DenseMatrix(mat, (3, 2, 2))
    x = rng.standard_normal((3, 2, 2))
    u = rng.standard_normal(7)
    assert np.allclose(op(x), mat @ x.reshape(-1))
    assert np.allclose(op.adjoint(u), (mat.T @ u).reshape(3, 2, 2))
    assert dot_test(op, rng) < 1e-14


def test_dense_matrix_shape_check():
    with pytest.raises(ValueError):
        DenseMatrix(np.zeros((4, 5)), (2, 2, 2))


def test_stacked_applies_blocks_and_sums_adjoints():
    rng = np.random.default_rng(2)
    a = Diagonal(rng.standard_normal((3, 3, 1)))
    b = Identity((3, 3, 1))
    stack = Stacked([a, b])
    x = rng.standard_normal((3, 3, 1))
    out = stack(x)
    assert np.allclose(out[0], a(x)) and np.allclose(out[1], x)
    us = [rng.standard_normal((3, 3, 1)) for _ in range(2)]
    assert np.allclose(stack.adjoint(us), a.adjoint(us[0]) + us[1])


def test_stacked_rejects_mixed_domains():
    with pytest.raises(ValueError):
        Stacked([Identity((2, 2, 1)), Identity((3, 2, 1))])
    with pytest.raises(ValueError):
        Stacked([])


def test_norm_of_identity():
    assert operator_norm(Identity((5, 4, 3)), iters=3) == pytest.approx(1.0, abs=1e-6)


def test_norm_of_triple_scaling():
    op = Diagonal(3.0 * np.ones((4, 4, 2)))
    assert operator_norm(op, iters=3) == pytest.approx(3.0, abs=1e-6)


def test_norm_matches_dense_svd():
    rng = np.random.default_rng(3)
    mat = rng.standard_normal((20, 12))
    op = DenseMatrix(mat, (4, 3, 1))
    top = np.linalg.svd(mat, compute_uv=False)[0]
    assert operator_norm(op, iters=200, seed=5) == pytest.approx(top, rel=1e-6)


def test_norm_estimates_nondecreasing_in_iters():
    rng = np.random.default_rng(4)
    op = DenseMatrix(rng.standard_normal((15, 8)), (2, 2, 2))
    estimates = [operator_norm(op, iters=k, seed=9) for k in range(1, 12)]
    diffs = np.diff(estimates)
    assert (diffs >= -1e-12).all()


def test_norm_deterministic_per_seed():
    rng = np.random.default_rng(5)
    op = DenseMatrix(rng.standard_normal((9, 8)), (2, 2, 2))
    assert operator_norm(op, iters=7, seed=1) == operator_norm(op, iters=7, seed=1)


def test_norm_rejects_zero_iters():
    with pytest.raises(ValueError):
        operator_norm(Identity((2, 2, 1)), iters=0)
