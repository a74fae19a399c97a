import sys
from pathlib import Path

import numpy as np
import pytest
import scipy.linalg
from numpy.testing import assert_allclose, assert_array_equal

sys.path.append(str(Path(__file__).parent.parent))

from config import settings
from core.errors import ContractViolation
from core.linalg import (
    CholeskyFailure,
    HermitianOperator,
    cholesky,
    gemm,
    gram,
    hermitian_eig,
    householder_qr,
    jacobi_svd_cond,
)
from utils.helpers import orthogonality_error, prescribed_svd_block, random_block

U = settings.UNIT_ROUNDOFF


def test_gemm():
    """gemm 的基本性质"""
    rng = np.random.default_rng(0)
    M = rng.standard_normal((3, 2))
    assert_array_equal(gemm(1.0, np.eye(3), M), M)
    assert_array_equal(gemm(0.0, rng.standard_normal((3, 4)), rng.standard_normal((4, 2)), 1.0, M), M)
    assert_allclose(gemm(1.0, np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([[1.0], [1.0]])), [[3.0], [7.0]])

    with pytest.raises(ContractViolation):
        gemm(1.0, np.ones((3, 4)), np.ones((3, 2)))
    with pytest.raises(ContractViolation):
        gemm(1.0, np.ones((2, 2)), np.ones((2, 2), dtype=complex))


def test_gram():
    """XᴴX 的例子，以及复数情形下的 Hermitian 结构"""
    Q, _ = householder_qr(random_block(40, 5, np.random.default_rng(1)))
    assert np.linalg.norm(gram(Q) - np.eye(5)) <= 64 * U * np.sqrt(5)
    assert_array_equal(gram(np.array([[2.0], [0.0]])), [[4.0]])
    assert_allclose(gram(np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)), np.eye(2), atol=1e-15)

    R = gram(random_block(30, 6, np.random.default_rng(2), complex_entries=True))
    assert_array_equal(R, R.conj().T)
    assert np.all(np.imag(np.diag(R)) == 0.0)


def test_cholesky():
    """成功与失败的 Cholesky 分解"""
    assert_allclose(cholesky(np.eye(4)), np.eye(4))
    assert_allclose(cholesky(np.array([[4.0, 2.0], [2.0, 3.0]])), [[2.0, 1.0], [0.0, np.sqrt(2.0)]], rtol=1e-15)

    failure = cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert isinstance(failure, CholeskyFailure)
    assert failure.pivot == 2

    failure = cholesky(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    assert isinstance(failure, CholeskyFailure)
    assert failure.pivot == 1

    with pytest.raises(ContractViolation):
        cholesky(np.ones((2, 3)))


def test_householder_qr():
    """Householder QR：R 对角线非负，病态输入下仍然正交"""
    Q, R = householder_qr(np.eye(3))
    assert_allclose(Q, np.eye(3), atol=1e-15)
    assert_allclose(R, np.eye(3), atol=1e-15)

    Q, R = householder_qr(np.array([[1.0], [1.0]]))
    assert_allclose(Q, [[1 / np.sqrt(2.0)], [1 / np.sqrt(2.0)]], rtol=1e-15)
    assert_allclose(R, [[np.sqrt(2.0)]], rtol=1e-15)

    X = prescribed_svd_block(50, 10, cond=1e12, seed=3)
    Q, R = householder_qr(X)
    assert orthogonality_error(Q) <= 1e-13
    assert np.all(np.diag(R) >= 0.0)

    Z = random_block(20, 4, np.random.default_rng(4), complex_entries=True)
    Q, R = householder_qr(Z)
    assert_allclose(Q @ R, Z, atol=1e-13)
    assert np.all(np.real(np.diag(R)) >= 0.0)

    with pytest.raises(ContractViolation):
        householder_qr(np.ones((2, 3)))


def test_hermitian_eig():
    """升序特征值与正交特征向量"""
    eig = hermitian_eig(np.diag([3.0, 1.0, 2.0]))
    assert_allclose(eig.values, [1.0, 2.0, 3.0])

    eig = hermitian_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert_allclose(eig.values, [-1.0, 1.0], atol=1e-15)
    assert_allclose(np.abs(eig.vectors), 1 / np.sqrt(2.0), rtol=1e-14)
    assert eig.vectors[0, 0] * eig.vectors[1, 0] < 0.0

    assert_allclose(hermitian_eig(np.eye(5)).values, np.ones(5))

    with pytest.raises(ContractViolation):
        hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ContractViolation):
        hermitian_eig(np.eye(4), dense_cap=3)


def test_jacobi_svd_cond():
    """Jacobi SVD 条件数的参考值"""
    Q, _ = householder_qr(random_block(40, 8, np.random.default_rng(5)))
    assert abs(jacobi_svd_cond(Q).cond2 - 1.0) <= 1e-12

    X = np.zeros((5, 2))
    X[0, 0], X[1, 1] = 10.0, 1.0
    result = jacobi_svd_cond(X)
    assert_allclose(result.cond2, 10.0, rtol=1e-14)
    assert_allclose(result.sigma_max, 10.0, rtol=1e-14)

    X = prescribed_svd_block(30, 2, singular_values=[1.0, 1e-8], seed=6)
    assert_allclose(jacobi_svd_cond(X).cond2, 1e8, rtol=1e-6)

    X = np.zeros((3, 2))
    X[0, 0] = 1.0
    assert jacobi_svd_cond(X).cond2 == np.inf

    Z = random_block(40, 6, np.random.default_rng(7), complex_entries=True)
    assert_allclose(jacobi_svd_cond(Z).cond2, np.linalg.cond(Z), rtol=1e-10)


def test_jacobi_unitary_invariance():
    """左乘列正交矩阵不改变条件数"""
    X = prescribed_svd_block(40, 6, cond=1e3, seed=8)
    W, _ = householder_qr(random_block(60, 40, np.random.default_rng(9)))
    assert_allclose(jacobi_svd_cond(W @ X).cond2, jacobi_svd_cond(X).cond2, rtol=1e-10)
    assert_allclose(jacobi_svd_cond(X).cond2, 1e3, rtol=1e-10)


def test_operator_counts_columns():
    """算子包装：计数与形状检查"""
    A = HermitianOperator(np.diag([1.0, 2.0, 3.0]))
    assert A.check_hermitian()
    assert_allclose(A.apply(np.eye(3)[:, :2]), np.diag([1.0, 2.0, 3.0])[:, :2])
    assert A.applied_columns == 2
    A.reset_count()
    assert A.applied_columns == 0
    assert A.norm_estimate() == 3.0

    with pytest.raises(ContractViolation):
        A.apply(np.ones((2, 1)))
    with pytest.raises(ContractViolation):
        A.apply(np.ones((3, 1), dtype=complex))
    with pytest.raises(ContractViolation):
        HermitianOperator(np.ones((2, 3)))


def test_householder_r_matches_gram_cholesky():
    """满秩 X 的 Householder R 与 cholesky(XᴴX) 相同（R 的对角线取非负）"""
    rng = np.random.default_rng(21)
    for complex_entries in (False, True):
        X = random_block(200, 10, rng, complex_entries=complex_entries)
        _, R = householder_qr(X)
        U = cholesky(gram(X))
        assert not isinstance(U, CholeskyFailure)
        assert_allclose(R, U, rtol=0.0, atol=1e-12 * np.linalg.norm(R))

        # 不做符号约定时两者只差每行一个单位模长的因子
        _, raw = scipy.linalg.qr(X, mode="economic")
        phases = np.diag(raw) / np.diag(U)
        assert_allclose(np.abs(phases), 1.0, rtol=1e-12)
        assert_allclose(raw, phases[:, None] * U, rtol=0.0, atol=1e-12 * np.linalg.norm(R))


if __name__ == "__main__":
    for test in (test_gemm, test_gram, test_cholesky, test_householder_qr, test_hermitian_eig,
                 test_jacobi_svd_cond, test_jacobi_unitary_invariance, test_operator_counts_columns,
                 test_householder_r_matches_gram_cholesky):
        test()
        print(f"{test.__name__} 通过")
