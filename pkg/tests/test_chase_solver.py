import sys
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

sys.path.append(str(Path(__file__).parent.parent))

from core.chase import (
    QrVariant,
    SolverConfig,
    Subspace,
    lock_and_deflate,
    rayleigh_ritz,
    residuals,
    solve,
)
from core.chase.cond import CondRegime
from core.errors import ContractViolation
from core.linalg import HermitianOperator, householder_qr
from utils.helpers import orthogonality_error, random_block


def _diag_operator(n: int = 500) -> HermitianOperator:
    return HermitianOperator(np.diag(np.arange(1.0, n + 1.0)))


def test_solver_config():
    """配置的默认值与校验"""
    config = SolverConfig.from_settings(nev=10, nex=5, seed=None)
    assert config.ell == 15
    assert config.tol == 1e-10
    with pytest.raises(ContractViolation):
        SolverConfig.from_settings(base_degree=40, max_degree=36)
    with pytest.raises(ContractViolation):
        SolverConfig.from_settings(nev=0)
    with pytest.raises(ContractViolation):
        SolverConfig.from_settings(qr_mode="gram_schmidt")


def test_rayleigh_ritz():
    """Rayleigh–Ritz：升序 Ritz 值，锁定前缀不变"""
    A = HermitianOperator(np.diag([1.0, 2.0, 3.0, 4.0]))
    I = np.eye(4)

    projection = rayleigh_ritz(A, I[:, :2], locked=0)
    assert_allclose(projection.ritz_values, [1.0, 2.0], atol=1e-15)

    mixed = np.column_stack([I[:, 0] + I[:, 1], I[:, 0] - I[:, 1]]) / np.sqrt(2.0)
    projection = rayleigh_ritz(A, mixed, locked=0)
    assert_allclose(projection.ritz_values, [1.0, 2.0], atol=1e-14)
    assert_allclose(np.abs(projection.rotated), I[:, :2], atol=1e-14)

    block = np.column_stack([I[:, 2], I[:, 0], I[:, 1]])
    projection = rayleigh_ritz(A, block, locked=1)
    assert_array_equal(projection.rotated[:, 0], I[:, 2])
    assert_allclose(projection.ritz_values, [1.0, 2.0], atol=1e-15)

    with pytest.raises(ContractViolation):
        rayleigh_ritz(A, I[:, :2], locked=2)


def test_residuals():
    """残差范数的例子"""
    A = HermitianOperator(np.diag([1.0, 2.0]))
    e1 = np.array([[1.0], [0.0]])
    assert residuals(A, e1, [1.0])[0] == 0.0
    assert_allclose(residuals(A, e1, [1.5]), [0.5])
    assert residuals(A, np.zeros((2, 1)), [1.0])[0] == np.inf
    with pytest.raises(ContractViolation):
        residuals(A, e1, [1.0, 2.0])


def test_lock_and_deflate():
    """只锁定残差小于 tol 的最长前缀"""
    sub = Subspace(block=np.eye(6)[:, :5], locked=1, ritz_values=np.arange(5.0))
    outcome = lock_and_deflate(sub, [1e-12, 1e-12, 1e-3, 1e-12], tol=1e-10)
    assert outcome.newly_locked == 2
    assert outcome.sub.locked == 3
    assert sub.locked == 1

    assert lock_and_deflate(sub, [1e-12, 1e-12, 1e-3, 1e-12], tol=1e-10, nev=2).newly_locked == 1
    assert lock_and_deflate(sub, [1e-3, 1e-12, 1e-12, 1e-12], tol=1e-10).newly_locked == 0
    with pytest.raises(ContractViolation):
        lock_and_deflate(sub, [1e-12], tol=1e-10)


def test_solve_uniform_diagonal():
    """diag(1..500)：10 个最小特征值"""
    A = _diag_operator()
    config = SolverConfig.from_settings(nev=10, nex=10, seed=7)
    result = solve(A, config)

    assert result.converged
    assert result.verified
    assert result.locked >= 10
    assert_allclose(result.eigenvalues, np.arange(1.0, 11.0), atol=1e-8)
    assert orthogonality_error(result.eigenvectors) <= 1e-12
    assert np.all(result.final_residuals <= config.tol)
    assert 0 < result.matvecs < A.applied_columns

    first, second = result.traces[0], result.traces[1]
    assert first.iter == 0 and first.regime is CondRegime.INITIAL
    assert first.res_max is None
    assert second.regime is CondRegime.UNIFORM
    assert second.deg_min == second.deg_max == config.base_degree
    for trace in result.traces:
        if trace.qr_variant is QrVariant.CHOLQR1:
            assert trace.cond_est < config.cholqr1_threshold
        assert (trace.shift is not None) == (trace.qr_variant is QrVariant.SHIFTED_CHOLQR2)
    counts = [trace.matvecs for trace in result.traces]
    assert counts == sorted(counts)
    assert counts[-1] == result.matvecs


def test_solve_is_deterministic():
    """相同种子两次求解逐位相同"""
    config = SolverConfig.from_settings(nev=5, nex=5, seed=3)
    first = solve(_diag_operator(200), config)
    second = solve(_diag_operator(200), config)
    assert_array_equal(first.eigenvalues, second.eigenvalues)
    assert first.traces == second.traces


def test_exact_initial_guess_converges_immediately():
    """用精确特征向量作为初始块时一次迭代即收敛"""
    config = SolverConfig.from_settings(nev=10, nex=10, seed=1)
    result = solve(_diag_operator(), config, initial_guess=np.eye(500)[:, :20])
    assert result.converged
    assert result.iterations == 1
    assert result.traces[0].cond_est == np.inf
    assert result.traces[0].qr_variant is QrVariant.SHIFTED_CHOLQR2
    assert_allclose(result.eigenvalues, np.arange(1.0, 11.0), atol=1e-10)


def test_iteration_limit():
    """达到 max_iterations 时返回 converged=False，不抛出异常"""
    config = SolverConfig.from_settings(nev=10, nex=10, max_iterations=1, base_degree=3, max_degree=36)
    result = solve(_diag_operator(), config)
    assert not result.converged
    assert result.iterations == 1
    assert result.eigenvalues.shape == (10,)
    assert len(result.traces) == 2


def test_complex_hermitian_and_hook():
    """复 Hermitian 矩阵、相对 tol 以及 QR 之前的回调"""
    rng = np.random.default_rng(4)
    V, _ = householder_qr(random_block(200, 200, rng, complex_entries=True))
    H = (V * np.arange(1.0, 201.0)) @ V.conj().T
    H = (H + H.conj().T) / 2

    seen = []

    def hook(iteration, block):
        seen.append((iteration, block.shape))
        return None

    config = SolverConfig.from_settings(nev=5, nex=5, tol=1e-12, tol_mode="relative", seed=2)
    result = solve(H, config, on_pre_qr=hook)
    assert result.converged
    assert result.tol > 1e-12
    assert_allclose(result.eigenvalues, np.arange(1.0, 6.0), atol=1e-8)
    assert np.iscomplexobj(result.eigenvectors)
    assert [iteration for iteration, _ in seen] == list(range(len(result.traces)))
    assert all(shape == (200, 10) for _, shape in seen)


def test_solve_rejects_bad_input():
    """ℓ >= n 与非 Hermitian 矩阵"""
    with pytest.raises(ContractViolation):
        solve(_diag_operator(20), SolverConfig.from_settings(nev=10, nex=10))
    A = np.diag(np.arange(1.0, 51.0))
    A[0, 1] = 1.0
    with pytest.raises(ContractViolation):
        solve(A, SolverConfig.from_settings(nev=5, nex=5))


if __name__ == "__main__":
    for test in (test_solver_config, test_rayleigh_ritz, test_residuals, test_lock_and_deflate,
                 test_solve_uniform_diagonal, test_solve_is_deterministic,
                 test_exact_initial_guess_converges_immediately, test_iteration_limit,
                 test_complex_hermitian_and_hook, test_solve_rejects_bad_input):
        test()
        print(f"{test.__name__} 通过")
