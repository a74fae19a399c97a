"""
稠密线性代数核心：GEMM、Gram 矩阵、Cholesky、Householder QR、
Hermitian 特征分解以及基于单边 Jacobi 的 2-范数条件数。

所有运算要求参与的矩阵标量类型一致 (float64 或 complex128)。
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np
import scipy.linalg
from scipy.linalg.lapack import get_lapack_funcs

from config import settings
from core.errors import ContractViolation

logger = logging.getLogger(__name__)


class ScalarKind(str, Enum):
    """标量类型"""
    REAL64 = "real64"
    COMPLEX128 = "complex128"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.float64) if self is ScalarKind.REAL64 else np.dtype(np.complex128)


def scalar_kind(X: np.ndarray) -> ScalarKind:
    return ScalarKind.COMPLEX128 if np.iscomplexobj(X) else ScalarKind.REAL64


def as_dense(X, name: str = "X") -> np.ndarray:
    """
    把输入转换为二维的 float64 / complex128 数组。

    整数与布尔输入按实数处理；其余类型视为违反约定。
    """
    X = np.asarray(X)
    if X.ndim != 2:
        raise ContractViolation(f"{name} must be 2-dimensional, got shape {X.shape}")
    if X.dtype in (np.float64, np.complex128):
        return X
    if np.issubdtype(X.dtype, np.integer) or X.dtype == np.bool_ or X.dtype == np.float32:
        return X.astype(np.float64)
    if X.dtype == np.complex64:
        return X.astype(np.complex128)
    raise ContractViolation(f"{name} has unsupported dtype {X.dtype}")


def _require_same_kind(*arrays: np.ndarray) -> None:
    kinds = {scalar_kind(a) for a in arrays}
    if len(kinds) > 1:
        raise ContractViolation(f"scalar kinds differ: {sorted(k.value for k in kinds)}")


def gemm(alpha: complex, A, B, beta: complex = 0.0, C=None) -> np.ndarray:
    """
    C ← α·A·B + β·C

    Args:
        alpha, beta: 标量系数
        A, B: 形状兼容的矩阵
        C: 可选的累加矩阵；beta 非零时必须提供

    Returns:
        新的结果矩阵（不修改输入）
    """
    A = as_dense(A, "A")
    B = as_dense(B, "B")
    _require_same_kind(A, B)
    if A.shape[1] != B.shape[0]:
        raise ContractViolation(f"gemm shape mismatch: {A.shape} x {B.shape}")
    product = alpha * (A @ B)
    if C is None:
        if beta != 0:
            raise ContractViolation("beta is non-zero but C was not given")
        return product
    C = as_dense(C, "C")
    _require_same_kind(A, C)
    if C.shape != product.shape:
        raise ContractViolation(f"C has shape {C.shape}, expected {product.shape}")
    return product + beta * C


def gram(X) -> np.ndarray:
    """
    计算 Gram 矩阵 XᴴX，并保证结果严格 Hermitian（对角线为实数）。
    """
    X = as_dense(X)
    R = X.conj().T @ X
    upper = np.triu(R, 1)
    R = upper + upper.conj().T + np.diag(np.real(np.diag(R)))
    return R.astype(X.dtype, copy=False)


@dataclass(frozen=True)
class CholeskyFailure:
    """Cholesky 分解失败：pivot 为第一个非正主元的位置（从 1 开始）。"""
    pivot: int
    round: int = 1


def cholesky(R) -> Union[np.ndarray, CholeskyFailure]:
    """
    Hermitian 矩阵的上三角 Cholesky 分解 R = UᴴU。

    失败时返回 CholeskyFailure 而不是抛出异常，由上层决定是否回退。
    非有限输入视为在第一个出现 NaN/Inf 的行处失败。
    """
    R = as_dense(R, "R")
    if R.shape[0] != R.shape[1]:
        raise ContractViolation(f"cholesky needs a square matrix, got {R.shape}")
    if R.shape[0] == 0:
        return R.copy()

    bad = ~np.isfinite(np.triu(R))
    if bad.any():
        rows = np.flatnonzero(bad.any(axis=1))
        return CholeskyFailure(pivot=int(rows[0]) + 1)

    potrf, = get_lapack_funcs(("potrf",), (R,))
    U, info = potrf(R, lower=False, clean=True, overwrite_a=False)
    if info < 0:
        raise ContractViolation(f"potrf rejected argument {-info}")
    if info > 0:
        return CholeskyFailure(pivot=int(info))
    if not np.all(np.isfinite(np.diag(U))):
        return CholeskyFailure(pivot=1)
    return U


def householder_qr(X) -> tuple[np.ndarray, np.ndarray]:
    """
    Householder QR（经济型），无条件稳定。

    结果中 R 的对角线为非负实数，从而 Q 唯一确定（满秩时）。

    Returns:
        (Q, R)：Q 为 m×n 列正交矩阵，R 为 n×n 上三角矩阵
    """
    X = as_dense(X)
    m, n = X.shape
    if m < n:
        raise ContractViolation(f"householder_qr needs rows >= cols, got {X.shape}")
    Q, R = scipy.linalg.qr(X, mode="economic", check_finite=False)
    d = np.diag(R)
    magnitude = np.abs(d)
    phase = np.ones_like(d)
    nonzero = magnitude > 0
    phase[nonzero] = d[nonzero] / magnitude[nonzero]
    Q = Q * phase
    R = phase.conj()[:, None] * R
    R[np.diag_indices(n)] = magnitude
    return Q, R


@dataclass(frozen=True)
class EigDecomposition:
    """Hermitian 特征分解结果，values 按升序排列。"""
    values: np.ndarray
    vectors: np.ndarray


def hermitian_eig(H, dense_cap: int = settings.DENSE_CAP) -> EigDecomposition:
    """
    稠密 Hermitian 特征分解。

    Args:
        H: Hermitian 矩阵，阶数不超过 dense_cap
        dense_cap: 允许的最大阶数

    Returns:
        EigDecomposition，特征值升序，特征向量列正交
    """
    H = as_dense(H, "H")
    k = H.shape[0]
    if H.shape[1] != k:
        raise ContractViolation(f"hermitian_eig needs a square matrix, got {H.shape}")
    if k > dense_cap:
        raise ContractViolation(f"order {k} exceeds the dense cap {dense_cap}")
    scale = np.linalg.norm(H, ord="fro")
    asymmetry = np.linalg.norm(H - H.conj().T, ord="fro")
    if asymmetry > 1e-12 * max(scale, np.finfo(float).tiny):
        raise ContractViolation(f"matrix is not Hermitian (‖H − Hᴴ‖ = {asymmetry:.3e})")
    values, vectors = scipy.linalg.eigh((H + H.conj().T) / 2, check_finite=False)
    return EigDecomposition(values=values, vectors=vectors)


@dataclass(frozen=True)
class SvdCond:
    """Jacobi SVD 得到的极值奇异值与 2-范数条件数。"""
    sigma_max: float
    sigma_min: float
    cond2: float
    sweeps: int = 0


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """循环赛顺序：每一轮给出一组互不相交的列对 (p, q)。"""
    players = list(range(n)) + ([-1] if n % 2 else [])
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        pairs = [(players[i], players[size - 1 - i]) for i in range(size // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p >= 0 and q >= 0]
        rounds.append((np.array([p for p, _ in pairs], dtype=int),
                       np.array([q for _, q in pairs], dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_svd_cond(X, tol: Optional[float] = None, max_sweeps: int = 60) -> SvdCond:
    """
    单边 Jacobi SVD 计算 cond₂(X) = σ_max / σ_min，作为条件数的参考值。

    先做 Householder QR 预处理，再对 n×n 的 R 做单边 Jacobi 旋转，
    最终各列的范数即为奇异值。

    Args:
        X: m×n 矩阵 (m >= n >= 1)
        tol: 列对正交的相对阈值，默认 n·u
        max_sweeps: 最大扫描次数

    Returns:
        SvdCond；σ_min 为 0 时 cond2 为 +inf
    """
    X = as_dense(X)
    m, n = X.shape
    if n < 1 or m < n:
        raise ContractViolation(f"jacobi_svd_cond needs rows >= cols >= 1, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ContractViolation("jacobi_svd_cond got non-finite entries")
    if tol is None:
        tol = n * settings.UNIT_ROUNDOFF

    _, W = householder_qr(X)
    W = W.copy()
    schedule = _round_robin(n)
    sweeps = 0
    converged = n == 1
    while not converged and sweeps < max_sweeps:
        sweeps += 1
        rotated = False
        for P, Q in schedule:
            if P.size == 0:
                continue
            a = W[:, P]
            b = W[:, Q]
            alpha = np.sum(np.abs(a) ** 2, axis=0)
            beta = np.sum(np.abs(b) ** 2, axis=0)
            gamma = np.sum(a.conj() * b, axis=0)
            g = np.abs(gamma)
            active = g > tol * np.sqrt(alpha * beta)
            if not active.any():
                continue
            rotated = True
            a, b = a[:, active], b[:, active]
            alpha, beta, gamma, g = alpha[active], beta[active], gamma[active], g[active]
            # 先用相位把 aᴴb 变成正实数，再做实旋转
            b = b * (gamma / g).conj()
            zeta = (beta - alpha) / (2.0 * g)
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            W[:, P[active]] = c * a - s * b
            W[:, Q[active]] = s * a + c * b
        converged = not rotated

    if not converged:
        logger.warning(f"Jacobi SVD did not converge in {max_sweeps} sweeps (n={n})")

    sigma = np.linalg.norm(W, axis=0)
    sigma_max = float(sigma.max())
    sigma_min = float(sigma.min())
    cond2 = float("inf") if sigma_min == 0.0 else sigma_max / sigma_min
    return SvdCond(sigma_max=sigma_max, sigma_min=sigma_min, cond2=cond2, sweeps=sweeps)
