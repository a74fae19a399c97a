"""
基于条件数估计的动态 QR 选择：
CholeskyQR1 / CholeskyQR2 / shifted CholeskyQR2，Cholesky 失败时回退到 Householder QR。
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np
from scipy.linalg import solve_triangular

from config import settings
from core.errors import ContractViolation
from core.linalg import CholeskyFailure, as_dense, cholesky, gram, householder_qr

logger = logging.getLogger(__name__)


class QrVariant(str, Enum):
    """实际使用的 QR 方法"""
    CHOLQR1 = "cholqr1"
    CHOLQR2 = "cholqr2"
    SHIFTED_CHOLQR2 = "shifted_cholqr2"
    HOUSEHOLDER_FALLBACK = "householder_fallback"


class QrMode(str, Enum):
    """求解器的 QR 策略"""
    DYNAMIC = "dynamic"
    HOUSEHOLDER_ONLY = "householder_only"
    CHOLQR1 = "cholqr1"
    CHOLQR2 = "cholqr2"
    SHIFTED = "shifted"


@dataclass(frozen=True)
class QrChoice:
    """一次 QR 的选择记录"""
    variant: QrVariant
    est_cond_used: float
    shift_applied: Optional[float] = None
    cholesky_failures: int = 0

    def __post_init__(self):
        has_shift = self.shift_applied is not None
        if has_shift != (self.variant is QrVariant.SHIFTED_CHOLQR2):
            raise ContractViolation("shift_applied must be present exactly for shifted_cholqr2")
        if self.cholesky_failures not in (0, 1):
            raise ContractViolation(f"unexpected failure count {self.cholesky_failures}")


def triangular_right_solve(X: np.ndarray, U: np.ndarray) -> np.ndarray:
    """X·U⁻¹，U 为上三角矩阵。"""
    # (X U⁻¹)ᵀ = U⁻ᵀ Xᵀ
    return solve_triangular(U, X.T, trans="T", lower=False, check_finite=False).T


def cholesky_qr(X, chol_deg: int = 1, rank_guard: bool = False) -> Union[np.ndarray, CholeskyFailure]:
    """
    CholeskyQR：R = XᴴX, R = UᴴU, Q = X·U⁻¹，重复 chol_deg 次。

    只有 Cholesky (potrf) 本身失败才算失败。rank_guard=True 时，主元 U_jj² 不超过
    n·u·max(diag R) 也视为失败；shifted CholeskyQR2 的第二阶段用它识别秩亏的输入。

    Returns:
        Q；任一轮失败时返回 CholeskyFailure (round 为失败轮次)
    """
    if chol_deg < 1:
        raise ContractViolation(f"chol_deg must be >= 1, got {chol_deg}")
    Q = as_dense(X)
    n = Q.shape[1]
    for r in range(1, chol_deg + 1):
        R = gram(Q)
        U = cholesky(R)
        if isinstance(U, CholeskyFailure):
            return CholeskyFailure(pivot=U.pivot, round=r)
        if rank_guard and n:
            pivots = np.abs(np.diag(U)) ** 2
            floor = n * settings.UNIT_ROUNDOFF * float(np.max(np.real(np.diag(R))))
            if pivots.min() <= floor:
                return CholeskyFailure(pivot=int(np.argmin(pivots)) + 1, round=r)
        Q = triangular_right_solve(Q, U)
    return Q


def shift_for(X: np.ndarray, shift_norm: str = settings.QR["shift_norm"]) -> float:
    """s = 11·(mn + n(n+1))·u·‖X‖，‖X‖ 默认取 Frobenius 范数。"""
    m, n = X.shape
    norm = float(np.linalg.norm(X, ord="fro"))
    if shift_norm == "frobenius_squared":
        norm = norm * norm
    elif shift_norm != "frobenius":
        raise ContractViolation(f"unknown shift norm {shift_norm!r}")
    return 11.0 * (m * n + n * (n + 1)) * settings.UNIT_ROUNDOFF * norm


def _householder(X: np.ndarray, est_cond: float, failures: int) -> tuple[np.ndarray, QrChoice]:
    Q, _ = householder_qr(X)
    return Q, QrChoice(variant=QrVariant.HOUSEHOLDER_FALLBACK, est_cond_used=est_cond,
                       cholesky_failures=failures)


def shifted_cholesky_qr2(X, est_cond: float = math.inf,
                         shift_norm: str = settings.QR["shift_norm"]) -> tuple[np.ndarray, QrChoice]:
    """
    shifted CholeskyQR2：先对 R + sI 做 Cholesky，得到 X·R⁻¹，再做两轮 CholeskyQR。

    任一 Cholesky 失败都回退到 Householder。
    """
    X = as_dense(X)
    n = X.shape[1]
    shift = shift_for(X, shift_norm)
    R = gram(X)
    R[np.diag_indices(n)] += shift
    U = cholesky(R)
    if isinstance(U, CholeskyFailure):
        logger.warning(f"Shifted Cholesky failed at pivot {U.pivot} (shift={shift:.3e}); falling back to Householder")
        return _householder(X, est_cond, failures=1)
    Q = cholesky_qr(triangular_right_solve(X, U), chol_deg=2, rank_guard=True)
    if isinstance(Q, CholeskyFailure):
        logger.warning(f"CholeskyQR2 after shift failed in round {Q.round}; falling back to Householder")
        return _householder(X, est_cond, failures=1)
    return Q, QrChoice(variant=QrVariant.SHIFTED_CHOLQR2, est_cond_used=est_cond, shift_applied=shift)


def _plain(X: np.ndarray, est_cond: float, variant: QrVariant) -> tuple[np.ndarray, QrChoice]:
    chol_deg = 1 if variant is QrVariant.CHOLQR1 else 2
    Q = cholesky_qr(X, chol_deg=chol_deg)
    if isinstance(Q, CholeskyFailure):
        logger.warning(f"{variant.value} failed at pivot {Q.pivot} in round {Q.round} "
                       f"(estCond={est_cond:.3e}); falling back to Householder")
        return _householder(X, est_cond, failures=1)
    return Q, QrChoice(variant=variant, est_cond_used=est_cond)


def _normalize_cond(est_cond: float) -> float:
    if math.isnan(est_cond):
        return math.inf
    if est_cond < 1.0:
        raise ContractViolation(f"condition estimate must be >= 1, got {est_cond}")
    return float(est_cond)


def dynamic_caqr(X, est_cond: float,
                 shifted_threshold: float = settings.QR["shifted_threshold"],
                 cholqr1_threshold: float = settings.QR["cholqr1_threshold"],
                 shift_norm: str = settings.QR["shift_norm"]) -> tuple[np.ndarray, QrChoice]:
    """
    按条件数估计选择 QR：

    - estCond > shifted_threshold: shifted CholeskyQR2
    - estCond < cholqr1_threshold: CholeskyQR1
    - 其余: CholeskyQR2
    """
    X = as_dense(X)
    if X.shape[0] < X.shape[1]:
        raise ContractViolation(f"QR needs rows >= cols, got {X.shape}")
    est_cond = _normalize_cond(est_cond)
    if est_cond > shifted_threshold:
        return shifted_cholesky_qr2(X, est_cond, shift_norm)
    if est_cond < cholqr1_threshold:
        return _plain(X, est_cond, QrVariant.CHOLQR1)
    return _plain(X, est_cond, QrVariant.CHOLQR2)


def orthonormalize(X, est_cond: float, mode: QrMode = QrMode.DYNAMIC,
                   shifted_threshold: float = settings.QR["shifted_threshold"],
                   cholqr1_threshold: float = settings.QR["cholqr1_threshold"],
                   shift_norm: str = settings.QR["shift_norm"]) -> tuple[np.ndarray, QrChoice]:
    """按求解器的 QrMode 分派；非 dynamic 模式固定使用同一种方法。"""
    X = as_dense(X)
    est_cond = _normalize_cond(est_cond)
    mode = QrMode(mode)
    if mode is QrMode.DYNAMIC:
        return dynamic_caqr(X, est_cond, shifted_threshold, cholqr1_threshold, shift_norm)
    if mode is QrMode.HOUSEHOLDER_ONLY:
        return _householder(X, est_cond, failures=0)
    if mode is QrMode.SHIFTED:
        return shifted_cholesky_qr2(X, est_cond, shift_norm)
    return _plain(X, est_cond, QrVariant.CHOLQR1 if mode is QrMode.CHOLQR1 else QrVariant.CHOLQR2)
