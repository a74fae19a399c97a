"""
Hermitian 算子：把稠密矩阵、稀疏矩阵或 LinearOperator 统一为作用在向量块上的黑盒。
"""
import logging
from typing import Optional

import numpy as np
import scipy.sparse
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from core.errors import ContractViolation
from core.linalg.dense import ScalarKind, as_dense, scalar_kind

logger = logging.getLogger(__name__)


class HermitianOperator:
    """
    A 的只读包装。

    - apply(V) 返回 A·V，并累计被作用的列数 (matvec 计数)
    - dense 属性在输入为稠密矩阵时给出底层数组，否则为 None
    """

    def __init__(self, matrix, name: str = "A"):
        self.name = name
        self.dense: Optional[np.ndarray] = None
        if isinstance(matrix, np.ndarray):
            self.dense = as_dense(matrix, name)
            self._linop = aslinearoperator(self.dense)
        elif scipy.sparse.issparse(matrix):
            if matrix.dtype not in (np.float64, np.complex128):
                matrix = matrix.astype(np.complex128 if np.iscomplexobj(matrix.data) else np.float64)
            self._linop = aslinearoperator(matrix)
        elif isinstance(matrix, LinearOperator):
            self._linop = matrix
        else:
            raise ContractViolation(f"cannot wrap {type(matrix).__name__} as an operator")

        rows, cols = self._linop.shape
        if rows != cols:
            raise ContractViolation(f"{name} must be square, got {self._linop.shape}")
        self.n = rows
        self.dtype = np.dtype(self._linop.dtype)
        self.applied_columns = 0

    @property
    def kind(self) -> ScalarKind:
        return ScalarKind.COMPLEX128 if np.issubdtype(self.dtype, np.complexfloating) else ScalarKind.REAL64

    def apply(self, block: np.ndarray) -> np.ndarray:
        """A·V，V 为 n×k 块。"""
        if block.ndim != 2 or block.shape[0] != self.n:
            raise ContractViolation(f"block shape {block.shape} does not match operator order {self.n}")
        if self.kind is ScalarKind.REAL64 and scalar_kind(block) is ScalarKind.COMPLEX128:
            raise ContractViolation("complex block applied to a real operator")
        self.applied_columns += block.shape[1]
        if self.dense is not None:
            return self.dense @ block
        return np.asarray(self._linop.matmat(block))

    def check_hermitian(self, samples: int = 4, seed: int = 0, tol: float = 1e-12) -> bool:
        """
        随机探测 xᴴ(Ay) 与 (Ax)ᴴy 是否一致。

        稠密矩阵直接比较 A 与 Aᴴ。
        """
        if self.dense is not None:
            scale = np.linalg.norm(self.dense, ord="fro")
            gap = np.linalg.norm(self.dense - self.dense.conj().T, ord="fro")
            return bool(gap <= tol * max(scale, np.finfo(float).tiny))
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((self.n, samples))
        Y = rng.standard_normal((self.n, samples))
        AX = np.asarray(self._linop.matmat(X))
        AY = np.asarray(self._linop.matmat(Y))
        lhs = X.T @ AY
        rhs = AX.conj().T @ Y
        scale = np.linalg.norm(AX) * np.linalg.norm(Y)
        return bool(np.linalg.norm(lhs - rhs) <= tol * max(scale, np.finfo(float).tiny) * self.n)

    def norm_estimate(self, steps: int = 20, seed: int = 0) -> float:
        """
        ‖A‖₂ 的估计：稠密矩阵取 ∞-范数（Hermitian 时是上界），否则做几步幂迭代。
        """
        if self.dense is not None:
            return float(np.linalg.norm(self.dense, ord=np.inf))
        rng = np.random.default_rng(seed)
        v = rng.standard_normal((self.n, 1))
        estimate = 0.0
        for _ in range(steps):
            v = v / np.linalg.norm(v)
            w = np.asarray(self._linop.matmat(v))
            estimate = float(np.linalg.norm(w))
            if estimate == 0.0:
                break
            v = w
        return estimate

    def reset_count(self) -> None:
        self.applied_columns = 0

    def __repr__(self) -> str:
        storage = "dense" if self.dense is not None else "operator"
        return f"HermitianOperator(name={self.name!r}, n={self.n}, dtype={self.dtype}, {storage})"
