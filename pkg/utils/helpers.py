"""
辅助函数：给定奇异值的测试矩阵、正交性误差、浮点格式化
"""
import hashlib
import math
from typing import Iterable, Optional, Sequence

import numpy as np


def random_block(rows: int, cols: int, rng: np.random.Generator, complex_entries: bool = False) -> np.ndarray:
    """生成标准正态分布的随机块（复数时实部虚部各自独立）。"""
    block = rng.standard_normal((rows, cols))
    if complex_entries:
        block = block + 1j * rng.standard_normal((rows, cols))
    return block


def prescribed_svd_block(rows: int, cols: int, cond: Optional[float] = None,
                         singular_values: Optional[Sequence[float]] = None,
                         seed: int = 0, complex_entries: bool = False) -> np.ndarray:
    """
    构造 X = U·diag(s)·Vᴴ，奇异值 s 由调用方指定。

    Args:
        rows, cols: 矩阵尺寸 (rows >= cols)
        cond: 条件数；给出时 s 在 [1/cond, 1] 上按对数等距分布
        singular_values: 直接指定的奇异值（优先于 cond）
        seed: 随机种子
        complex_entries: 是否生成复矩阵

    Returns:
        rows×cols 的矩阵
    """
    # 局部导入，避免 core.linalg 与 utils 的循环依赖
    from core.linalg.dense import householder_qr

    if singular_values is None:
        if cond is None:
            raise ValueError("either cond or singular_values must be given")
        singular_values = np.logspace(0.0, -math.log10(cond), cols)
    s = np.asarray(singular_values, dtype=float)
    if s.shape != (cols,):
        raise ValueError(f"expected {cols} singular values, got {s.shape}")
    rng = np.random.default_rng(seed)
    U, _ = householder_qr(random_block(rows, cols, rng, complex_entries))
    V, _ = householder_qr(random_block(cols, cols, rng, complex_entries))
    return (U * s) @ V.conj().T


def orthogonality_error(Q: np.ndarray) -> float:
    """‖QᴴQ − I‖_F"""
    k = Q.shape[1]
    return float(np.linalg.norm(Q.conj().T @ Q - np.eye(k), ord="fro"))


def format_float(value: Optional[float], precision: int = 17) -> str:
    """CSV 使用的浮点格式；None 输出空串。"""
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{precision}g}"


def spectrum_hash(values: Iterable[float], digits: int = 9) -> str:
    """特征值集合的摘要，用于 JSON 报告中比较两次求解。"""
    text = ",".join(f"{float(v):.{digits}e}" for v in values)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
