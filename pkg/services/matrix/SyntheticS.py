"""
合成给定谱的 Hermitian 测试矩阵
"""
import math
from typing import Any, Dict, Optional

import numpy as np

from config import settings
from core.errors import ContractViolation
from core.linalg import ScalarKind, householder_qr
from utils.helpers import random_block
from ..base import BaseService
from .spec import GeneratedMatrix, MatrixSpec, SpectrumKind


def clustered_dft_spectrum(n: int, lo: float, hi: float, cluster_frac: float, cluster_size: int,
                           rng: np.random.Generator) -> np.ndarray:
    """
    最低十分之一区间 [lo, lo + (hi−lo)/10) 内放 round(cluster_frac·n) 个成簇的特征值，
    其余特征值严格位于该区间之上，密度随 λ 增大。
    """
    low_count = int(round(cluster_frac * n))
    low_count = min(max(low_count, 1), n - 1)
    decile_top = lo + 0.1 * (hi - lo)

    clusters = math.ceil(low_count / cluster_size)
    centers = np.linspace(lo, decile_top, clusters + 1)[:-1]
    spacing = (decile_top - lo) / clusters
    centers = centers + 0.5 * spacing
    members = np.repeat(centers, cluster_size)[:low_count]
    jitter = rng.uniform(-0.05 * spacing, 0.05 * spacing, size=low_count)
    low = np.clip(members + jitter, lo, np.nextafter(decile_top, lo))

    upper_count = n - low_count
    u = np.arange(1, upper_count + 1) / upper_count
    high = decile_top + (hi - decile_top) * np.sqrt(u)
    return np.sort(np.concatenate([low, high]))


def build_spectrum(spec: MatrixSpec, rng: np.random.Generator) -> np.ndarray:
    """按 MatrixSpec 构造升序的特征值数组。"""
    if spec.spectrum is SpectrumKind.EXPLICIT:
        values = np.asarray(spec.eigenvalues, dtype=float)
        if values.shape != (spec.n,):
            raise ContractViolation(f"explicit spectrum has {values.size} values for n={spec.n}")
        return np.sort(values)
    if spec.spectrum is SpectrumKind.UNIFORM:
        return np.linspace(spec.lo, spec.hi, spec.n)
    return clustered_dft_spectrum(spec.n, spec.lo, spec.hi, spec.cluster_frac, spec.cluster_size, rng)


def gen_matrix(spec: MatrixSpec) -> GeneratedMatrix:
    """
    A = X·diag(λ)·Xᴴ，X 来自随机块的 Householder QR；相同的 spec 与 seed 得到完全相同的 A。

    Args:
        spec: 合成矩阵配置 (n 不超过 DENSE_CAP)

    Returns:
        GeneratedMatrix(matrix, true_spectrum, spec)
    """
    if spec.n > settings.DENSE_CAP:
        raise ContractViolation(f"n={spec.n} exceeds the dense cap {settings.DENSE_CAP}")
    rng = np.random.default_rng(spec.seed)
    spectrum = build_spectrum(spec, rng)
    complex_entries = spec.scalar_kind is ScalarKind.COMPLEX128
    X, _ = householder_qr(random_block(spec.n, spec.n, rng, complex_entries))
    A = (X * spectrum) @ X.conj().T
    A = (A + A.conj().T) / 2
    return GeneratedMatrix(matrix=A, true_spectrum=spectrum, spec=spec)


class SyntheticMatrixService(BaseService):
    """
    生成合成测试矩阵的服务
    """
    def __init__(self, service_name: str = "matrix_synthetic", config: Optional[Dict[str, Any]] = None):
        """
        Args:
            service_name: 服务名称
            config: 配置字典，键与 settings.MATRIX 相同，作为 MatrixSpec 的默认值
        """
        if config is None:
            config = {}
        config = {**settings.MATRIX, **config}
        super().__init__(service_name, config)

    async def initialize(self):
        self.set_ready()
        self.logger.info(f"Service {self.service_name} initialized.")

    async def process(self, spec: Optional[MatrixSpec] = None, **kwargs) -> GeneratedMatrix:
        """
        Args:
            spec: MatrixSpec；缺省时用配置与 kwargs 构造

        Returns:
            GeneratedMatrix
        """
        if not self.is_ready():
            raise RuntimeError(f"Service {self.service_name} not initialized.")
        if spec is None:
            spec = MatrixSpec.from_settings(**{**self.config, **kwargs})
        self.logger.info(f"Generating {spec.label()} (seed={spec.seed})")
        generated = await self.run_blocking(gen_matrix, spec)
        self.logger.debug(f"Spectrum range [{generated.true_spectrum[0]:.6g}, {generated.true_spectrum[-1]:.6g}]")
        return generated
