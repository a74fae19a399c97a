"""
矩阵来源的描述：合成谱矩阵或 Matrix Market 文件
"""
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config import settings
from core.errors import ContractViolation
from core.linalg import ScalarKind


class MatrixKind(str, Enum):
    PRESCRIBED_SPECTRUM = "prescribed_spectrum"
    MATRIX_MARKET_FILE = "matrix_market_file"


class SpectrumKind(str, Enum):
    UNIFORM = "uniform"
    CLUSTERED_DFT = "clustered_dft"
    EXPLICIT = "explicit"


class MatrixSpec(BaseModel):
    """
    矩阵配置。

    - uniform(lo, hi): 等距谱
    - clustered_dft(lo, hi, cluster_frac): 最低 10% 的区间内集中 cluster_frac·n 个成簇的特征值，
      其余特征值在上方、越往上越密，模仿 DFT 哈密顿量
    - explicit: 直接给出 eigenvalues
    """
    model_config = ConfigDict(frozen=True)

    kind: MatrixKind = MatrixKind.PRESCRIBED_SPECTRUM
    n: int = Field(default=settings.MATRIX["n"], ge=2)
    spectrum: SpectrumKind = SpectrumKind.UNIFORM
    lo: float = settings.MATRIX["lo"]
    hi: float = settings.MATRIX["hi"]
    cluster_frac: float = Field(default=settings.MATRIX["cluster_frac"], gt=0.0, lt=1.0)
    cluster_size: int = Field(default=settings.MATRIX["cluster_size"], ge=1)
    eigenvalues: Optional[tuple[float, ...]] = None
    scalar_kind: ScalarKind = ScalarKind.REAL64
    seed: int = settings.MATRIX["seed"]
    path: Optional[Path] = None

    @model_validator(mode="after")
    def _check(self) -> "MatrixSpec":
        if self.kind is MatrixKind.MATRIX_MARKET_FILE and self.path is None:
            raise ValueError("matrix_market_file needs a path")
        if self.spectrum is SpectrumKind.EXPLICIT and self.eigenvalues is None:
            raise ValueError("explicit spectrum needs eigenvalues")
        if self.spectrum is not SpectrumKind.EXPLICIT and not self.lo < self.hi:
            raise ValueError(f"empty spectrum range [{self.lo}, {self.hi}]")
        return self

    @classmethod
    def from_settings(cls, **overrides) -> "MatrixSpec":
        """以 settings.MATRIX 为默认值构造；值为 None 的覆盖项被忽略。"""
        values = {**settings.MATRIX, **{k: v for k, v in overrides.items() if v is not None}}
        try:
            return cls(**values)
        except ValidationError as e:
            raise ContractViolation(f"invalid matrix specification: {e}") from e

    def label(self) -> str:
        if self.kind is MatrixKind.MATRIX_MARKET_FILE:
            return Path(self.path).stem
        return f"{self.spectrum.value}-{self.n}-{'complex' if self.scalar_kind is ScalarKind.COMPLEX128 else 'real'}"


@dataclass(frozen=True)
class GeneratedMatrix:
    """矩阵及其（已知时的）精确谱"""
    matrix: np.ndarray
    true_spectrum: Optional[np.ndarray]
    spec: MatrixSpec
