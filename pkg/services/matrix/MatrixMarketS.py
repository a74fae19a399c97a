"""
Matrix Market 文件的读写
"""
from pathlib import Path
from typing import Any, Dict, Optional, Union
import logging

import numpy as np
import scipy.io
import scipy.sparse

from core.errors import ContractViolation, MatrixMarketParseError
from core.linalg import as_dense
from ..base import BaseService
from .spec import GeneratedMatrix, MatrixKind, MatrixSpec

logger = logging.getLogger(__name__)

_FORMATS = {"array", "coordinate"}
_FIELDS = {"real", "double", "integer", "complex"}
_SYMMETRIES = {"general", "symmetric", "hermitian", "skew-symmetric"}


def _check_header(path: Path) -> tuple[str, str, str]:
    """
    检查横幅行与尺寸行，出错时报告行号。

    Returns:
        (format, field, symmetry)
    """
    with open(path, "r", encoding="utf-8", errors="replace") as f:
        banner = f.readline()
        tokens = banner.strip().lower().split()
        if len(tokens) != 5 or tokens[0] != "%%matrixmarket":
            raise MatrixMarketParseError(f"bad banner {banner.strip()!r}", line_no=1)
        _, obj, fmt, field, symmetry = tokens
        if obj != "matrix":
            raise MatrixMarketParseError(f"unsupported object {obj!r}", line_no=1)
        if fmt not in _FORMATS:
            raise MatrixMarketParseError(f"unsupported format {fmt!r}", line_no=1)
        if field not in _FIELDS:
            raise MatrixMarketParseError(f"unsupported field {field!r}", line_no=1)
        if symmetry not in _SYMMETRIES:
            raise MatrixMarketParseError(f"unsupported symmetry {symmetry!r}", line_no=1)

        line_no = 1
        for line in f:
            line_no += 1
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            parts = stripped.split()
            expected = 3 if fmt == "coordinate" else 2
            if len(parts) != expected:
                raise MatrixMarketParseError(f"size line needs {expected} integers, got {stripped!r}", line_no)
            try:
                sizes = [int(p) for p in parts]
            except ValueError:
                raise MatrixMarketParseError(f"non-integer size line {stripped!r}", line_no)
            if sizes[0] != sizes[1] or sizes[0] < 1:
                raise MatrixMarketParseError(f"matrix must be square and non-empty, got {sizes[0]}x{sizes[1]}",
                                             line_no)
            if fmt == "coordinate" and sizes[2] < 0:
                raise MatrixMarketParseError(f"negative entry count {sizes[2]}", line_no)
            return fmt, field, symmetry
    raise MatrixMarketParseError("missing size line", line_no)


def read_matrix_market(path: Union[str, Path]) -> np.ndarray:
    """
    读取 Matrix Market 文件（array 或 coordinate；general / symmetric / hermitian），
    按对称性展开并转为稠密矩阵。

    Raises:
        MatrixMarketParseError: 文件头或尺寸不合法（带行号），或数据部分无法解析
    """
    path = Path(path)
    if not path.is_file():
        raise MatrixMarketParseError(f"no such file: {path}")
    fmt, field, symmetry = _check_header(path)
    try:
        matrix = scipy.io.mmread(path)
    except (ValueError, IndexError, TypeError, OverflowError, RuntimeError) as e:
        raise MatrixMarketParseError(f"cannot parse {path.name}: {e}") from e
    if scipy.sparse.issparse(matrix):
        matrix = matrix.toarray()
    matrix = np.asarray(matrix)
    matrix = matrix.astype(np.complex128 if field == "complex" else np.float64)

    scale = np.linalg.norm(matrix, ord="fro")
    gap = np.linalg.norm(matrix - matrix.conj().T, ord="fro")
    if gap > 1e-12 * max(scale, np.finfo(float).tiny):
        logger.warning(f"{path.name} is not Hermitian (‖A − Aᴴ‖_F = {gap:.3e}, ‖A‖_F = {scale:.3e})")
    logger.info(f"Read {matrix.shape[0]}x{matrix.shape[1]} {field} {symmetry} matrix ({fmt}) from {path}")
    return matrix


def write_matrix_market(path: Union[str, Path], A, comment: str = "", coordinate: bool = False,
                        precision: int = 17) -> Path:
    """
    写出 Matrix Market 文件；Hermitian 输入只存下三角 (symmetric / hermitian)。

    Args:
        path: 输出路径
        A: 方阵
        comment: 写在头部的注释
        coordinate: True 时用 coordinate 格式，否则 array 格式
        precision: 有效数字位数
    """
    A = as_dense(A, "A")
    if A.shape[0] != A.shape[1]:
        raise ContractViolation(f"matrix must be square, got {A.shape}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    is_complex = np.iscomplexobj(A)
    if np.array_equal(A, A.conj().T):
        symmetry = "hermitian" if is_complex else "symmetric"
    else:
        symmetry = "general"
    target = scipy.sparse.coo_matrix(A) if coordinate else A
    scipy.io.mmwrite(path, target, comment=comment, field="complex" if is_complex else "real",
                     precision=precision, symmetry=symmetry)
    written = path if path.suffix == ".mtx" else path.with_name(path.name + ".mtx")
    logger.info(f"Wrote {A.shape[0]}x{A.shape[1]} {symmetry} matrix to {written}")
    return written


class MatrixMarketService(BaseService):
    """
    从 Matrix Market 文件加载矩阵的服务
    """
    def __init__(self, service_name: str = "matrix_market", config: Optional[Dict[str, Any]] = None):
        config_default = {
            "precision": 17,
            "coordinate": True,
        }
        if config is None:
            config = {}
        config = {**config_default, **config}
        super().__init__(service_name, config)

    async def initialize(self):
        self.set_ready()
        self.logger.info(f"Service {self.service_name} initialized.")

    async def process(self, spec: MatrixSpec, **kwargs) -> GeneratedMatrix:
        """
        Args:
            spec: kind 为 matrix_market_file 的 MatrixSpec

        Returns:
            GeneratedMatrix（true_spectrum 为 None）
        """
        if not self.is_ready():
            raise RuntimeError(f"Service {self.service_name} not initialized.")
        if spec.kind is not MatrixKind.MATRIX_MARKET_FILE:
            raise ContractViolation(f"{self.service_name} only reads Matrix Market files")
        matrix = await self.run_blocking(read_matrix_market, spec.path)
        return GeneratedMatrix(matrix=matrix, true_spectrum=None, spec=spec)

    async def save(self, path: Union[str, Path], generated: GeneratedMatrix) -> Path:
        """把（合成的）矩阵写成 Matrix Market 文件。"""
        comment = f"{generated.spec.label()} seed={generated.spec.seed}"
        return await self.run_blocking(write_matrix_market, path, generated.matrix, comment,
                                       self.config["coordinate"], self.config["precision"])
