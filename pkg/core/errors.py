"""
异常类型与退出码定义
"""
from enum import IntEnum
from typing import Optional


class ExitCode(IntEnum):
    """命令行退出码"""
    OK = 0
    UNEXPECTED = 1
    VIOLATION = 2        # 条件数上界被突破，或两种 QR 模式结果不一致
    PARSE_ERROR = 3
    NOT_CONVERGED = 4


class ChaseError(Exception):
    """所有领域异常的基类。"""
    exit_code = ExitCode.UNEXPECTED


class ContractViolation(ChaseError, ValueError):
    """调用方违反了操作的前置条件。"""


class MatrixMarketParseError(ChaseError):
    """Matrix Market 文件格式错误，带行号。"""
    exit_code = ExitCode.PARSE_ERROR

    def __init__(self, message: str, line_no: Optional[int] = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class DominanceViolation(ChaseError):
    """估计的条件数小于精确条件数。"""
    exit_code = ExitCode.VIOLATION


class EquivalenceViolation(ChaseError):
    """dynamic 与 householder_only 两次求解锁定的特征值不一致。"""
    exit_code = ExitCode.VIOLATION


class NonConvergence(ChaseError):
    """求解在最大迭代次数内没有收敛。"""
    exit_code = ExitCode.NOT_CONVERGED
