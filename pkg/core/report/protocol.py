"""
实验报告协议定义（JSON 摘要）
"""
import json
import math
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np


class ReportType(Enum):
    """报告类型枚举"""
    SOLVE_SUMMARY = "solve_summary"      # 单次求解
    COND_TRACE = "cond_trace"            # 条件数估计与精确值的对比
    COMPARE_QR = "compare_qr"            # dynamic 与 householder_only 的对比
    MATRIX = "matrix"                    # gen 子命令生成的矩阵信息
    SUITE = "suite"                      # 内置矩阵集上每个矩阵的结果

    ERROR = "error"                      # 错误信息


def _jsonable(value: Any) -> Any:
    """把 numpy 标量 / 数组、Enum、非有限浮点转换成 JSON 可以表示的值。"""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if hasattr(value, "__fspath__"):
        return str(value)
    return value


def create_report(report_type: ReportType, payload: Optional[Dict[str, Any]] = None) -> str:
    """
    创建标准格式的 JSON 报告。

    Args:
        report_type: 报告类型 (ReportType枚举)。
        payload: 报告内容，通常包含 config 与 per_mode。

    Returns:
        JSON 字符串（键排序，便于 diff）。
    """
    report = {
        "type": report_type.value,
        "payload": _jsonable(payload) if payload is not None else {},
    }
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def parse_report(report_str: str) -> Dict[str, Any]:
    """
    解析 JSON 报告。

    Raises:
        ValueError: 如果内容不是有效的 JSON，或缺少 type 字段。
    """
    try:
        report = json.loads(report_str)
    except json.JSONDecodeError as e:
        raise ValueError(f"Invalid JSON report: {e}")
    if not isinstance(report, dict) or "type" not in report:
        raise ValueError("Report has no 'type' field")
    ReportType(report["type"])
    return report
