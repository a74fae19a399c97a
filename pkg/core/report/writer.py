"""
IterationTrace 的 CSV 读写与报告文件输出。

CSV：UTF-8，LF 换行，浮点保留 17 位有效数字，缺失值写空串。
"""
import csv
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Union

from config import settings
from core.chase import IterationTrace
from utils.helpers import format_float

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("iter", "locked", "deg_min", "deg_max", "cond_est", "cond_exact",
                 "qr_variant", "shift", "res_max", "res_min", "matvecs")

_INT_COLUMNS = {"iter", "locked", "deg_min", "deg_max", "matvecs"}


def trace_row(trace: IterationTrace, precision: int = settings.HARNESS["csv_precision"]) -> List[str]:
    return [
        str(trace.iter),
        str(trace.locked),
        str(trace.deg_min),
        str(trace.deg_max),
        format_float(trace.cond_est, precision),
        format_float(trace.cond_exact, precision),
        trace.qr_variant.value,
        format_float(trace.shift, precision),
        format_float(trace.res_max, precision),
        format_float(trace.res_min, precision),
        str(trace.matvecs),
    ]


def write_trace_csv(path: Union[str, Path], traces: Iterable[IterationTrace],
                    precision: int = settings.HARNESS["csv_precision"]) -> Path:
    """写出迭代记录；即使没有记录也会写表头。"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        count = 0
        for trace in traces:
            writer.writerow(trace_row(trace, precision))
            count += 1
    logger.info(f"Wrote {count} trace rows to {path}")
    return path


def read_trace_csv(path: Union[str, Path]) -> List[Dict[str, Any]]:
    """
    读回 CSV；整数列转换为 int，空串转换为 None，其余浮点列转换为 float，qr_variant 保持字符串。
    """
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace columns in {path}: {reader.fieldnames}")
        for raw in reader:
            row: Dict[str, Any] = {}
            for column in TRACE_COLUMNS:
                text = raw[column]
                if column == "qr_variant":
                    row[column] = text
                elif text == "":
                    row[column] = None
                elif column in _INT_COLUMNS:
                    row[column] = int(text)
                else:
                    row[column] = float(text)
            rows.append(row)
    return rows


def write_report(path: Union[str, Path], report_str: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(report_str)
    logger.info(f"Wrote report to {path}")
    return path
