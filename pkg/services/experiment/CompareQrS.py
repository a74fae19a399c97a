"""
QR 对比实验：同一矩阵、同一种子分别以 dynamic 与 householder_only 求解
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from config import settings
from core.chase import QrMode, QrVariant, SolveResult, SolverConfig, solve
from core.errors import EquivalenceViolation
from core.linalg import HermitianOperator
from core.report import ReportType, create_report, write_report, write_trace_csv
from services.matrix import GeneratedMatrix
from ..base import BaseService
from .SolveS import mode_summary

COMPARED_MODES = (QrMode.DYNAMIC, QrMode.HOUSEHOLDER_ONLY)


def compare_results(dynamic: SolveResult, householder: SolveResult, norm_estimate: float,
                    cholqr1_threshold: float = settings.QR["cholqr1_threshold"],
                    rel_tol: float = 1e-9, max_iteration_delta: int = 1,
                    max_matvec_rel_diff: float = 0.01) -> Dict[str, Any]:
    """
    两次求解的一致性指标。

    Returns:
        agreement 字典；eigenvalues_agree 或 convergence_agrees 为 False 时调用方应报告不一致
    """
    tolerance = rel_tol * max(norm_estimate, 1.0)
    same_length = dynamic.eigenvalues.shape == householder.eigenvalues.shape
    max_diff = float(np.max(np.abs(dynamic.eigenvalues - householder.eigenvalues))) if same_length else float("inf")
    matvec_base = max(householder.matvecs, 1)
    iteration_delta = dynamic.iterations - householder.iterations
    matvec_rel_diff = abs(dynamic.matvecs - householder.matvecs) / matvec_base
    cholqr1_ok = all(trace.cond_est < cholqr1_threshold for trace in dynamic.traces
                     if trace.qr_variant is QrVariant.CHOLQR1)
    return {
        "max_abs_diff": max_diff,
        "tolerance": tolerance,
        "eigenvalues_agree": bool(same_length and max_diff <= tolerance
                                  and dynamic.converged and householder.converged),
        "iteration_delta": iteration_delta,
        "matvec_rel_diff": matvec_rel_diff,
        "convergence_agrees": bool(abs(iteration_delta) <= max_iteration_delta
                                   and matvec_rel_diff <= max_matvec_rel_diff),
        "qr_speedup": householder.qr_seconds / dynamic.qr_seconds if dynamic.qr_seconds > 0 else None,
        "cholqr1_only_below_threshold": cholqr1_ok,
    }


def run_compare_qr(generated: GeneratedMatrix, solver_config: SolverConfig) -> tuple[Dict[str, SolveResult], Dict[str, Any]]:
    """以相同配置、不同 qr_mode 求解两次并比较。"""
    results = {}
    for mode in COMPARED_MODES:
        config = solver_config.model_copy(update={"qr_mode": mode})
        results[mode.value] = solve(generated.matrix, config)
    norm_estimate = HermitianOperator(generated.matrix).norm_estimate()
    agreement = compare_results(results[QrMode.DYNAMIC.value], results[QrMode.HOUSEHOLDER_ONLY.value],
                                norm_estimate, solver_config.cholqr1_threshold)
    return results, agreement


@dataclass
class CompareQrOutcome:
    results: Dict[str, SolveResult]
    agreement: Dict[str, Any]
    report: str
    paths: Dict[str, Path] = field(default_factory=dict)


class CompareQrService(BaseService):
    """
    dynamic 与 householder_only 的对比实验服务
    """
    def __init__(self, service_name: str = "experiment_compare_qr", config: Optional[Dict[str, Any]] = None):
        if config is None:
            config = {}
        config = {**settings.HARNESS, **config}
        super().__init__(service_name, config)

    async def initialize(self):
        self.set_ready()
        self.logger.info(f"Service {self.service_name} initialized.")

    async def process(self, generated: GeneratedMatrix, solver_config: Optional[SolverConfig] = None,
                      out_dir: Optional[Path] = None, **kwargs) -> CompareQrOutcome:
        """
        Args:
            generated: 输入矩阵
            solver_config: 求解器配置（qr_mode 会被覆盖）
            out_dir: 输出目录；写出 trace_dynamic.csv、trace_householder_only.csv 与 compare_qr.json

        Raises:
            EquivalenceViolation: 两次求解锁定的特征值不一致，或迭代次数相差超过 1、matvec 相差超过 1%（文件已写出）
        """
        if not self.is_ready():
            raise RuntimeError(f"Service {self.service_name} not initialized.")
        if solver_config is None:
            solver_config = SolverConfig.from_settings()

        label = generated.spec.label()
        self.logger.info(f"Comparing QR modes on {label}")
        results, agreement = await self.run_blocking(run_compare_qr, generated, solver_config)

        payload = {
            "config": solver_config.model_dump(mode="json"),
            "matrix": generated.spec.model_dump(mode="json"),
            "per_mode": {mode: mode_summary(result) for mode, result in results.items()},
            "agreement": agreement,
        }
        report = create_report(ReportType.COMPARE_QR, payload)
        outcome = CompareQrOutcome(results=results, agreement=agreement, report=report)
        if out_dir is not None:
            out_dir = Path(out_dir)
            for mode, result in results.items():
                outcome.paths[mode] = write_trace_csv(out_dir / f"trace_{mode}.csv", result.traces,
                                                      self.config["csv_precision"])
            outcome.paths["summary"] = write_report(out_dir / "compare_qr.json", report)

        self.logger.info(f"{label}: iterations delta={agreement['iteration_delta']}, "
                         f"matvec diff={agreement['matvec_rel_diff']:.2%}, max |dλ|={agreement['max_abs_diff']:.3e}")
        if not agreement["eigenvalues_agree"]:
            self.logger.error(f"{label}: locked eigenvalues differ (max |dλ|={agreement['max_abs_diff']:.3e}, "
                              f"tolerance {agreement['tolerance']:.3e})")
            raise EquivalenceViolation(f"dynamic and householder_only runs disagree on {label}")
        if not agreement["convergence_agrees"]:
            self.logger.error(f"{label}: convergence differs between QR modes (iterations delta="
                              f"{agreement['iteration_delta']}, matvec diff={agreement['matvec_rel_diff']:.2%})")
            raise EquivalenceViolation(f"dynamic and householder_only runs converge differently on {label}")
        return outcome
