"""
单次求解实验：运行求解器并写出 trace.csv 与 summary.json
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

from config import settings
from core.chase import SolveResult, SolverConfig, solve
from core.errors import NonConvergence
from core.report import ReportType, create_report, write_report, write_trace_csv
from services.matrix import GeneratedMatrix
from utils.helpers import spectrum_hash
from ..base import BaseService


def mode_summary(result: SolveResult) -> Dict[str, Any]:
    """一次求解在 JSON 报告中的条目（对应 per_mode 的一项）。"""
    return {
        "iterations": result.iterations,
        "matvecs": result.matvecs,
        "wall_s": result.wall_seconds,
        "qr_s": result.qr_seconds,
        "eigenvalues_hash": spectrum_hash(result.eigenvalues),
        "converged": result.converged,
        "verified": result.verified,
        "locked": result.locked,
        "max_residual": float(result.final_residuals.max()) if result.final_residuals.size else None,
        "qr_variants": result.qr_variants,
        "regimes": [trace.regime.value for trace in result.traces],
    }


@dataclass
class SolveOutcome:
    result: SolveResult
    report: str
    paths: Dict[str, Path] = field(default_factory=dict)


class SolveService(BaseService):
    """
    运行一次求解的服务
    """
    def __init__(self, service_name: str = "experiment_solve", config: Optional[Dict[str, Any]] = None):
        if config is None:
            config = {}
        config = {**settings.HARNESS, **config}
        super().__init__(service_name, config)

    async def initialize(self):
        self.set_ready()
        self.logger.info(f"Service {self.service_name} initialized.")

    async def process(self, generated: GeneratedMatrix, solver_config: Optional[SolverConfig] = None,
                      out_dir: Optional[Path] = None, **kwargs) -> SolveOutcome:
        """
        Args:
            generated: 输入矩阵
            solver_config: 求解器配置，缺省时由 settings 构造
            out_dir: 输出目录；None 时不写文件

        Returns:
            SolveOutcome

        Raises:
            NonConvergence: 达到最大迭代次数仍未收敛（文件已写出）
        """
        if not self.is_ready():
            raise RuntimeError(f"Service {self.service_name} not initialized.")
        if solver_config is None:
            solver_config = SolverConfig.from_settings()

        self.logger.info(f"Solving {generated.spec.label()} with nev={solver_config.nev}, nex={solver_config.nex}")
        result = await self.run_blocking(solve, generated.matrix, solver_config)

        per_mode = {solver_config.qr_mode.value: mode_summary(result)}
        payload = {
            "config": solver_config.model_dump(mode="json"),
            "matrix": generated.spec.model_dump(mode="json"),
            "per_mode": per_mode,
            "eigenvalues": result.eigenvalues,
        }
        if generated.true_spectrum is not None:
            exact = generated.true_spectrum[:solver_config.nev]
            payload["max_eigenvalue_error"] = float(abs(result.eigenvalues - exact).max())
        report = create_report(ReportType.SOLVE_SUMMARY, payload)

        outcome = SolveOutcome(result=result, report=report)
        if out_dir is not None:
            out_dir = Path(out_dir)
            outcome.paths["trace"] = write_trace_csv(out_dir / "trace.csv", result.traces,
                                                     self.config["csv_precision"])
            outcome.paths["summary"] = write_report(out_dir / "summary.json", report)

        self.logger.info(f"Solve finished: converged={result.converged}, iterations={result.iterations}, "
                         f"matvecs={result.matvecs}, wall={result.wall_seconds:.2f}s, qr={result.qr_seconds:.2f}s")
        if not result.converged:
            raise NonConvergence(f"{result.locked}/{solver_config.nev} pairs locked after {result.iterations} iterations")
        return outcome
