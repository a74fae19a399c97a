"""
条件数轨迹实验：每次 QR 前用 Jacobi SVD 计算精确条件数，与估计值比较
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from config import settings
from core.chase import IterationTrace, SolveResult, SolverConfig, solve
from core.errors import ContractViolation, DominanceViolation
from core.linalg import jacobi_svd_cond
from core.report import ReportType, create_report, write_report, write_trace_csv
from services.matrix import GeneratedMatrix
from ..base import BaseService
from .SolveS import mode_summary


def mode_name(solver_config: SolverConfig) -> str:
    return "opt" if solver_config.degree_opt else "no-opt"


def exact_cond_hook(iteration: int, block) -> float:
    """QR 之前的回调：返回待分解块的 cond₂。"""
    return jacobi_svd_cond(block).cond2


@dataclass
class CondTraceOutcome:
    results: Dict[str, SolveResult]
    violations: List[Dict[str, Any]]
    report: str
    paths: Dict[str, Path] = field(default_factory=dict)

    @property
    def traces(self) -> Dict[str, List[IterationTrace]]:
        return {mode: result.traces for mode, result in self.results.items()}


def run_cond_trace(generated: GeneratedMatrix, solver_config: SolverConfig, with_exact: bool = True,
                   both_modes: bool = False,
                   oracle_budget: int = settings.HARNESS["oracle_budget"]) -> tuple[Dict[str, SolveResult], List[Dict[str, Any]]]:
    """
    运行求解并记录每次迭代的估计与精确条件数。

    Args:
        generated: 输入矩阵
        solver_config: 求解器配置；both_modes 时分别以 degree_opt=True/False 运行
        with_exact: 是否计算精确条件数（要求 n·ℓ 不超过 oracle_budget）
        both_modes: 是否同时运行 opt 与 no-opt

    Returns:
        (各模式的 SolveResult, 违反上界的记录列表)
    """
    n = generated.matrix.shape[0]
    if with_exact and n * solver_config.ell > oracle_budget:
        raise ContractViolation(f"n·ℓ = {n * solver_config.ell} exceeds the oracle budget {oracle_budget}")
    configs = [solver_config]
    if both_modes:
        configs = [solver_config.model_copy(update={"degree_opt": flag}) for flag in (True, False)]

    results: Dict[str, SolveResult] = {}
    violations: List[Dict[str, Any]] = []
    for config in configs:
        mode = mode_name(config)
        result = solve(generated.matrix, config, on_pre_qr=exact_cond_hook if with_exact else None)
        results[mode] = result
        for trace in result.traces:
            if not trace.dominated:
                violations.append({"mode": mode, "iter": trace.iter, "cond_est": trace.cond_est,
                                   "cond_exact": trace.cond_exact})
    return results, violations


class CondTraceService(BaseService):
    """
    条件数轨迹实验服务
    """
    def __init__(self, service_name: str = "experiment_cond_trace", config: Optional[Dict[str, Any]] = None):
        if config is None:
            config = {}
        config = {**settings.HARNESS, **config}
        super().__init__(service_name, config)

    async def initialize(self):
        self.set_ready()
        self.logger.info(f"Service {self.service_name} initialized.")

    async def process(self, generated: GeneratedMatrix, solver_config: Optional[SolverConfig] = None,
                      out_dir: Optional[Path] = None, with_exact: bool = True, both_modes: bool = False,
                      **kwargs) -> CondTraceOutcome:
        """
        Args:
            generated: 输入矩阵
            solver_config: 求解器配置
            out_dir: 输出目录，每个模式写一个 trace_<mode>.csv；None 时不写文件
            with_exact: 是否计算精确条件数
            both_modes: 是否同时运行 opt 与 no-opt

        Raises:
            DominanceViolation: 任一迭代 cond_est < cond_exact（文件已写出）
        """
        if not self.is_ready():
            raise RuntimeError(f"Service {self.service_name} not initialized.")
        if solver_config is None:
            solver_config = SolverConfig.from_settings()

        label = generated.spec.label()
        self.logger.info(f"Running cond trace on {label} (exact={with_exact}, both_modes={both_modes})")
        results, violations = await self.run_blocking(run_cond_trace, generated, solver_config, with_exact,
                                                      both_modes, self.config["oracle_budget"])

        payload = {
            "config": solver_config.model_dump(mode="json"),
            "matrix": generated.spec.model_dump(mode="json"),
            "per_mode": {mode: mode_summary(result) for mode, result in results.items()},
            "max_ratio": {mode: max((t.cond_est / t.cond_exact for t in result.traces
                                     if t.cond_exact not in (None, 0.0)), default=None)
                          for mode, result in results.items()},
            "violations": violations,
        }
        report = create_report(ReportType.COND_TRACE, payload)
        outcome = CondTraceOutcome(results=results, violations=violations, report=report)
        if out_dir is not None:
            out_dir = Path(out_dir)
            for mode, result in results.items():
                outcome.paths[mode] = write_trace_csv(out_dir / f"trace_{mode}.csv", result.traces,
                                                      self.config["csv_precision"])
            outcome.paths["summary"] = write_report(out_dir / "cond_trace.json", report)

        if violations:
            for violation in violations:
                self.logger.error(f"Dominance violated on {label}: {violation}")
            raise DominanceViolation(f"{len(violations)} iteration(s) with cond_est < cond_exact on {label}")
        self.logger.info(f"Cond trace on {label}: every estimate bounds the exact condition number")
        return outcome
