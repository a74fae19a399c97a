"""
实验协调器 (Broker)
负责把命令行命令路由到矩阵服务与实验服务，并把异常映射为退出码。
"""
import asyncio
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Awaitable, Callable, Dict, Optional

from tqdm import tqdm

from config import settings
from core.chase import SolverConfig
from core.errors import ChaseError, DominanceViolation, EquivalenceViolation, ExitCode
from core.report import ReportType, create_report, write_report
from services.base import BaseService
from services.matrix import GeneratedMatrix, MatrixKind, MatrixSpec

logger = logging.getLogger(__name__)

# 套件中每个矩阵执行的实验：参数为 (矩阵, 求解器配置, 输出目录)
SuiteStep = Callable[[GeneratedMatrix, SolverConfig, Path], Awaitable[Any]]


class CommandType(Enum):
    """命令类型枚举，与命令行子命令一一对应"""
    GEN = "gen"
    SOLVE = "solve"
    COND_TRACE = "cond-trace"
    COMPARE_QR = "compare-qr"


class ExperimentBroker:
    """
    实验协调器，管理矩阵服务与实验服务。
    """
    def __init__(self,
                 synthetic_service: BaseService,
                 market_service: BaseService,
                 solve_service: BaseService,
                 cond_trace_service: BaseService,
                 compare_qr_service: BaseService
                 ):
        # 使用字典存储所有服务
        self.services = {
            'synthetic': synthetic_service,
            'market': market_service,
            'solve': solve_service,
            'cond_trace': cond_trace_service,
            'compare_qr': compare_qr_service,
        }

    def get_service(self, service_name: str) -> Any:
        """获取指定名称的服务实例"""
        if service_name not in self.services:
            raise KeyError(f"Service '{service_name}' not found")
        return self.services[service_name]

    def register_service(self, service_name: str, service_instance: Any) -> None:
        """注册新服务或替换现有服务"""
        self.services[service_name] = service_instance
        logger.info(f"Service '{service_name}' registered")

    async def initialize_services(self):
        """初始化所有服务。"""
        logger.debug("Initializing all services...")
        await asyncio.gather(*(service.initialize() for service in self.services.values()))
        logger.info("All services initialized.")

    async def shutdown_services(self):
        """关闭所有服务。"""
        logger.debug("Shutting down all services...")
        await asyncio.gather(*(service.shutdown() for service in self.services.values()))
        logger.info("All services shut down.")

    async def handle_command(self, command: CommandType, payload: Dict[str, Any]) -> ExitCode:
        """
        执行一条命令。

        Args:
            command: 命令类型
            payload: 包含 matrix (MatrixSpec)、solver (SolverConfig)、out_dir 以及各命令的开关

        Returns:
            退出码；领域异常在这里被记录并转换为对应的退出码
        """
        try:
            logger.debug(f"Broker received command '{command.value}' with payload keys {sorted(payload)}")
            out_dir = Path(payload.get("out_dir") or settings.HARNESS["out_dir"])
            solver_config: SolverConfig = payload.get("solver") or SolverConfig.from_settings()
            matrix_spec: MatrixSpec = payload.get("matrix") or MatrixSpec.from_settings()

            if command == CommandType.GEN:
                await self._gen_pipeline(matrix_spec, out_dir)
            elif command == CommandType.SOLVE:
                generated = await self.load_matrix(matrix_spec)
                await self.get_service('solve').process(generated, solver_config, out_dir)
            elif command == CommandType.COND_TRACE:
                with_exact = payload.get("with_exact", True)
                if payload.get("suite"):
                    await self._suite_pipeline(solver_config, out_dir, self._cond_trace_step(with_exact, True),
                                               DominanceViolation)
                else:
                    generated = await self.load_matrix(matrix_spec)
                    await self.get_service('cond_trace').process(generated, solver_config, out_dir, with_exact,
                                                                 payload.get("both_modes", False))
            elif command == CommandType.COMPARE_QR:
                if payload.get("suite"):
                    await self._suite_pipeline(solver_config, out_dir, self._compare_qr_step(),
                                               EquivalenceViolation)
                else:
                    generated = await self.load_matrix(matrix_spec)
                    await self.get_service('compare_qr').process(generated, solver_config, out_dir)
            else:
                logger.warning(f"Received unhandled command: {command}")
                return ExitCode.UNEXPECTED
            return ExitCode.OK

        except ChaseError as e:
            logger.error(f"{type(e).__name__}: {e}")
            return e.exit_code
        except Exception as e:
            logger.error(f"Error handling command '{command.value}': {e}", exc_info=True)
            return ExitCode.UNEXPECTED

    async def load_matrix(self, spec: MatrixSpec) -> GeneratedMatrix:
        """按 MatrixSpec 的来源选择服务。"""
        if spec.kind is MatrixKind.MATRIX_MARKET_FILE:
            return await self.get_service('market').process(spec)
        return await self.get_service('synthetic').process(spec)

    async def _gen_pipeline(self, spec: MatrixSpec, out_dir: Path) -> None:
        """gen：合成矩阵 -> Matrix Market 文件 + 谱信息 JSON"""
        generated = await self.load_matrix(spec)
        label = spec.label()
        path = await self.get_service('market').save(out_dir / f"{label}.mtx", generated)
        payload = {"matrix": spec.model_dump(mode="json"), "path": path,
                   "true_spectrum": generated.true_spectrum}
        write_report(out_dir / f"{label}.json", create_report(ReportType.MATRIX, payload))

    def _cond_trace_step(self, with_exact: bool, both_modes: bool) -> SuiteStep:
        async def step(generated: GeneratedMatrix, solver_config: SolverConfig, out_dir: Path):
            return await self.get_service('cond_trace').process(generated, solver_config, out_dir,
                                                                with_exact, both_modes)
        return step

    def _compare_qr_step(self) -> SuiteStep:
        async def step(generated: GeneratedMatrix, solver_config: SolverConfig, out_dir: Path):
            return await self.get_service('compare_qr').process(generated, solver_config, out_dir)
        return step

    async def _suite_pipeline(self, solver_config: SolverConfig, out_dir: Path, step: SuiteStep,
                              violation: type[ChaseError], suite: Optional[list] = None) -> None:
        """
        在默认测试集的每个矩阵上执行 step；任何领域异常都不中断后续矩阵，全部结束后统一报告。

        每个矩阵的结果写入 <out_dir>/suite.json。有违反项时抛出 violation，
        否则抛出第一个失败矩阵的异常类型，退出码随之确定。
        """
        suite = settings.HARNESS["suite"] if suite is None else suite
        rows = []
        failures: list[tuple[str, ChaseError]] = []
        for name, matrix_overrides, nev, nex in tqdm(suite, desc="suite", unit="matrix"):
            row = {"name": name, "nev": nev, "nex": nex, "status": "ok", "error": None,
                   "exit_code": int(ExitCode.OK)}
            try:
                spec = MatrixSpec.from_settings(**matrix_overrides)
                config = solver_config.model_copy(update={"nev": nev, "nex": nex})
                generated = await self.load_matrix(spec)
                await step(generated, config, out_dir / name)
            except ChaseError as e:
                logger.error(f"Suite entry '{name}' failed: {type(e).__name__}: {e}")
                row.update(status=type(e).__name__, error=str(e), exit_code=int(e.exit_code))
                failures.append((name, e))
            rows.append(row)

        write_report(out_dir / "suite.json", create_report(ReportType.SUITE, {"entries": rows}))
        if not failures:
            logger.info(f"All {len(suite)} suite matrices passed")
            return
        names = ", ".join(name for name, _ in failures)
        message = f"{len(failures)} suite matrices failed: {names}"
        if any(isinstance(e, violation) for _, e in failures):
            raise violation(message)
        raise type(failures[0][1])(message)
