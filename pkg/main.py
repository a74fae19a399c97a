"""
chase-caqr：Chebyshev 加速子空间迭代求解器，带条件数估计驱动的动态 CholeskyQR。

Usage:
  main.py gen [options]
  main.py solve [options]
  main.py cond-trace [options]
  main.py compare-qr [options]
  main.py (-h | --help)
  main.py --version

Matrix options:
  --matrix=<path>        Read a Matrix Market file instead of synthesizing a matrix.
  --n=<n>                Order of the synthetic matrix.
  --spectrum=<kind>      Synthetic spectrum: uniform, clustered_dft or explicit.
  --lo=<lo>              Lower end of the prescribed spectrum.
  --hi=<hi>              Upper end of the prescribed spectrum.
  --cluster-frac=<f>     Share of eigenvalues clustered in the lowest decile.
  --eigs=<list>          Comma-separated eigenvalues for the explicit spectrum.
  --complex              Synthesize a complex Hermitian matrix.
  --matrix-seed=<seed>   Seed of the synthetic matrix.

Solver options:
  --seed=<seed>          Solver seed (Lanczos start and initial block).
  --tol=<tol>            Residual tolerance.
  --relative-tol         Scale the tolerance by the spectral radius estimate.
  --nev=<nev>            Number of wanted eigenpairs.
  --nex=<nex>            Number of extra search directions.
  --deg-base=<m>         Polynomial degree of the first iteration.
  --deg-max=<m>          Upper bound of the optimized degrees.
  --no-opt               Use --deg-base for every column in every iteration.
  --qr=<mode>            QR strategy: dynamic, hh, cholqr1, cholqr2 or shifted.
  --eta=<mode>           Eta factor of the estimate: one or formula.
  --max-iter=<k>         Iteration cap.

Experiment options:
  --no-exact             cond-trace: skip the Jacobi SVD reference.
  --both                 cond-trace: run with and without degree optimization.
  --suite                cond-trace, compare-qr: run the built-in matrix suite.
  --out=<dir>            Output directory.
  -v --verbose           Debug logging.
  -h --help              Show this screen.
  --version              Show version.
"""
import asyncio
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional

from docopt import docopt

from config import settings
from core.broker import CommandType, ExperimentBroker
from core.chase import SolverConfig
from core.errors import ChaseError, ExitCode
from services.matrix import MatrixKind, MatrixSpec

logger = logging.getLogger(__name__)

QR_ALIASES = {"hh": "householder_only"}


def _number(arguments: Dict[str, Any], key: str, kind=float) -> Optional[Any]:
    value = arguments.get(key)
    if value is None:
        return None
    try:
        return kind(value)
    except ValueError:
        raise ValueError(f"{key} expects a {kind.__name__}, got {value!r}")


def build_solver_config(arguments: Dict[str, Any]) -> SolverConfig:
    """根据命令行参数构造求解器配置，未给出的项取 settings.SOLVER。"""
    qr = arguments.get("--qr")
    return SolverConfig.from_settings(
        seed=_number(arguments, "--seed", int),
        tol=_number(arguments, "--tol"),
        tol_mode="relative" if arguments.get("--relative-tol") else None,
        nev=_number(arguments, "--nev", int),
        nex=_number(arguments, "--nex", int),
        base_degree=_number(arguments, "--deg-base", int),
        max_degree=_number(arguments, "--deg-max", int),
        degree_opt=False if arguments.get("--no-opt") else None,
        qr_mode=QR_ALIASES.get(qr, qr),
        eta_mode=arguments.get("--eta"),
        max_iterations=_number(arguments, "--max-iter", int),
    )


def build_matrix_spec(arguments: Dict[str, Any]) -> MatrixSpec:
    """根据命令行参数构造矩阵配置，未给出的项取 settings.MATRIX。"""
    if arguments.get("--matrix"):
        return MatrixSpec.from_settings(kind=MatrixKind.MATRIX_MARKET_FILE, path=Path(arguments["--matrix"]))
    eigenvalues = None
    n = _number(arguments, "--n", int)
    spectrum = arguments.get("--spectrum")
    if arguments.get("--eigs"):
        eigenvalues = tuple(float(v) for v in arguments["--eigs"].split(",") if v.strip())
        spectrum = "explicit"
        n = len(eigenvalues) if n is None else n
    return MatrixSpec.from_settings(
        n=n,
        spectrum=spectrum,
        lo=_number(arguments, "--lo"),
        hi=_number(arguments, "--hi"),
        cluster_frac=_number(arguments, "--cluster-frac"),
        eigenvalues=eigenvalues,
        scalar_kind="complex128" if arguments.get("--complex") else None,
        seed=_number(arguments, "--matrix-seed", int),
    )


def build_command(arguments: Dict[str, Any]) -> tuple[CommandType, Dict[str, Any]]:
    """把 docopt 的结果转换为 broker 的命令与 payload。"""
    command = next(c for c in CommandType if arguments.get(c.value))
    payload = {
        "matrix": build_matrix_spec(arguments),
        "solver": build_solver_config(arguments),
        "out_dir": Path(arguments["--out"]) if arguments.get("--out") else settings.HARNESS["out_dir"],
        "with_exact": not arguments.get("--no-exact"),
        "both_modes": bool(arguments.get("--both")),
        "suite": bool(arguments.get("--suite")),
    }
    return command, payload


def build_services():
    """创建 broker 使用的全部服务"""
    from services.experiment import CompareQrService, CondTraceService, SolveService
    from services.matrix import MatrixMarketService, SyntheticMatrixService

    return dict(
        synthetic_service=SyntheticMatrixService(config=settings.MATRIX),
        market_service=MatrixMarketService(),
        solve_service=SolveService(config=settings.HARNESS),
        cond_trace_service=CondTraceService(config=settings.HARNESS),
        compare_qr_service=CompareQrService(config=settings.HARNESS),
    )


async def main(command: CommandType, payload: Dict[str, Any]) -> ExitCode:
    """
    主异步函数：初始化服务，执行一条命令，关闭服务。
    """
    logger.info(f"Starting {settings.PROJECT_NAME} {command.value}...")
    broker = ExperimentBroker(**build_services())
    try:
        await broker.initialize_services()
    except Exception as e:
        logger.error(f"Failed to initialize services: {e}", exc_info=True)
        return ExitCode.UNEXPECTED

    try:
        return await broker.handle_command(command, payload)
    finally:
        await broker.shutdown_services()


if __name__ == "__main__":
    arguments = docopt(__doc__, version=f"{settings.PROJECT_NAME} {settings.PROJECT_VERSION}")
    logging.basicConfig(level=logging.DEBUG if arguments["--verbose"] else settings.LOG_LEVEL,
                        format=settings.LOG_FORMAT)

    try:
        command, payload = build_command(arguments)
        exit_code = asyncio.run(main(command, payload))
    except (ChaseError, ValueError) as e:
        logger.error(f"Invalid arguments: {e}")
        exit_code = getattr(e, "exit_code", ExitCode.UNEXPECTED)
    except KeyboardInterrupt:
        logger.info("KeyboardInterrupt caught in __main__, shutting down.")
        exit_code = ExitCode.UNEXPECTED
    except Exception as e:
        logger.critical(f"Unhandled exception in main execution: {e}", exc_info=True)
        exit_code = ExitCode.UNEXPECTED
    sys.exit(int(exit_code))
