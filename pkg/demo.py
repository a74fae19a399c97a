"""
chase-caqr 演示脚本
在一个小的合成矩阵上走完整条流水线：

1. 合成给定谱的 Hermitian 矩阵
2. 分别以 dynamic 与 householder_only 两种 QR 策略求解
3. 打印每次迭代的条件数估计、精确条件数与所用的 QR 方法
"""
import asyncio
import logging
import time

from config import settings
from core.chase import SolverConfig
from core.report import parse_report
from services.experiment import CompareQrService, CondTraceService
from services.matrix import MatrixSpec, SyntheticMatrixService

OUT_DIR = settings.HARNESS["out_dir"] / "demo"


def print_traces(mode: str, traces) -> None:
    print(f"\n[{mode}]")
    print(f"{'iter':>4} {'locked':>6} {'deg':>7} {'cond_est':>12} {'cond_exact':>12}  qr")
    for t in traces:
        exact = f"{t.cond_exact:12.3e}" if t.cond_exact is not None else f"{'-':>12}"
        print(f"{t.iter:>4} {t.locked:>6} {t.deg_min:>3}..{t.deg_max:<3} {t.cond_est:12.3e} {exact}  {t.qr_variant.value}")


async def main():
    synthetic = SyntheticMatrixService()
    cond_trace = CondTraceService()
    compare_qr = CompareQrService()
    for service in (synthetic, cond_trace, compare_qr):
        await service.initialize()

    spec = MatrixSpec.from_settings(n=400, spectrum="clustered_dft", lo=-10.0, hi=90.0)
    config = SolverConfig.from_settings(nev=16, nex=8)

    start_time = time.time()
    generated = await synthetic.process(spec)
    print(f"生成矩阵 {spec.label()}，耗时: {time.time() - start_time:.2f} 秒")
    print(f"最小的 {config.nev} 个特征值: {generated.true_spectrum[:config.nev]}")

    start_time = time.time()
    outcome = await cond_trace.process(generated, config, OUT_DIR / "cond_trace", with_exact=True, both_modes=True)
    print(f"条件数轨迹完成，耗时: {time.time() - start_time:.2f} 秒")
    for mode, traces in outcome.traces.items():
        print_traces(mode, traces)

    start_time = time.time()
    comparison = await compare_qr.process(generated, config, OUT_DIR / "compare_qr")
    print(f"\nQR 对比完成，耗时: {time.time() - start_time:.2f} 秒")
    report = parse_report(comparison.report)
    for key, value in report["payload"]["agreement"].items():
        print(f"  {key}: {value}")
    print(f"\n结果写入: {OUT_DIR}")

    for service in (synthetic, cond_trace, compare_qr):
        await service.shutdown()


if __name__ == "__main__":
    logging.basicConfig(level=logging.WARNING, format=settings.LOG_FORMAT)
    asyncio.run(main())
