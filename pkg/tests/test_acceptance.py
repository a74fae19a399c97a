"""
内置矩阵集上的整体验收：条件数上界、两种 QR 策略的一致性、n = 2000 的成簇谱求解。

这些测试会把整个矩阵集跑一遍，耗时以分钟计。
"""
import sys
from pathlib import Path

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))

from config import settings
from core.chase import SolverConfig, solve
from services.experiment import run_compare_qr, run_cond_trace
from services.matrix import MatrixSpec, gen_matrix

SUITE = settings.HARNESS["suite"]


def _suite_entries():
    for name, matrix_overrides, nev, nex in SUITE:
        generated = gen_matrix(MatrixSpec.from_settings(**matrix_overrides))
        yield name, generated, SolverConfig.from_settings(nev=nev, nex=nex)


def test_suite_covers_required_matrices():
    """矩阵集包含复矩阵、成簇谱以及 n = 2000 的矩阵"""
    specs = [MatrixSpec.from_settings(**overrides) for _, overrides, _, _ in SUITE]
    assert any(spec.scalar_kind.value == "complex128" for spec in specs)
    assert any(spec.spectrum.value == "clustered_dft" for spec in specs)
    assert max(spec.n for spec in specs) == 2000


def test_suite_condition_bound_holds():
    """opt 与 no-opt 两种模式下，每次迭代的精确条件数都不超过估计值"""
    failures = {}
    for name, generated, config in _suite_entries():
        results, violations = run_cond_trace(generated, config, with_exact=True, both_modes=True)
        assert set(results) == {"opt", "no-opt"}
        if violations:
            failures[name] = violations
        for mode, result in results.items():
            assert result.converged, f"{name} ({mode}) did not converge"
            assert result.verified, f"{name} ({mode}) failed the residual check"
            assert all(trace.cond_exact is not None for trace in result.traces)
    assert failures == {}


def test_suite_qr_modes_agree():
    """dynamic 与 householder_only 锁定相同的特征值，迭代次数相差不超过 1，matvec 相差不超过 1%"""
    for name, generated, config in _suite_entries():
        _, agreement = run_compare_qr(generated, config)
        assert agreement["eigenvalues_agree"], f"{name}: {agreement}"
        assert abs(agreement["iteration_delta"]) <= 1, f"{name}: {agreement}"
        assert agreement["matvec_rel_diff"] <= 0.01, f"{name}: {agreement}"
        assert agreement["convergence_agrees"]
        assert agreement["cholqr1_only_below_threshold"]


def test_clustered_2000_solve():
    """n = 2000 成簇谱，nev = 100、nex = 40：全部残差不超过 tol，特征值与真实谱一致"""
    generated = gen_matrix(MatrixSpec.from_settings(n=2000, spectrum="clustered_dft", lo=-10.0, hi=90.0))
    config = SolverConfig.from_settings(nev=100, nex=40)
    result = solve(generated.matrix, config)

    assert result.converged
    assert result.verified
    assert result.final_residuals.max() <= config.tol
    expected = np.asarray(generated.true_spectrum[:config.nev])
    assert np.max(np.abs(result.eigenvalues - expected)) <= 1e-8
    assert result.traces[0].iter == 0
    assert result.traces[-1].locked >= config.nev


if __name__ == "__main__":
    for test in (test_suite_covers_required_matrices, test_suite_condition_bound_holds,
                 test_suite_qr_modes_agree, test_clustered_2000_solve):
        test()
        print(f"{test.__name__} 通过")
