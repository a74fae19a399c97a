import math
import sys
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose

sys.path.append(str(Path(__file__).parent.parent))

from core.chase import FilterInterval, cheb_scalar, convergence_ratio, lanczos_bounds, rho_of
from core.errors import ContractViolation
from core.linalg import HermitianOperator

UNIT = FilterInterval(center=0.0, half_width=1.0)


def test_cheb_scalar():
    """Chebyshev 递推的小例子"""
    assert cheb_scalar(0, 0.7) == 1.0
    assert cheb_scalar(1, 0.3) == 0.3
    assert cheb_scalar(2, 2.0) == 7.0
    assert_allclose(cheb_scalar(3, 0.5), math.cos(3 * math.acos(0.5)), atol=1e-15)
    with pytest.raises(ContractViolation):
        cheb_scalar(-1, 2.0)


def test_cheb_asymptotics():
    """|t| > 1 时 C_m(t) = (ρ^m + ρ^-m)/2"""
    for t in (1.0001, 1.5, 3.0, 10.0, -1.2, -4.0):
        rho = rho_of(t, UNIT)
        for m in range(5, 41, 5):
            expected = (rho ** m + rho ** -m) / 2.0
            assert_allclose(abs(cheb_scalar(m, t)), expected, rtol=1e-10)


def test_rho_of():
    """ρ 的取值与区间内的拒绝"""
    assert_allclose(rho_of(-2.0, UNIT), 2.0 + math.sqrt(3.0), rtol=1e-15)
    assert_allclose(rho_of(3.0, UNIT), 3.0 + math.sqrt(8.0), rtol=1e-15)

    grazing = rho_of(-1.0 - 1e-15, UNIT)
    assert 1.0 < grazing < 1.0 + 1e-6

    shifted = FilterInterval.from_edges(10.0, 20.0)
    assert_allclose(rho_of(0.0, shifted), rho_of(-3.0, UNIT), rtol=1e-15)

    for inside in (0.5, 1.0, -1.0):
        with pytest.raises(ContractViolation):
            rho_of(inside, UNIT)


def test_convergence_ratio():
    """τ = 1/ρ，位于 (0, 1)"""
    assert_allclose(convergence_ratio(-2.0, UNIT), 2.0 - math.sqrt(3.0), rtol=1e-14)
    assert_allclose(convergence_ratio(-10.0, UNIT), 10.0 - math.sqrt(99.0), rtol=1e-12)
    for theta in (-1.01, -2.0, -50.0, 7.0):
        tau = convergence_ratio(theta, UNIT)
        assert 0.0 < tau < 1.0
        assert abs(tau * rho_of(theta, UNIT) - 1.0) <= 4 * 2.0 ** -53


def test_filter_interval():
    """区间构造与退化区间"""
    interval = FilterInterval.from_edges(2.0, 6.0)
    assert interval.center == 4.0 and interval.half_width == 2.0
    assert interval.lower == 2.0 and interval.upper == 6.0
    assert interval.scaled(0.0) == -2.0
    with pytest.raises(ContractViolation):
        FilterInterval(center=1.0, half_width=0.0)
    with pytest.raises(ContractViolation):
        FilterInterval.from_edges(3.0, 3.0)


def test_lanczos_uniform_diagonal():
    """diag(1..100)：每个种子的上界都覆盖 λ_max，下端估计不超过 λ_{ℓ+1}"""
    values = np.arange(1.0, 101.0)
    ell = 20
    for seed in range(10):
        A = HermitianOperator(np.diag(values))
        bounds = lanczos_bounds(A, ell=ell, steps=25, seed=seed)
        assert bounds.upper_bound >= values[-1]
        assert values[0] - 1e-10 <= bounds.lower_est <= values[ell] + 1e-10
        assert bounds.lower_est <= bounds.inner_edge < bounds.upper_bound
        assert A.applied_columns == bounds.steps
        assert_allclose(bounds.ritz_weights.sum(), 1.0)


def test_lanczos_symmetric_interval():
    """均匀分布在 [-5, 5] 的谱"""
    A = HermitianOperator(np.diag(np.linspace(-5.0, 5.0, 200)))
    bounds = lanczos_bounds(A, ell=30, steps=25, seed=3)
    assert bounds.upper_bound >= 5.0
    assert bounds.lower_est <= -4.0
    assert_allclose(bounds.interval().lower, bounds.inner_edge, rtol=1e-15)
    assert_allclose(bounds.interval().upper, bounds.upper_bound, rtol=1e-15)


def test_lanczos_identity():
    """A = I：立即得到不变子空间，区间仍然非退化"""
    A = HermitianOperator(np.eye(30))
    bounds = lanczos_bounds(A, ell=5, steps=10, seed=0)
    assert abs(bounds.lower_est - 1.0) <= 1e-10
    assert bounds.upper_bound >= 1.0
    assert bounds.upper_bound > bounds.inner_edge
    assert bounds.interval().half_width > 0.0


def test_lanczos_options():
    """覆盖 λ_ℓ、参数检查、复数算子与确定性"""
    A = HermitianOperator(np.diag(np.arange(1.0, 61.0)))
    bounds = lanczos_bounds(A, ell=10, steps=20, seed=5, inner_edge_override=12.0)
    assert bounds.inner_edge == 12.0

    again = lanczos_bounds(HermitianOperator(np.diag(np.arange(1.0, 61.0))), ell=10, steps=20, seed=5,
                           inner_edge_override=12.0)
    assert again == bounds

    with pytest.raises(ContractViolation):
        lanczos_bounds(A, ell=10, steps=3)
    with pytest.raises(ContractViolation):
        lanczos_bounds(A, ell=60, steps=10)

    rng = np.random.default_rng(2)
    Z = rng.standard_normal((40, 40)) + 1j * rng.standard_normal((40, 40))
    H = (Z + Z.conj().T) / 2
    bounds = lanczos_bounds(HermitianOperator(H), ell=8, steps=20, seed=1)
    assert bounds.upper_bound >= np.linalg.eigvalsh(H)[-1] - 1e-10


if __name__ == "__main__":
    for test in (test_cheb_scalar, test_cheb_asymptotics, test_rho_of, test_convergence_ratio,
                 test_filter_interval, test_lanczos_uniform_diagonal, test_lanczos_symmetric_interval,
                 test_lanczos_identity, test_lanczos_options):
        test()
        print(f"{test.__name__} 通过")
