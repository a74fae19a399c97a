"""
缩放的 Chebyshev 滤波器与逐列多项式次数的选择。
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from core.errors import ContractViolation
from core.linalg import HermitianOperator, as_dense
from .spectral import FilterInterval, convergence_ratio

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DegreeSchedule:
    """
    每个活动列的多项式次数，非降序排列。

    非降序保证提前结束的列总是块的前缀，滤波时可以直接缩小活动块。
    """
    degrees: np.ndarray
    max_degree: int
    drifted: tuple[int, ...] = field(default=())  # Ritz 值落入抑制区间、被强制用最大次数的列
    edge: tuple[int, ...] = field(default=())  # Ritz 值即区间左端点的列

    def __post_init__(self):
        degrees = np.asarray(self.degrees, dtype=int)
        object.__setattr__(self, "degrees", degrees)
        if degrees.ndim != 1:
            raise ContractViolation("degree schedule must be one-dimensional")
        if degrees.size and (degrees.min() < 0 or degrees.max() > self.max_degree):
            raise ContractViolation(f"degrees {degrees.min()}..{degrees.max()} outside [0, {self.max_degree}]")
        if np.any(np.diff(degrees) < 0):
            raise ContractViolation("degree schedule must be non-decreasing")

    @classmethod
    def constant(cls, length: int, degree: int, max_degree: int = None) -> "DegreeSchedule":
        max_degree = degree if max_degree is None else max(max_degree, degree)
        return cls(degrees=np.full(length, degree, dtype=int), max_degree=max_degree)

    def __len__(self) -> int:
        return int(self.degrees.size)

    @property
    def first(self) -> int:
        return int(self.degrees[0])

    @property
    def last(self) -> int:
        return int(self.degrees[-1])


@dataclass
class FilterState:
    """缩放递推中的 σ 序列：σ₁ = e/(λ̃₁ − c)，σᵢ = 1/(2/σ₁ − σᵢ₋₁)。"""
    sigma_one: float
    sigma: float

    @classmethod
    def start(cls, interval: FilterInterval, lower_est: float) -> "FilterState":
        if not lower_est < interval.lower:
            raise ContractViolation(
                f"normalization point {lower_est} must lie below the filter interval [{interval.lower}, {interval.upper}]")
        sigma_one = interval.half_width / (lower_est - interval.center)
        return cls(sigma_one=sigma_one, sigma=sigma_one)

    def advance(self) -> float:
        self.sigma = 1.0 / (2.0 / self.sigma_one - self.sigma)
        return self.sigma


@dataclass(frozen=True)
class FilteredBlock:
    filtered: np.ndarray
    matvec_count: int


def filter_block(A: HermitianOperator, V, interval: FilterInterval, lower_est: float,
                 schedule: DegreeSchedule) -> FilteredBlock:
    """
    对 V 的每一列作用 p_{m_a}(A)，其中 p_m(λ) = C_m(t(λ)) / C_m(t(λ̃₁))。

    第 i 步只对次数 >= i 的列做乘法；次数为 0 的列原样返回。

    Args:
        A: Hermitian 算子
        V: n×k 块
        interval: 被抑制的区间
        lower_est: 归一化点 λ̃₁，必须严格小于区间左端
        schedule: 与 V 的列对齐的次数

    Returns:
        FilteredBlock(filtered, matvec_count)，matvec_count 为实际被乘的列数之和
    """
    V = as_dense(V, "V")
    if V.shape[0] != A.n:
        raise ContractViolation(f"block has {V.shape[0]} rows, operator order is {A.n}")
    degrees = schedule.degrees
    if degrees.size != V.shape[1]:
        raise ContractViolation(f"schedule has {degrees.size} entries for {V.shape[1]} columns")

    state = FilterState.start(interval, lower_est)
    out = V.astype(np.result_type(V.dtype, A.dtype), copy=True)
    top = int(degrees.max()) if degrees.size else 0
    if top == 0:
        return FilteredBlock(filtered=out, matvec_count=0)

    c, e = interval.center, interval.half_width
    start = int(np.searchsorted(degrees, 1, side="left"))
    previous = V[:, start:]
    current = (state.sigma_one / e) * (A.apply(previous) - c * previous)
    matvecs = previous.shape[1]
    finished = np.flatnonzero(degrees[start:] == 1)
    out[:, start + finished] = current[:, finished]

    for i in range(2, top + 1):
        first_active = int(np.searchsorted(degrees, i, side="left"))
        drop = first_active - start
        if drop:
            previous, current = previous[:, drop:], current[:, drop:]
            start = first_active
        sigma_previous = state.sigma
        sigma_i = state.advance()
        following = (2.0 * sigma_i / e) * (A.apply(current) - c * current) - (sigma_previous * sigma_i) * previous
        matvecs += current.shape[1]
        finished = np.flatnonzero(degrees[start:] == i)
        out[:, start + finished] = following[:, finished]
        previous, current = current, following

    return FilteredBlock(filtered=out, matvec_count=matvecs)


def scalar_filter_value(lam: float, interval: FilterInterval, lower_est: float, m: int) -> float:
    """与 filter_block 相同的递推作用在标量 λ 上，得到 p_m(λ)。"""
    if m < 0:
        raise ContractViolation(f"degree must be non-negative, got {m}")
    state = FilterState.start(interval, lower_est)
    if m == 0:
        return 1.0
    c, e = interval.center, interval.half_width
    previous, current = 1.0, (state.sigma_one / e) * (lam - c)
    for _ in range(2, m + 1):
        sigma_previous = state.sigma
        sigma_i = state.advance()
        previous, current = current, (2.0 * sigma_i / e) * (lam - c) * current - sigma_previous * sigma_i * previous
    return current


EDGE_TOLERANCE = 1e-10


def choose_degrees(ritz_values: Sequence[float], residuals: Sequence[float], interval: FilterInterval,
                   tol: float, base_degree: int, max_degree: int, min_degree: int = 3) -> DegreeSchedule:
    """
    逐列选择多项式次数：m_a = ⌈ln(tol / res_a) / ln τ(θ_a)⌉，夹在 [min_degree, max_degree]。

    - 残差未知 (非有限) 的列使用 base_degree
    - Ritz 值就是区间左端点的列 (|t + 1| <= EDGE_TOLERANCE) 记入 edge，
      沿用前面各列的最大次数；没有前面的列时用 base_degree
    - Ritz 值真正落在抑制区间内时 τ 无意义，使用 max_degree 并记入 drifted
    - 最后做一次前向最大值扫描，保证次数非降

    Args:
        ritz_values: 活动列的 Ritz 值
        residuals: 对应的残差范数
        interval: 抑制区间
        tol: 收敛阈值
        base_degree, max_degree, min_degree: 次数参数

    Returns:
        DegreeSchedule
    """
    ritz_values = np.asarray(ritz_values, dtype=float)
    residuals = np.asarray(residuals, dtype=float)
    if ritz_values.shape != residuals.shape:
        raise ContractViolation("ritz values and residuals must have the same length")
    if not tol > 0:
        raise ContractViolation(f"tol must be positive, got {tol}")
    min_degree = min(min_degree, max_degree)
    base_degree = min(base_degree, max_degree)

    degrees = np.empty(ritz_values.size, dtype=int)
    drifted = []
    edge = []
    tiny = np.finfo(float).tiny
    for a, (theta, res) in enumerate(zip(ritz_values, residuals)):
        if not math.isfinite(res):
            degrees[a] = base_degree
            continue
        t = interval.scaled(theta)
        if abs(t + 1.0) <= EDGE_TOLERANCE:
            # 占位，扫描后再补
            degrees[a] = -1
            edge.append(a)
            continue
        if abs(t) <= 1.0:
            degrees[a] = max_degree
            drifted.append(a)
            continue
        tau = convergence_ratio(theta, interval)
        needed = math.log(tol / max(res, tiny)) / math.log(tau)
        # 扣掉一点舍入误差，避免整数比值被 ceil 抬高一级
        m = math.ceil(needed - 1e-9)
        degrees[a] = min(max(m, min_degree), max_degree)

    if degrees.size:
        degrees = np.maximum.accumulate(degrees)
        degrees[degrees < 0] = base_degree
        degrees = np.maximum.accumulate(degrees)
    if drifted:
        logger.warning(f"Ritz values of columns {drifted} fell inside the filter interval; using degree {max_degree}")
    return DegreeSchedule(degrees=degrees, max_degree=max_degree, drifted=tuple(drifted), edge=tuple(edge))
