"""
谱边界：Chebyshev 标量函数、收敛因子 ρ 以及基于 Lanczos 的谱区间估计。
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from config import settings
from core.errors import ContractViolation
from core.linalg import HermitianOperator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FilterInterval:
    """被抑制的区间 [c − e, c + e]"""
    center: float
    half_width: float

    def __post_init__(self):
        if not (self.half_width > 0 and math.isfinite(self.half_width) and math.isfinite(self.center)):
            raise ContractViolation(
                f"degenerate filter interval: center={self.center}, half_width={self.half_width}")

    @classmethod
    def from_edges(cls, lower: float, upper: float) -> "FilterInterval":
        return cls(center=(upper + lower) / 2.0, half_width=(upper - lower) / 2.0)

    @property
    def lower(self) -> float:
        return self.center - self.half_width

    @property
    def upper(self) -> float:
        return self.center + self.half_width

    def scaled(self, lam: float) -> float:
        """t = (λ − c) / e"""
        return (lam - self.center) / self.half_width


@dataclass(frozen=True)
class SpectralBounds:
    """
    Lanczos 给出的谱信息。

    upper_bound 是 λ_max 的上界；lower_est 是 λ₁ 的估计，
    lower_margin 是对应 Ritz 对的残差，可用来把 lower_est 往下放宽。
    """
    lower_est: float
    inner_edge: float
    upper_bound: float
    lower_margin: float = 0.0
    steps: int = 0
    restarts: int = 0
    ritz_nodes: np.ndarray = field(default_factory=lambda: np.empty(0), compare=False, repr=False)
    ritz_weights: np.ndarray = field(default_factory=lambda: np.empty(0), compare=False, repr=False)

    def __post_init__(self):
        if not (self.lower_est <= self.inner_edge < self.upper_bound):
            raise ContractViolation(
                f"inconsistent bounds: lower={self.lower_est}, inner={self.inner_edge}, upper={self.upper_bound}")

    def interval(self) -> FilterInterval:
        return FilterInterval.from_edges(self.inner_edge, self.upper_bound)


def cheb_scalar(m: int, t: float) -> float:
    """第一类 Chebyshev 多项式 C_m(t)，三项递推。"""
    if m < 0:
        raise ContractViolation(f"degree must be non-negative, got {m}")
    if m == 0:
        return 1.0
    previous, current = 1.0, t
    for _ in range(m - 1):
        previous, current = current, 2.0 * t * current - previous
    return current


def _rho_branches(t: float) -> tuple[float, float]:
    """|t ± √(t²−1)| 的两个分支 (较大, 较小)；较小分支用倒数计算，避免相减抵消。"""
    root = math.sqrt((abs(t) - 1.0) * (abs(t) + 1.0))
    plus = abs(t + root)
    minus = abs(t - root)
    large = max(plus, minus)
    return large, 1.0 / large


def rho_of(lam: float, interval: FilterInterval) -> float:
    """
    ρ(λ) = max |t ± √(t²−1)|, t = (λ − c)/e。

    λ 必须严格位于区间外 (|t| > 1)，此时 ρ > 1。
    """
    t = interval.scaled(lam)
    if not math.isfinite(t):
        raise ContractViolation(f"non-finite scaled value for lambda={lam}")
    if abs(t) <= 1.0:
        raise ContractViolation(f"lambda={lam} lies inside the filter interval [{interval.lower}, {interval.upper}]")
    large, _ = _rho_branches(t)
    return large


def convergence_ratio(theta: float, interval: FilterInterval) -> float:
    """τ(θ) = 1/ρ(θ) ∈ (0, 1)"""
    return 1.0 / rho_of(theta, interval)


def _random_start(n: int, rng: np.random.Generator, complex_entries: bool) -> np.ndarray:
    v = rng.standard_normal(n)
    if complex_entries:
        v = v + 1j * rng.standard_normal(n)
    return v


def _orthogonalize(v: np.ndarray, basis: np.ndarray) -> np.ndarray:
    # 两次 Gram-Schmidt
    for _ in range(2):
        v = v - basis @ (basis.conj().T @ v)
    return v


def lanczos_bounds(A: HermitianOperator, ell: int, steps: int = settings.SOLVER["lanczos_steps"],
                   seed: int = settings.SOLVER["seed"],
                   max_restarts: int = settings.SOLVER["lanczos_max_restarts"],
                   inner_edge_override: Optional[float] = None) -> SpectralBounds:
    """
    少量步数的 Lanczos（完全重正交化），给出谱区间估计。

    Args:
        A: Hermitian 算子
        ell: 搜索子空间维数 ℓ = nev + nex (ℓ < n)
        steps: Lanczos 步数 (>= 4)
        seed: 起始向量的随机种子
        max_restarts: 遇到不变子空间时的重启次数上限
        inner_edge_override: 已知 λ_ℓ 时直接作为区间左端点

    Returns:
        SpectralBounds，其中 upper_bound = θ_max + ‖最后残差‖，
        lower_est = θ_min，inner_edge 为 λ_ℓ 的估计
    """
    n = A.n
    if steps < 4:
        raise ContractViolation(f"lanczos needs at least 4 steps, got {steps}")
    if not 1 <= ell < n:
        raise ContractViolation(f"subspace size {ell} must satisfy 1 <= ell < n={n}")
    steps = min(steps, n)
    complex_entries = A.kind.value == "complex128"
    rng = np.random.default_rng(seed)

    basis = np.zeros((n, steps), dtype=A.dtype)
    start = _random_start(n, rng, complex_entries)
    start_norm = np.linalg.norm(start)
    if not start_norm > 0:
        raise ContractViolation("lanczos start vector vanished")
    q = start / start_norm

    alphas: list[float] = []
    betas: list[float] = []
    residual_norm = 0.0
    restarts = 0
    j = 0
    while j < steps:
        basis[:, j] = q
        w = A.apply(q[:, None])[:, 0]
        alpha = float(np.real(np.vdot(q, w)))
        w = _orthogonalize(w, basis[:, :j + 1])
        beta = float(np.linalg.norm(w))
        if not (math.isfinite(alpha) and math.isfinite(beta)):
            raise ContractViolation("lanczos produced non-finite values")
        alphas.append(alpha)
        j += 1
        if j == steps:
            residual_norm = beta
            break

        scale = max(abs(a) for a in alphas) + max(betas, default=0.0)
        if beta > 1e-12 * max(scale, np.finfo(float).tiny):
            betas.append(beta)
            q = w / beta
            continue

        # 找到不变子空间，换一个与已有基正交的新起点
        if restarts >= max_restarts:
            logger.info(f"Lanczos accepted an invariant subspace of dimension {j}")
            residual_norm = 0.0
            break
        restarts += 1
        v = _orthogonalize(_random_start(n, rng, complex_entries), basis[:, :j])
        v_norm = float(np.linalg.norm(v))
        if not v_norm > 0:
            residual_norm = 0.0
            break
        logger.debug(f"Lanczos breakdown at step {j}, restart {restarts}")
        betas.append(0.0)
        q = v / v_norm

    if not alphas:
        raise ContractViolation("lanczos could not form a basis")

    k = len(alphas)
    if k == 1:
        nodes, S = np.array(alphas), np.ones((1, 1))
    else:
        nodes, S = scipy.linalg.eigh_tridiagonal(np.array(alphas), np.array(betas[:k - 1]))
    weights = np.abs(S[0, :]) ** 2
    weights = weights / weights.sum()

    lower_est = float(nodes[0])
    lower_margin = float(residual_norm * abs(S[-1, 0]))
    upper_bound = float(nodes[-1] + residual_norm)

    if inner_edge_override is not None:
        inner_edge = float(inner_edge_override)
    else:
        fraction = ell / n
        linear = nodes[0] + fraction * (nodes[-1] - nodes[0])
        cumulative = np.cumsum(weights)
        quantile_index = min(int(np.searchsorted(cumulative, fraction)), k - 1)
        inner_edge = float(max(min(linear, nodes[quantile_index]), lower_est))

    spread_floor = 1e-8 * max(1.0, abs(upper_bound))
    if upper_bound <= inner_edge:
        upper_bound = inner_edge + spread_floor

    logger.debug(f"Lanczos bounds: lower={lower_est:.6g} (margin {lower_margin:.3g}), "
                 f"inner={inner_edge:.6g}, upper={upper_bound:.6g}, steps={k}, restarts={restarts}")
    return SpectralBounds(lower_est=lower_est, inner_edge=inner_edge, upper_bound=upper_bound,
                          lower_margin=lower_margin, steps=k, restarts=restarts,
                          ritz_nodes=nodes, ritz_weights=weights)
