"""
滤波后向量块的条件数上界估计。

所有乘积在对数空间中计算，超过 1e300 的上界记为 +inf。
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from core.errors import ContractViolation
from .filter import DegreeSchedule
from .spectral import FilterInterval, rho_of

logger = logging.getLogger(__name__)

LOG_CAP = math.log(1e300)
ETA_CAP = 1e8
ETA_VALID_LIMIT = 1.0 + math.sqrt(2.0)  # formula η 只在 ρ(λ_ℓ)^m 低于此值时适用


class EtaMode(str, Enum):
    ONE = "one"
    FORMULA = "formula"


class CondRegime(str, Enum):
    INITIAL = "initial"
    UNIFORM = "uniform"
    OPTIMIZED = "optimized"
    LOCKED = "locked"


@dataclass(frozen=True)
class CondEstimate:
    """
    条件数上界 bound = η · ρ₁^{m_ℓ}（锁定后为 η · ρ_{k+1}^{m_{k+1}} · ρ₁^{m_ℓ − m_{k+1}}）。
    """
    bound: float
    log_bound: float
    eta: float
    rho_first: float
    degree_max: int
    regime: CondRegime
    locked: int = 0
    rho_after_lock: Optional[float] = None
    degree_after_lock: Optional[int] = None
    inflated: bool = False  # 用 ρ₁ 代替了不可用的 ρ_{k+1}

    def __post_init__(self):
        if self.bound < 1.0:
            raise ContractViolation(f"condition bound must be >= 1, got {self.bound}")
        if (self.regime is CondRegime.LOCKED) != (self.locked > 0):
            raise ContractViolation(f"regime {self.regime.value} inconsistent with locked={self.locked}")


def _exponentiate(log_bound: float) -> float:
    return math.inf if log_bound > LOG_CAP else math.exp(log_bound)


def eta_factor(interval: FilterInterval, lambda_ell_est: Optional[float], m_ell: int,
               mode: EtaMode = EtaMode.ONE) -> float:
    """
    η：one 模式恒为 1；formula 模式为 (x+1)/(x(x−1))，x = ρ(λ_ℓ)^{m_ℓ}。

    该上界只在 1 < x < 1+√2 时成立，此时 η > 1；x >= 1+√2 时公式不再适用，取 η = 1
    (两者在 x = 1+√2 处相等)。x 接近 1 时公式发散，η 截断为 1e8 并记录警告。
    """
    mode = EtaMode(mode)
    if mode is EtaMode.ONE:
        return 1.0
    if lambda_ell_est is None:
        raise ContractViolation("formula eta needs an estimate of lambda_ell")
    if abs(interval.scaled(lambda_ell_est)) <= 1.0:
        logger.warning(f"lambda_ell estimate {lambda_ell_est:.6g} is inside the filter interval; eta capped at {ETA_CAP:g}")
        return ETA_CAP
    log_x = m_ell * math.log(rho_of(lambda_ell_est, interval))
    if log_x >= math.log(ETA_VALID_LIMIT):
        return 1.0
    x = math.exp(log_x)
    if x <= 1.0 + 1e-8:
        logger.warning(f"rho(lambda_ell)^m = {x:.12g} is too close to 1; eta capped at {ETA_CAP:g}")
        return ETA_CAP
    return (x + 1.0) / (x * (x - 1.0))


def _assemble(regime: CondRegime, eta: float, rho_first: float, m_ell: int, locked: int = 0,
              rho_after_lock: Optional[float] = None, m_after_lock: Optional[int] = None,
              inflated: bool = False) -> CondEstimate:
    log_bound = math.log(eta)
    if rho_after_lock is None:
        log_bound += m_ell * math.log(rho_first)
    else:
        log_bound += m_after_lock * math.log(rho_after_lock) + (m_ell - m_after_lock) * math.log(rho_first)
    return CondEstimate(bound=_exponentiate(log_bound), log_bound=log_bound, eta=eta, rho_first=rho_first,
                        degree_max=m_ell, regime=regime, locked=locked, rho_after_lock=rho_after_lock,
                        degree_after_lock=m_after_lock, inflated=inflated)


def estimate_initial(n: int, ell: int, safety: float = 10.0, has_initial_guess: bool = False) -> CondEstimate:
    """
    第 0 次迭代的随机高斯块：cond ≈ (√n + √ℓ)/(√n − √ℓ)，乘以安全系数。

    调用方给出初始猜测时无法估计，返回 +inf（强制走 shifted 路径）。
    """
    if not 1 <= ell < n:
        raise ContractViolation(f"subspace size {ell} must satisfy 1 <= ell < n={n}")
    if has_initial_guess:
        bound = math.inf
    else:
        bound = safety * (math.sqrt(n) + math.sqrt(ell)) / (math.sqrt(n) - math.sqrt(ell))
    return CondEstimate(bound=bound, log_bound=math.log(bound), eta=1.0, rho_first=math.nan,
                        degree_max=0, regime=CondRegime.INITIAL)


def estimate_uniform(interval: FilterInterval, lambda1_est: float, m: int, eta_mode: EtaMode = EtaMode.ONE,
                     lambda_ell_est: Optional[float] = None) -> CondEstimate:
    """所有列使用相同次数 m 时的上界 η · ρ(λ₁)^m。"""
    if m < 0:
        raise ContractViolation(f"degree must be non-negative, got {m}")
    rho_first = rho_of(lambda1_est, interval)
    eta = eta_factor(interval, lambda_ell_est, m, eta_mode)
    return _assemble(CondRegime.UNIFORM, eta, rho_first, m)


def estimate_optimized(interval: FilterInterval, lambda1_est: float, schedule: DegreeSchedule,
                       eta_mode: EtaMode = EtaMode.ONE, lambda_ell_est: Optional[float] = None) -> CondEstimate:
    """逐列次数时的上界 η · ρ(λ₁)^{m_ℓ}，m_ℓ 为最大次数 (最后一列)。"""
    if len(schedule) == 0:
        raise ContractViolation("empty degree schedule")
    rho_first = rho_of(lambda1_est, interval)
    m_ell = schedule.last
    eta = eta_factor(interval, lambda_ell_est, m_ell, eta_mode)
    return _assemble(CondRegime.OPTIMIZED, eta, rho_first, m_ell)


def estimate_locked(interval: FilterInterval, ritz_values: Sequence[float], schedule: DegreeSchedule,
                    locked: int, eta_mode: EtaMode = EtaMode.ONE, lambda1_est: Optional[float] = None,
                    lambda_ell_est: Optional[float] = None) -> CondEstimate:
    """
    锁定 k 列后，对 [Y | 滤波后的活动列] 的上界：

        η · ρ(θ_{k+1})^{m_{k+1}} · ρ(λ₁)^{m_ℓ − m_{k+1}}

    Args:
        interval: 抑制区间
        ritz_values: 活动列的 Ritz 值 (第一个为 θ_{k+1})
        schedule: 与活动列对齐的次数
        locked: 已锁定列数 k；为 0 时退化为 estimate_optimized
        lambda1_est: λ₁ 的估计，缺省取 ritz_values[0]
        lambda_ell_est: formula 模式下 λ_ℓ 的估计
    """
    if locked < 0:
        raise ContractViolation(f"locked count must be non-negative, got {locked}")
    if len(ritz_values) != len(schedule) or len(schedule) == 0:
        raise ContractViolation(f"{len(ritz_values)} Ritz values for a schedule of {len(schedule)} columns")
    theta_next = float(ritz_values[0])
    if lambda1_est is None:
        lambda1_est = theta_next
    if locked == 0:
        return estimate_optimized(interval, lambda1_est, schedule, eta_mode, lambda_ell_est)

    rho_first = rho_of(lambda1_est, interval)
    m_ell = schedule.last
    m_next = schedule.first
    eta = eta_factor(interval, lambda_ell_est, m_ell, eta_mode)
    if abs(interval.scaled(theta_next)) <= 1.0:
        logger.warning(f"theta_(k+1)={theta_next:.6g} lies inside the filter interval; using rho(lambda_1) instead")
        return _assemble(CondRegime.LOCKED, eta, rho_first, m_ell, locked=locked,
                         rho_after_lock=rho_first, m_after_lock=m_next, inflated=True)
    rho_next = rho_of(theta_next, interval)
    return _assemble(CondRegime.LOCKED, eta, rho_first, m_ell, locked=locked,
                     rho_after_lock=rho_next, m_after_lock=m_next)
