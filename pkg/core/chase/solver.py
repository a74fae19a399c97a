"""
Chebyshev 加速的子空间迭代求解器主循环：
滤波 → QR（锁定前缀 + 滤波块）→ Rayleigh–Ritz → 残差 → 锁定。
"""
import logging
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config import settings
from core.errors import ContractViolation
from core.linalg import HermitianOperator, ScalarKind, as_dense, hermitian_eig
from utils.helpers import random_block
from .cond import CondEstimate, CondRegime, EtaMode, estimate_initial, estimate_locked, \
    estimate_optimized, estimate_uniform
from .filter import DegreeSchedule, choose_degrees, filter_block
from .qr import QrChoice, QrMode, QrVariant, orthonormalize
from .spectral import FilterInterval, SpectralBounds, lanczos_bounds

logger = logging.getLogger(__name__)

# QR 之前的回调：参数为 (迭代序号, 待分解的 n×ℓ 块)，返回精确条件数或 None
PreQrHook = Callable[[int, np.ndarray], Optional[float]]


class SolverConfig(BaseModel):
    """求解器配置，默认值来自 settings.SOLVER 与 settings.QR"""
    model_config = ConfigDict(frozen=True)

    nev: int = Field(ge=1)
    nex: int = Field(ge=1)
    tol: float = Field(gt=0)
    tol_mode: Literal["absolute", "relative"] = "absolute"
    base_degree: int = Field(ge=1)
    max_degree: int = Field(ge=1)
    min_degree: int = Field(default=3, ge=1)
    degree_opt: bool = True
    eta_mode: EtaMode = EtaMode.ONE
    qr_mode: QrMode = QrMode.DYNAMIC
    max_iterations: int = Field(ge=1)
    seed: int = 0
    lanczos_steps: int = Field(default=25, ge=4)
    lanczos_max_restarts: int = Field(default=3, ge=0)
    inner_edge_override: Optional[float] = None
    initial_cond_safety: float = Field(default=10.0, ge=1.0)
    shifted_threshold: float = Field(default=1e8, gt=1.0)
    cholqr1_threshold: float = Field(default=20.0, gt=1.0)
    shift_norm: Literal["frobenius", "frobenius_squared"] = "frobenius"

    @model_validator(mode="after")
    def _check_degrees(self) -> "SolverConfig":
        if self.base_degree > self.max_degree:
            raise ValueError(f"base_degree {self.base_degree} exceeds max_degree {self.max_degree}")
        if self.min_degree > self.max_degree:
            raise ValueError(f"min_degree {self.min_degree} exceeds max_degree {self.max_degree}")
        if self.cholqr1_threshold >= self.shifted_threshold:
            raise ValueError("cholqr1_threshold must be below shifted_threshold")
        return self

    @property
    def ell(self) -> int:
        return self.nev + self.nex

    @classmethod
    def from_settings(cls, **overrides) -> "SolverConfig":
        """以 settings 为默认值构造；值为 None 的覆盖项被忽略。"""
        values = {**settings.SOLVER, **settings.QR}
        values.update({key: value for key, value in overrides.items() if value is not None})
        try:
            return cls(**values)
        except ValidationError as e:
            raise ContractViolation(f"invalid solver configuration: {e}") from e


@dataclass
class Subspace:
    """n×ℓ 搜索块；前 locked 列为已锁定的特征向量"""
    block: np.ndarray
    locked: int
    ritz_values: np.ndarray
    residual_norms: Optional[np.ndarray] = None

    @property
    def width(self) -> int:
        return self.block.shape[1]

    @property
    def active(self) -> int:
        return self.width - self.locked


@dataclass(frozen=True)
class LockOutcome:
    sub: Subspace
    newly_locked: int


@dataclass(frozen=True)
class RitzProjection:
    """Rayleigh–Ritz 结果；applied 为 A·(活动 Ritz 向量)，供残差复用"""
    rotated: np.ndarray
    ritz_values: np.ndarray
    applied: np.ndarray


@dataclass(frozen=True)
class IterationTrace:
    """每次迭代的记录，iter=0 对应随机初始块的 QR"""
    iter: int
    locked: int
    deg_min: int
    deg_max: int
    cond_est: float
    cond_exact: Optional[float]
    qr_variant: QrVariant
    shift: Optional[float]
    res_max: Optional[float]
    res_min: Optional[float]
    matvecs: int
    regime: CondRegime = CondRegime.UNIFORM
    eta: float = 1.0
    newly_locked: int = 0
    qr_seconds: float = field(default=0.0, compare=False)

    @property
    def dominated(self) -> bool:
        """cond_est >= cond_exact（没有精确值时视为成立）"""
        return self.cond_exact is None or self.cond_est >= self.cond_exact


@dataclass
class SolveResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    iterations: int
    matvecs: int
    traces: list[IterationTrace]
    converged: bool
    locked: int = 0
    tol: float = 0.0
    final_residuals: np.ndarray = field(default_factory=lambda: np.empty(0))
    bounds: Optional[SpectralBounds] = None
    wall_seconds: float = 0.0
    qr_seconds: float = 0.0

    @property
    def verified(self) -> bool:
        """事后重新计算的残差是否全部不超过 tol"""
        return bool(self.final_residuals.size) and bool(np.all(self.final_residuals <= self.tol))

    @property
    def qr_variants(self) -> list[str]:
        return [trace.qr_variant.value for trace in self.traces]


def rayleigh_ritz(A: HermitianOperator, Q: np.ndarray, locked: int) -> RitzProjection:
    """
    在活动子块 Q[:, k:] 上做 Rayleigh–Ritz，锁定前缀保持不变。

    Args:
        A: Hermitian 算子
        Q: 列正交的 n×ℓ 块
        locked: 已锁定列数 k

    Returns:
        RitzProjection：旋转后的块、活动部分的 Ritz 值（升序）以及 A·V
    """
    Q = as_dense(Q, "Q")
    if not 0 <= locked < Q.shape[1]:
        raise ContractViolation(f"locked={locked} leaves no active columns in a block of width {Q.shape[1]}")
    active = Q[:, locked:]
    AQ = A.apply(active)
    H = active.conj().T @ AQ
    eig = hermitian_eig((H + H.conj().T) / 2)
    rotated = Q.copy()
    rotated[:, locked:] = active @ eig.vectors
    return RitzProjection(rotated=rotated, ritz_values=eig.values, applied=AQ @ eig.vectors)


def residuals(A: HermitianOperator, V: np.ndarray, ritz_values, applied: Optional[np.ndarray] = None) -> np.ndarray:
    """‖A·v − θ·v‖₂ / ‖v‖₂，逐列计算；零列返回 +inf。"""
    V = as_dense(V, "V")
    theta = np.asarray(ritz_values, dtype=float)
    if theta.shape != (V.shape[1],):
        raise ContractViolation(f"{theta.size} Ritz values for {V.shape[1]} columns")
    AV = A.apply(V) if applied is None else applied
    numerator = np.linalg.norm(AV - V * theta, axis=0)
    denominator = np.linalg.norm(V, axis=0)
    out = np.full(V.shape[1], np.inf)
    nonzero = denominator > 0
    out[nonzero] = numerator[nonzero] / denominator[nonzero]
    return out


def lock_and_deflate(sub: Subspace, residual_norms, tol: float, nev: Optional[int] = None) -> LockOutcome:
    """
    锁定活动列中残差 < tol 的最长前缀。

    Args:
        sub: 当前子空间
        residual_norms: 与活动列对齐的残差
        tol: 收敛阈值
        nev: 只有前 nev 个 Ritz 对可以被锁定；None 表示不限制
    """
    residual_norms = np.asarray(residual_norms, dtype=float)
    if residual_norms.shape != (sub.active,):
        raise ContractViolation(f"{residual_norms.size} residuals for {sub.active} active columns")
    limit = sub.active if nev is None else max(0, min(sub.active, nev - sub.locked))
    run = 0
    while run < limit and residual_norms[run] < tol:
        run += 1
    if run == 0:
        return LockOutcome(sub=sub, newly_locked=0)
    return LockOutcome(sub=replace(sub, locked=sub.locked + run), newly_locked=run)


def _initial_block(n: int, ell: int, complex_entries: bool, rng: np.random.Generator,
                   initial_guess) -> np.ndarray:
    if initial_guess is None:
        return random_block(n, ell, rng, complex_entries)
    guess = as_dense(initial_guess, "initial_guess")
    if guess.shape[0] != n or not 1 <= guess.shape[1] <= ell:
        raise ContractViolation(f"initial guess has shape {guess.shape}, expected ({n}, 1..{ell})")
    if np.iscomplexobj(guess) and not complex_entries:
        raise ContractViolation("complex initial guess for a real operator")
    fill = random_block(n, ell - guess.shape[1], rng, complex_entries)
    dtype = np.complex128 if complex_entries else np.float64
    return np.hstack([guess.astype(dtype), fill])


def _below_interval(point: float, interval: FilterInterval) -> float:
    """归一化点必须严格在区间左侧；退化时稍微移出区间。"""
    if point < interval.lower:
        return point
    shifted = interval.lower - 1e-10 * max(1.0, abs(interval.lower), interval.half_width)
    logger.warning(f"normalization point {point:.12g} is not below the interval edge {interval.lower:.12g}; "
                   f"using {shifted:.12g}")
    return shifted


class _Iteration:
    """单次求解的可变状态。"""

    def __init__(self, operator: HermitianOperator, config: SolverConfig, bounds: SpectralBounds,
                 tol: float, on_pre_qr: Optional[PreQrHook]):
        self.operator = operator
        self.config = config
        self.bounds = bounds
        self.tol = tol
        self.on_pre_qr = on_pre_qr
        self.ell = config.ell
        self.locked = 0
        self.locked_vectors = np.empty((operator.n, 0))
        self.locked_values = np.empty(0)
        self.locked_residuals = np.empty(0)
        self.ritz: Optional[np.ndarray] = None
        self.residuals: Optional[np.ndarray] = None
        self.alpha = bounds.inner_edge
        self.upper = bounds.upper_bound
        self.matvecs = 0
        self.qr_seconds = 0.0
        self.traces: list[IterationTrace] = []

    def orthonormalize(self, iteration: int, block: np.ndarray,
                       estimate: CondEstimate) -> tuple[np.ndarray, QrChoice, Optional[float], float]:
        cond_exact = self.on_pre_qr(iteration, block) if self.on_pre_qr is not None else None
        started = time.perf_counter()
        Q, choice = orthonormalize(block, estimate.bound, self.config.qr_mode,
                                   shifted_threshold=self.config.shifted_threshold,
                                   cholqr1_threshold=self.config.cholqr1_threshold,
                                   shift_norm=self.config.shift_norm)
        seconds = time.perf_counter() - started
        self.qr_seconds += seconds
        if self.locked:
            Q[:, :self.locked] = self.locked_vectors
        if cond_exact is not None and cond_exact > estimate.bound:
            logger.warning(f"Iteration {iteration}: cond_exact={cond_exact:.6e} exceeds cond_est={estimate.bound:.6e}")
        return Q, choice, cond_exact, seconds

    def schedule(self, iteration: int, interval: FilterInterval) -> DegreeSchedule:
        active = self.ell - self.locked
        if iteration == 1 or not self.config.degree_opt:
            return DegreeSchedule.constant(active, self.config.base_degree, self.config.max_degree)
        return choose_degrees(self.ritz[self.locked:], self.residuals[self.locked:], interval, self.tol,
                              self.config.base_degree, self.config.max_degree, self.config.min_degree)

    def estimate(self, iteration: int, interval: FilterInterval, schedule: DegreeSchedule,
                 lambda1_est: float, lambda_ell_est: float) -> CondEstimate:
        eta_mode = self.config.eta_mode
        if self.locked > 0:
            return estimate_locked(interval, self.ritz[self.locked:], schedule, self.locked, eta_mode,
                                   lambda1_est=lambda1_est, lambda_ell_est=lambda_ell_est)
        if iteration == 1 or not self.config.degree_opt:
            return estimate_uniform(interval, lambda1_est, schedule.last, eta_mode, lambda_ell_est)
        return estimate_optimized(interval, lambda1_est, schedule, eta_mode, lambda_ell_est)

    def next_interval(self) -> None:
        """区间左端取最大的 Ritz 值，右端沿用 Lanczos 上界。"""
        self.alpha = float(self.ritz[-1])
        if self.upper <= self.alpha:
            self.upper = self.alpha + 1e-8 * max(1.0, abs(self.alpha))
            logger.warning(f"largest Ritz value reached the Lanczos upper bound; upper edge moved to {self.upper:.12g}")


def solve(A, config: SolverConfig, initial_guess=None, on_pre_qr: Optional[PreQrHook] = None) -> SolveResult:
    """
    计算 A 的 nev 个最小特征对。

    Args:
        A: HermitianOperator，或可以被包装的稠密/稀疏矩阵
        config: SolverConfig
        initial_guess: 可选的 n×p (p <= ℓ) 初始向量，不足的列用随机向量补齐
        on_pre_qr: 每次 QR 之前调用的回调，返回值记为该次迭代的 cond_exact

    Returns:
        SolveResult；达到 max_iterations 仍未收敛时 converged=False，不抛出异常
    """
    operator = A if isinstance(A, HermitianOperator) else HermitianOperator(A)
    n, nev, ell = operator.n, config.nev, config.ell
    if ell >= n:
        raise ContractViolation(f"nev + nex = {ell} must be smaller than n = {n}")
    if not operator.check_hermitian(seed=config.seed):
        raise ContractViolation("operator is not Hermitian within 1e-12·‖A‖")

    started = time.perf_counter()
    bounds = lanczos_bounds(operator, ell, steps=config.lanczos_steps, seed=config.seed,
                            max_restarts=config.lanczos_max_restarts,
                            inner_edge_override=config.inner_edge_override)
    tol = config.tol
    if config.tol_mode == "relative":
        tol *= max(abs(bounds.lower_est), abs(bounds.upper_bound))
    logger.info(f"Solving n={n}, nev={nev}, nex={config.nex}, tol={tol:.3e}, qr_mode={config.qr_mode.value}, "
                f"bounds=[{bounds.lower_est:.6g}, {bounds.inner_edge:.6g}, {bounds.upper_bound:.6g}]")

    state = _Iteration(operator, config, bounds, tol, on_pre_qr)
    complex_entries = operator.kind is ScalarKind.COMPLEX128
    rng = np.random.default_rng((config.seed, 1))
    block = _initial_block(n, ell, complex_entries, rng, initial_guess)

    initial = estimate_initial(n, ell, config.initial_cond_safety, has_initial_guess=initial_guess is not None)
    block, choice, cond_exact, seconds = state.orthonormalize(0, block, initial)
    state.traces.append(IterationTrace(
        iter=0, locked=0, deg_min=0, deg_max=0, cond_est=initial.bound, cond_exact=cond_exact,
        qr_variant=choice.variant, shift=choice.shift_applied, res_max=None, res_min=None, matvecs=0,
        regime=initial.regime, eta=initial.eta, qr_seconds=seconds))

    converged = False
    iteration = 0
    for iteration in range(1, config.max_iterations + 1):
        locked = state.locked
        interval = FilterInterval.from_edges(state.alpha, state.upper)
        if iteration == 1:
            filter_point = bounds.lower_est
            lambda1_est = bounds.lower_est - bounds.lower_margin
            lambda_ell_est = bounds.lower_est + (bounds.inner_edge - bounds.lower_est) * nev / ell
        else:
            filter_point = float(state.ritz[locked])
            lambda1_est = float(state.ritz[0])
            lambda_ell_est = float(state.ritz[nev - 1])
        filter_point = _below_interval(filter_point, interval)
        lambda1_est = min(lambda1_est, filter_point)

        schedule = state.schedule(iteration, interval)
        filtered = filter_block(operator, block[:, locked:], interval, filter_point, schedule)
        state.matvecs += filtered.matvec_count
        candidate = np.hstack([state.locked_vectors.astype(filtered.filtered.dtype), filtered.filtered])

        estimate = state.estimate(iteration, interval, schedule, lambda1_est, lambda_ell_est)
        Q, choice, cond_exact, seconds = state.orthonormalize(iteration, candidate, estimate)

        projection = rayleigh_ritz(operator, Q, locked)
        block = projection.rotated
        active_residuals = residuals(operator, block[:, locked:], projection.ritz_values, projection.applied)
        state.ritz = np.concatenate([state.locked_values, projection.ritz_values])
        state.residuals = np.concatenate([state.locked_residuals, active_residuals])

        outcome = lock_and_deflate(Subspace(block, locked, state.ritz, state.residuals), active_residuals, tol, nev)
        if outcome.newly_locked:
            state.locked = outcome.sub.locked
            state.locked_vectors = block[:, :state.locked].copy()
            state.locked_values = state.ritz[:state.locked].copy()
            state.locked_residuals = state.residuals[:state.locked].copy()

        state.traces.append(IterationTrace(
            iter=iteration, locked=state.locked, deg_min=int(schedule.degrees.min()),
            deg_max=int(schedule.degrees.max()), cond_est=estimate.bound, cond_exact=cond_exact,
            qr_variant=choice.variant, shift=choice.shift_applied, res_max=float(active_residuals.max()),
            res_min=float(active_residuals.min()), matvecs=state.matvecs, regime=estimate.regime,
            eta=estimate.eta, newly_locked=outcome.newly_locked, qr_seconds=seconds))
        logger.info(f"Iteration {iteration}: locked={state.locked}/{nev}, degrees={schedule.degrees.min()}.."
                    f"{schedule.degrees.max()}, cond_est={estimate.bound:.3e} ({estimate.regime.value}), "
                    f"qr={choice.variant.value}, res_max={active_residuals.max():.3e}")

        if state.locked >= nev:
            converged = True
            break
        state.next_interval()

    if not converged:
        logger.warning(f"Not converged after {config.max_iterations} iterations ({state.locked}/{nev} locked)")

    eigenvalues = state.ritz[:nev].copy()
    eigenvectors = block[:, :nev].copy()
    final_residuals = residuals(operator, eigenvectors, eigenvalues)
    result = SolveResult(
        eigenvalues=eigenvalues, eigenvectors=eigenvectors, iterations=iteration, matvecs=state.matvecs,
        traces=state.traces, converged=converged, locked=state.locked, tol=tol,
        final_residuals=final_residuals, bounds=bounds,
        wall_seconds=time.perf_counter() - started, qr_seconds=state.qr_seconds)
    if converged and not result.verified:
        logger.warning(f"Post-hoc residual check failed: max residual {final_residuals.max():.3e} > tol {tol:.3e}")
    return result
