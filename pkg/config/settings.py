"""
项目配置文件
"""
import logging
from pathlib import Path

# 项目相关设置
PROJECT_NAME = "chase-caqr"
PROJECT_VERSION = "0.1.0"
PROJECT_ROOT = Path(__file__).parent.parent  # 项目根目录(settings.py路径不更改的情况下)

# 日志配置
LOG_LEVEL = logging.INFO
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# 数值常量
UNIT_ROUNDOFF = 2.0 ** -53  # 双精度单位舍入误差 u
DENSE_CAP = 8192            # 稠密特征分解允许的最大阶数

# 求解器默认配置
SOLVER = {
    "nev": 10,
    "nex": 10,
    "tol": 1e-10,
    "tol_mode": "absolute",      # 可选值: "absolute", "relative"
    "base_degree": 20,           # 第一次迭代 / no-opt 模式使用的多项式次数
    "max_degree": 36,            # 次数优化的上限
    "min_degree": 3,             # 次数优化的下限
    "degree_opt": True,
    "eta_mode": "one",           # 可选值: "one", "formula"
    "qr_mode": "dynamic",        # 可选值: "dynamic", "householder_only", "cholqr1", "cholqr2", "shifted"
    "max_iterations": 50,
    "seed": 1234,
    "lanczos_steps": 25,
    "lanczos_max_restarts": 3,
    "inner_edge_override": None,  # 已知谱时可以直接指定 λ_ℓ
    "initial_cond_safety": 10.0,  # 随机初始块条件数估计的安全系数
}

# QR 选择配置
QR = {
    "shifted_threshold": 1e8,    # estCond 大于该值时使用 shifted CholeskyQR2
    "cholqr1_threshold": 20.0,   # estCond 小于该值时使用 CholeskyQR1
    "shift_norm": "frobenius",   # 可选值: "frobenius", "frobenius_squared"
}

# 合成矩阵默认配置
MATRIX = {
    "n": 500,
    "spectrum": "uniform",       # 可选值: "uniform", "clustered_dft", "explicit"
    "lo": 1.0,
    "hi": 500.0,
    "cluster_frac": 0.1,
    "cluster_size": 4,
    "scalar_kind": "real64",     # 可选值: "real64", "complex128"
    "seed": 2024,
}

# 实验配置
HARNESS = {
    "out_dir": PROJECT_ROOT / "out",
    "oracle_budget": 2000 * 200,  # Jacobi SVD 预言机允许的 n·ℓ 上限
    "csv_precision": 17,
    # 默认的合成矩阵测试集: (名称, 矩阵配置, nev, nex)
    "suite": [
        ("uniform-500-real", {"n": 500, "spectrum": "uniform", "lo": 1.0, "hi": 500.0}, 20, 10),
        ("clustered-500-complex", {"n": 500, "spectrum": "clustered_dft", "lo": -10.0, "hi": 90.0,
                                   "scalar_kind": "complex128"}, 20, 10),
        ("uniform-1000-complex", {"n": 1000, "spectrum": "uniform", "lo": -5.0, "hi": 5.0,
                                  "scalar_kind": "complex128"}, 50, 20),
        ("clustered-1000-real", {"n": 1000, "spectrum": "clustered_dft", "lo": -10.0, "hi": 90.0}, 50, 20),
        ("uniform-2000-real", {"n": 2000, "spectrum": "uniform", "lo": 0.0, "hi": 100.0}, 100, 40),
        ("clustered-2000-real", {"n": 2000, "spectrum": "clustered_dft", "lo": -10.0, "hi": 90.0}, 100, 40),
    ],
}
