from .dense import (
    CholeskyFailure,
    EigDecomposition,
    ScalarKind,
    SvdCond,
    as_dense,
    cholesky,
    gemm,
    gram,
    hermitian_eig,
    householder_qr,
    jacobi_svd_cond,
    scalar_kind,
)
from .operator import HermitianOperator

__all__ = [
    "CholeskyFailure",
    "EigDecomposition",
    "HermitianOperator",
    "ScalarKind",
    "SvdCond",
    "as_dense",
    "cholesky",
    "gemm",
    "gram",
    "hermitian_eig",
    "householder_qr",
    "jacobi_svd_cond",
    "scalar_kind",
]
