from .cond import (
    CondEstimate,
    CondRegime,
    EtaMode,
    eta_factor,
    estimate_initial,
    estimate_locked,
    estimate_optimized,
    estimate_uniform,
)
from .filter import DegreeSchedule, FilteredBlock, choose_degrees, filter_block, scalar_filter_value
from .qr import (
    QrChoice,
    QrMode,
    QrVariant,
    cholesky_qr,
    dynamic_caqr,
    orthonormalize,
    shift_for,
    shifted_cholesky_qr2,
)
from .solver import (
    IterationTrace,
    PreQrHook,
    SolveResult,
    SolverConfig,
    Subspace,
    lock_and_deflate,
    rayleigh_ritz,
    residuals,
    solve,
)
from .spectral import FilterInterval, SpectralBounds, cheb_scalar, convergence_ratio, lanczos_bounds, rho_of
