from .SolveS import SolveOutcome, SolveService, mode_summary
from .CondTraceS import CondTraceOutcome, CondTraceService, exact_cond_hook, run_cond_trace
from .CompareQrS import CompareQrOutcome, CompareQrService, compare_results, run_compare_qr
