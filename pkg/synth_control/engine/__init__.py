from .fit import (
    BalanceRow,
    BalanceTable,
    FitResult,
    balance_table,
    effect_summary,
    fit_study,
    gap_series,
    synthesize,
)
from .matrices import ScmMatrices, build_matrices
from .weights import OptimizerOptions, optimize_v, solve_w

__all__ = [
    "BalanceRow",
    "BalanceTable",
    "FitResult",
    "OptimizerOptions",
    "ScmMatrices",
    "balance_table",
    "build_matrices",
    "effect_summary",
    "fit_study",
    "gap_series",
    "optimize_v",
    "solve_w",
    "synthesize",
]
