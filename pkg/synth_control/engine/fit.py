from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from synth_control.engine.matrices import ScmMatrices, build_matrices
from synth_control.engine.weights import (
    OptimizerOptions,
    optimize_v_detailed,
    solve_weights,
)
from synth_control.errors import EmptyWindow, LengthMismatch
from synth_control.panel.dataset import PanelDataset
from synth_control.panel.study import (
    DonorWeights,
    PredictorWeights,
    StudySpec,
    validate_spec,
)


@dataclass(frozen=True)
class BalanceRow:
    predictor: str
    treated: float
    synthetic: float
    sample_mean: float

    @property
    def improvement(self) -> float:
        """How much closer the synthetic is to the treated than the donor average is."""
        return abs(self.treated - self.sample_mean) - abs(self.treated - self.synthetic)

    def to_dict(self) -> Dict[str, float]:
        return {
            "predictor": self.predictor,
            "treated": self.treated,
            "synthetic": self.synthetic,
            "sample_mean": self.sample_mean,
            "improvement": self.improvement,
        }


@dataclass(frozen=True)
class BalanceTable:
    rows: Tuple[BalanceRow, ...]

    @property
    def improved_count(self) -> int:
        """Predictors where the synthetic matches better than the sample mean."""
        return sum(1 for row in self.rows if row.improvement > 0)

    def to_records(self) -> List[Dict[str, float]]:
        return [row.to_dict() for row in self.rows]


@dataclass(frozen=True, eq=False)
class FitResult:
    spec: StudySpec
    donor_weights: DonorWeights
    predictor_weights: PredictorWeights
    treated_outcome: np.ndarray
    synthetic_outcome: np.ndarray
    gap: np.ndarray
    pre_mspe: float
    post_mspe: float
    average_post_gap: float
    balance: BalanceTable
    diagnostics: Dict[str, object] = field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return bool(self.diagnostics.get("degenerate", False))

    @property
    def pre_rmspe(self) -> float:
        return float(np.sqrt(self.pre_mspe))


def synthesize(panel: PanelDataset, spec: StudySpec, w: DonorWeights) -> np.ndarray:
    """synthetic[t] = sum_j w_j * outcome_j[t] over the whole panel horizon, summed in label order."""
    donors = sorted(spec.donor_units)
    return panel.matrix(spec.outcome_variable, donors) @ w.as_array(donors)


def gap_series(treated, synthetic) -> np.ndarray:
    treated = np.asarray(treated, dtype=float)
    synthetic = np.asarray(synthetic, dtype=float)
    if treated.shape != synthetic.shape:
        raise LengthMismatch(treated.size, synthetic.size)
    return treated - synthetic


def _window(gap: np.ndarray, window: Tuple[int, int], name: str) -> np.ndarray:
    first, last = window
    if first < 0 or last < first or last >= gap.size:
        raise EmptyWindow(name)
    return gap[first : last + 1]


def effect_summary(gap, spec: StudySpec) -> Tuple[float, float, float]:
    """Returns ``(average_post_gap, pre_mspe, post_mspe)``."""
    gap = np.asarray(gap, dtype=float)
    pre = _window(gap, spec.pre_window, "pre-treatment")
    post = _window(gap, spec.post_window, "post-treatment")
    return float(post.mean()), float(np.mean(pre**2)), float(np.mean(post**2))


def balance_table(m: ScmMatrices, w: DonorWeights) -> BalanceTable:
    """Treated, synthetic and donor-average predictor values in raw units."""
    synthetic = m.X0 @ w.as_array(m.donors)
    sample_mean = m.X0.mean(axis=1)
    return BalanceTable(
        tuple(
            BalanceRow(p, float(t), float(s), float(a))
            for p, t, s, a in zip(m.predictors, m.X1, synthetic, sample_mean)
        )
    )


def fit_study(
    panel: PanelDataset,
    spec: StudySpec,
    options: Optional[OptimizerOptions] = None,
    predictor_weights: Optional[PredictorWeights] = None,
    scale: Optional[np.ndarray] = None,
) -> FitResult:
    """
    Fit one synthetic control. With ``predictor_weights`` given V is held
    fixed and only W is solved; otherwise V is searched. ``scale`` fixes the
    predictor standardization, e.g. to that of a larger donor pool.

    Donor weights come back keyed in ``spec.donor_units`` order.
    """
    validate_spec(spec, panel)
    m = build_matrices(panel, spec, scale)

    if predictor_weights is None:
        outer = optimize_v_detailed(m, options)
        v, inner, evaluations = outer.predictor_weights, outer.inner, outer.evaluations
    else:
        v, inner, evaluations = predictor_weights, solve_weights(m, predictor_weights), 1
    weights = DonorWeights({d: inner.weights.weights[d] for d in spec.donor_units})

    treated = panel.series(spec.outcome_variable, spec.treated_unit).astype(float)
    synthetic = synthesize(panel, spec, weights)
    gap = gap_series(treated, synthetic)
    average_post_gap, pre, post = effect_summary(gap, spec)

    if inner.degenerate:
        logger.warning(
            f"Synthetic '{spec.treated_unit}': optimal donor weights are not unique"
        )
    logger.debug(
        f"Fitted '{spec.treated_unit}' on {len(spec.donor_units)} donors: "
        f"pre-MSPE {pre:.6g}, post-MSPE {post:.6g}, average gap {average_post_gap:.6g}"
    )
    return FitResult(
        spec=spec,
        donor_weights=weights,
        predictor_weights=v,
        treated_outcome=treated,
        synthetic_outcome=synthetic,
        gap=gap,
        pre_mspe=pre,
        post_mspe=post,
        average_post_gap=average_post_gap,
        balance=balance_table(m, weights),
        diagnostics={
            "degenerate": inner.degenerate,
            "inner_objective": inner.objective,
            "solver": inner.method,
            "v_evaluations": evaluations,
        },
    )
