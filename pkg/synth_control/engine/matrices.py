from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from synth_control.panel.dataset import PanelDataset
from synth_control.panel.study import StudySpec


def lag_label(outcome: str, panel: PanelDataset, week: int) -> str:
    return f"{outcome}@{panel.week_index[week].isoformat()}"


@dataclass(frozen=True, eq=False)
class ScmMatrices:
    """
    Pre-treatment blocks of one study.

    Column ``j`` of ``X0`` and ``Z0`` belongs to ``donors[j]``; row ``m`` of
    ``X1``/``X0`` to ``predictors[m]``. ``scale`` holds the per-predictor
    standard deviation across units used to make predictor rows comparable.
    """

    predictors: Tuple[str, ...]
    donors: Tuple[str, ...]
    X1: np.ndarray
    X0: np.ndarray
    Z1: np.ndarray
    Z0: np.ndarray
    scale: np.ndarray

    @property
    def k(self) -> int:
        return len(self.predictors)

    @property
    def n_donors(self) -> int:
        return len(self.donors)

    @property
    def X1_scaled(self) -> np.ndarray:
        return self.X1 / self.scale

    @property
    def X0_scaled(self) -> np.ndarray:
        return self.X0 / self.scale[:, np.newaxis]


def predictor_scale(X1: np.ndarray, X0: np.ndarray) -> np.ndarray:
    """Sample standard deviation of each predictor across treated and donors; 1 where flat."""
    stacked = np.column_stack([X1, X0])
    scale = stacked.std(axis=1, ddof=1)
    return np.where(scale > 0, scale, 1.0)


def build_matrices(
    panel: PanelDataset, spec: StudySpec, scale: Optional[np.ndarray] = None
) -> ScmMatrices:
    """
    Predictor rows are pre-window means per unit; outcome-lag rows are the
    outcome at the lag week. ``Z`` holds the raw pre-window outcomes.

    Donor columns are in label order whatever the order of
    ``spec.donor_units``. A given ``scale`` is used as is; otherwise it is
    computed over the study's units.
    """
    pre = spec.pre_weeks
    donors = tuple(sorted(spec.donor_units))
    units = (spec.treated_unit,) + donors
    rows_treated, rows_donors, labels = [], [], []
    for predictor in spec.predictor_variables:
        values = panel.matrix(predictor, units)[pre]
        means = values.mean(axis=0)
        rows_treated.append(means[0])
        rows_donors.append(means[1:])
        labels.append(predictor)

    outcome = panel.matrix(spec.outcome_variable, units)
    for week in spec.outcome_lags:
        rows_treated.append(outcome[week, 0])
        rows_donors.append(outcome[week, 1:])
        labels.append(lag_label(spec.outcome_variable, panel, week))

    X1 = np.array(rows_treated, dtype=float)
    X0 = np.array(rows_donors, dtype=float).reshape(len(labels), len(donors))
    if scale is None:
        scale = predictor_scale(X1, X0)
    else:
        scale = np.asarray(scale, dtype=float)
        if scale.shape != (len(labels),):
            raise ValueError(
                f"Predictor scale has shape {scale.shape}, expected ({len(labels)},)"
            )
    return ScmMatrices(
        predictors=tuple(labels),
        donors=donors,
        X1=X1,
        X0=X0,
        Z1=outcome[pre, 0].astype(float),
        Z0=outcome[pre, 1:].astype(float),
        scale=scale,
    )
