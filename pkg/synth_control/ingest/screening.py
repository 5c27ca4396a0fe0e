from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from synth_control.panel.dataset import PanelDataset

DEFAULT_THRESHOLD = 0.7


@dataclass(frozen=True)
class ScreeningDecision:
    variable: str
    kept: bool
    reason: str
    max_abs_correlation: Optional[float] = None
    correlated_with: Optional[str] = None

    def to_dict(self):
        return asdict(self)


def screen_predictors_with_decisions(
    panel: PanelDataset,
    candidates: Sequence[str],
    threshold: float,
    treated: str,
    pre_window: Tuple[int, int],
) -> Tuple[List[str], List[ScreeningDecision]]:
    """
    Greedy correlation screen over the treated unit's pre-treatment series.

    Candidates are visited in the given order; one is kept when its absolute
    Pearson correlation with every already-kept candidate is at most
    ``threshold``. Constant series have no defined correlation and are dropped.
    """
    if not 0 < threshold <= 1:
        raise ValueError(f"Screening threshold must be in (0, 1], got {threshold}")
    first, last = pre_window
    kept: List[str] = []
    kept_series: List[np.ndarray] = []
    decisions: List[ScreeningDecision] = []

    for variable in candidates:
        series = panel.series(variable, treated)[first : last + 1]
        if np.std(series) == 0:
            logger.warning(
                f"Dropping predictor '{variable}': constant over the pre-treatment window"
            )
            decisions.append(ScreeningDecision(variable, False, "constant"))
            continue

        worst, worst_name = 0.0, None
        for name, other in zip(kept, kept_series):
            r = abs(float(np.corrcoef(series, other)[0, 1]))
            if r > worst:
                worst, worst_name = r, name

        if worst > threshold:
            logger.info(
                f"Excluding predictor '{variable}': |r| = {worst:.3f} with '{worst_name}'"
            )
            decisions.append(
                ScreeningDecision(variable, False, "correlated", worst, worst_name)
            )
            continue

        kept.append(variable)
        kept_series.append(series)
        decisions.append(
            ScreeningDecision(
                variable, True, "kept", worst if worst_name else None, worst_name
            )
        )
    return kept, decisions


def screen_predictors(
    panel: PanelDataset,
    candidates: Sequence[str],
    threshold: float,
    treated: str,
    pre_window: Tuple[int, int],
) -> List[str]:
    kept, _ = screen_predictors_with_decisions(
        panel, candidates, threshold, treated, pre_window
    )
    return kept
