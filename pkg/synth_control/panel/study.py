from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from synth_control.errors import (
    ConfigError,
    DuplicateUnit,
    InsufficientDonors,
    InsufficientPreWindow,
    InvalidWindow,
    TreatedInDonorPool,
    UnknownVariable,
)
from synth_control.panel.dataset import PanelDataset, WeekKey

MIN_PRE_WEEKS = 2
RECOMMENDED_PRE_WEEKS = 8
SIMPLEX_TOLERANCE = 1e-9

Window = Tuple[int, int]


@dataclass(frozen=True)
class StudySpec:
    """
    One SCM study. Weeks are positions in the panel's ``week_index``; windows
    are inclusive ``(first, last)`` pairs.
    """

    treated_unit: str
    donor_units: Tuple[str, ...]
    treatment_week: int
    outcome_variable: str
    predictor_variables: Tuple[str, ...]
    pre_window: Window
    post_window: Window
    outcome_lags: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "donor_units", tuple(self.donor_units))
        object.__setattr__(self, "predictor_variables", tuple(self.predictor_variables))
        object.__setattr__(self, "pre_window", tuple(self.pre_window))
        object.__setattr__(self, "post_window", tuple(self.post_window))
        object.__setattr__(self, "outcome_lags", tuple(self.outcome_lags))

    @classmethod
    def build(
        cls,
        panel: PanelDataset,
        treated_unit: str,
        treatment_week: WeekKey,
        outcome_variable: str,
        predictor_variables: Sequence[str],
        donor_units: Optional[Sequence[str]] = None,
        pre_start: Optional[WeekKey] = None,
        post_end: Optional[WeekKey] = None,
        outcome_lags: Iterable[WeekKey] = (),
    ) -> "StudySpec":
        """Resolve week keys against ``panel`` and default the windows to the full horizon."""
        t0 = panel.week_position(treatment_week)
        if donor_units is None:
            donor_units = [u for u in panel.unit_ids if u != treated_unit]
        first = panel.week_position(pre_start) if pre_start is not None else 0
        last = panel.week_position(post_end) if post_end is not None else panel.n_weeks - 1
        return cls(
            treated_unit=treated_unit,
            donor_units=tuple(donor_units),
            treatment_week=t0,
            outcome_variable=outcome_variable,
            predictor_variables=tuple(predictor_variables),
            pre_window=(first, t0 - 1),
            post_window=(t0, last),
            outcome_lags=tuple(panel.week_position(w) for w in outcome_lags),
        )

    @property
    def pre_weeks(self) -> np.ndarray:
        return np.arange(self.pre_window[0], self.pre_window[1] + 1)

    @property
    def post_weeks(self) -> np.ndarray:
        return np.arange(self.post_window[0], self.post_window[1] + 1)

    @property
    def units(self) -> Tuple[str, ...]:
        return (self.treated_unit,) + self.donor_units

    def with_treatment_week(self, treatment_week: int) -> "StudySpec":
        """Move T0, keeping the window edges and the lag weeks that stay pre-treatment."""
        return replace(
            self,
            treatment_week=treatment_week,
            pre_window=(self.pre_window[0], treatment_week - 1),
            post_window=(treatment_week, self.post_window[1]),
            outcome_lags=tuple(w for w in self.outcome_lags if w < treatment_week),
        )

    def with_donors(self, donor_units: Sequence[str]) -> "StudySpec":
        return replace(self, donor_units=tuple(donor_units))

    def with_treated(self, treated_unit: str, donor_units: Sequence[str]) -> "StudySpec":
        return replace(self, treated_unit=treated_unit, donor_units=tuple(donor_units))

    def with_outcome(self, outcome_variable: str) -> "StudySpec":
        predictors = tuple(p for p in self.predictor_variables if p != outcome_variable)
        return replace(
            self, outcome_variable=outcome_variable, predictor_variables=predictors
        )

    def to_dict(self, panel: Optional[PanelDataset] = None) -> Dict:
        """Plain-data view; weeks are rendered as ISO dates when ``panel`` is given."""

        def week(i: int):
            return panel.week_index[i].isoformat() if panel is not None else i

        return {
            "treated_unit": self.treated_unit,
            "donor_units": list(self.donor_units),
            "treatment_week": week(self.treatment_week),
            "outcome_variable": self.outcome_variable,
            "predictor_variables": list(self.predictor_variables),
            "pre_window": [week(self.pre_window[0]), week(self.pre_window[1])],
            "post_window": [week(self.post_window[0]), week(self.post_window[1])],
            "outcome_lags": [week(i) for i in self.outcome_lags],
        }


def validate_spec(spec: StudySpec, panel: PanelDataset) -> StudySpec:
    """Check that every unit, variable and week referenced by ``spec`` exists in ``panel``."""
    panel.unit_position(spec.treated_unit)
    seen = set()
    for donor in spec.donor_units:
        panel.unit_position(donor)
        if donor == spec.treated_unit:
            raise TreatedInDonorPool(donor)
        if donor in seen:
            raise DuplicateUnit(donor)
        seen.add(donor)
    if len(spec.donor_units) < 2:
        raise InsufficientDonors(len(spec.donor_units))

    panel.variable_position(spec.outcome_variable)
    for predictor in spec.predictor_variables:
        if predictor not in panel.variables:
            raise UnknownVariable(predictor)
    if not spec.predictor_variables and not spec.outcome_lags:
        raise ConfigError("at least one predictor or outcome lag is required")

    t0 = spec.treatment_week
    (pre_first, pre_last), (post_first, post_last) = spec.pre_window, spec.post_window
    if not 0 < t0 < panel.n_weeks:
        raise InvalidWindow(f"treatment week {t0} must be strictly inside the panel")
    if pre_last != t0 - 1:
        raise InvalidWindow("pre-treatment window must end the week before treatment")
    if post_first != t0:
        raise InvalidWindow("post-treatment window must start at the treatment week")
    if pre_first < 0 or post_last >= panel.n_weeks:
        raise InvalidWindow("windows must lie within the panel horizon")
    if post_last < post_first:
        raise InvalidWindow("post-treatment window is empty")

    pre_weeks = pre_last - pre_first + 1
    if pre_weeks < MIN_PRE_WEEKS:
        raise InsufficientPreWindow(max(pre_weeks, 0), MIN_PRE_WEEKS)
    if pre_weeks < RECOMMENDED_PRE_WEEKS:
        logger.warning(
            f"Only {pre_weeks} pre-treatment weeks for '{spec.treated_unit}', "
            f"{RECOMMENDED_PRE_WEEKS} or more recommended for a reliable fit"
        )
    for lag in spec.outcome_lags:
        if not pre_first <= lag <= pre_last:
            raise InvalidWindow(f"outcome lag week {lag} is outside the pre window")
    return spec


@dataclass(frozen=True)
class SimplexWeights:
    """Labelled weights on the probability simplex."""

    weights: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        values = np.array(list(self.weights.values()), dtype=float)
        if values.size == 0:
            raise ValueError("Weights must not be empty")
        if np.any(values < -SIMPLEX_TOLERANCE) or np.any(values > 1 + SIMPLEX_TOLERANCE):
            raise ValueError(f"Weights must lie in [0, 1]: {self.weights}")
        if abs(values.sum() - 1.0) > SIMPLEX_TOLERANCE:
            raise ValueError(f"Weights must sum to 1, got {values.sum()!r}")

    @classmethod
    def from_array(cls, labels: Sequence[str], array: np.ndarray):
        return cls(dict(zip(labels, (float(x) for x in array))))

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(self.weights)

    def as_array(self, order: Optional[Sequence[str]] = None) -> np.ndarray:
        order = self.labels if order is None else order
        return np.array([self.weights[label] for label in order], dtype=float)

    def nonzero(self, floor: float = 0.0) -> Dict[str, float]:
        """Weights above ``floor``, largest first."""
        kept = {k: w for k, w in self.weights.items() if w > floor}
        return dict(sorted(kept.items(), key=lambda kv: (-kv[1], kv[0])))

    def spread(self, floor: float = 0.0) -> float:
        """Standard deviation of the weights above ``floor``."""
        values = list(self.nonzero(floor).values())
        return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


class DonorWeights(SimplexWeights):
    """Donor unit -> weight in the synthetic control."""


class PredictorWeights(SimplexWeights):
    """Predictor -> diagonal entry of V."""
