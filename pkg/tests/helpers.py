"""Small panels built in code for the test modules."""

from datetime import date
from typing import Dict, Optional, Sequence

import numpy as np

from synth_control.engine.matrices import ScmMatrices, predictor_scale
from synth_control.panel.dataset import PanelDataset, week_range
from synth_control.panel.study import StudySpec

START = date(2021, 1, 3)  # a Sunday


def make_panel(
    data: Dict[str, np.ndarray], units: Sequence[str], start: date = START
) -> PanelDataset:
    """``data`` maps variable -> units x weeks array."""
    variables = list(data)
    weeks = next(iter(data.values())).shape[1]
    values = np.stack([np.asarray(data[v], dtype=float) for v in variables])
    return PanelDataset(tuple(units), tuple(week_range(start, weeks)), variables, values)


def convex_study(
    seed: int,
    mix: Optional[Dict[str, float]] = None,
    decoys: int = 6,
    predictors: int = 8,
    weeks: int = 30,
    treatment_week: int = 20,
    effect: float = 0.0,
):
    """
    Treated unit built as an exact convex combination of the ``mix`` donors in
    every variable, plus ``decoys`` unrelated donors.
    """
    rng = np.random.default_rng(seed)
    mix = mix or {"A": 0.4, "B": 0.6}
    donors = list(mix) + [f"D{i}" for i in range(decoys)]
    units = ["T"] + donors
    weights = np.array([mix.get(d, 0.0) for d in donors])

    data = {}
    names = ["outcome"] + [f"p{i}" for i in range(predictors)]
    for name in names:
        donor_series = rng.uniform(1.0, 10.0, size=(len(donors), weeks))
        treated = weights @ donor_series
        if name == "outcome":
            treated = treated + np.where(np.arange(weeks) >= treatment_week, effect, 0.0)
        data[name] = np.vstack([treated, donor_series])

    panel = make_panel(data, units)
    spec = StudySpec.build(
        panel,
        treated_unit="T",
        treatment_week=treatment_week,
        outcome_variable="outcome",
        predictor_variables=names[1:],
    )
    return panel, spec


def random_matrices(rng: np.random.Generator, k: int, donors: int, weeks: int = 12):
    X0 = rng.normal(size=(k, donors))
    X1 = X0.mean(axis=1) + rng.normal(scale=2.0, size=k)
    Z0 = rng.normal(size=(weeks, donors))
    Z1 = rng.normal(size=weeks)
    return ScmMatrices(
        predictors=tuple(f"p{i}" for i in range(k)),
        donors=tuple(f"d{j}" for j in range(donors)),
        X1=X1,
        X0=X0,
        Z1=Z1,
        Z0=Z0,
        scale=predictor_scale(X1, X0),
    )


def random_study(
    seed: int,
    donors: int = 6,
    predictors: int = 3,
    weeks: int = 16,
    treatment_week: int = 12,
):
    """Independent random series for every unit, so the treated unit is rarely matched exactly."""
    rng = np.random.default_rng(seed)
    units = ["T"] + [f"D{j}" for j in range(donors)]
    names = ["outcome"] + [f"p{i}" for i in range(predictors)]
    data = {name: rng.normal(5.0, 2.0, size=(len(units), weeks)) for name in names}
    panel = make_panel(data, units)
    spec = StudySpec.build(
        panel,
        treated_unit="T",
        treatment_week=treatment_week,
        outcome_variable="outcome",
        predictor_variables=names[1:],
    )
    return panel, spec
