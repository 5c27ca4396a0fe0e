"""
Seeded linear factor-model panels with a known treatment effect.

Every unit follows ``outcome[t] = 100 + loadings . factors[t] + noise``. The
treated unit's loadings are a convex mix of a few donors' loadings, so a
perfect synthetic control exists in expectation, and ``effect`` is added to
its outcome from the treatment week on. Predictors are time-constant linear
maps of the loadings observed with small weekly noise.
"""

from dataclasses import asdict, dataclass
from datetime import date
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from synth_control.errors import ConfigError
from synth_control.panel.dataset import LONG_COLUMNS, week_range
from synth_control.patterns import WeekAnchor
from synth_control.report.artifacts import ArtifactWriter

OUTCOME_LEVEL = 100.0
OUTCOME_VARIABLE = "outcome"
TREATED_UNIT = "treated"
MIN_UNITS = 3
MIN_WEEKS = 10
MIX_SIZE = 3


@dataclass(frozen=True)
class SynthGenParams:
    units: int = 12
    weeks: int = 60
    factors: int = 2
    effect: float = 25.0
    seed: int = 0
    noise: float = 0.02
    treatment_week: Optional[int] = None
    start: date = date(2021, 1, 3)

    def __post_init__(self):
        if self.units < MIN_UNITS:
            raise ConfigError(f"synthgen needs at least {MIN_UNITS} units, got {self.units}")
        if self.weeks < MIN_WEEKS:
            raise ConfigError(f"synthgen needs at least {MIN_WEEKS} weeks, got {self.weeks}")
        if self.factors < 1:
            raise ConfigError(f"synthgen needs at least one factor, got {self.factors}")
        if self.noise < 0:
            raise ConfigError(f"noise must be non-negative, got {self.noise}")
        t0 = self.t0
        if not 2 <= t0 <= self.weeks - 1:
            raise ConfigError(
                f"treatment week must leave 2 pre weeks and 1 post week, got {t0}"
            )

    @property
    def t0(self) -> int:
        if self.treatment_week is not None:
            return self.treatment_week
        return (2 * self.weeks) // 3

    @property
    def predictors(self) -> Tuple[str, ...]:
        return tuple(f"x{k + 1}" for k in range(self.factors + 1))

    @property
    def donors(self) -> Tuple[str, ...]:
        width = len(str(self.units - 1))
        return tuple(f"donor_{j + 1:0{width}d}" for j in range(self.units - 1))


@dataclass(frozen=True)
class GroundTruth:
    effect: float
    treated_unit: str
    treatment_week: str
    treatment_index: int
    outcome_variable: str
    predictors: Tuple[str, ...]
    donor_mix: Dict[str, float]
    noise_sd: float
    seed: int

    def to_dict(self):
        return asdict(self)


def generate(params: SynthGenParams) -> Tuple[pd.DataFrame, GroundTruth]:
    """Long ``unit,date,variable,value`` frame plus the truth it was drawn from."""
    rng = np.random.default_rng(params.seed)
    J, T, F = params.units - 1, params.weeks, params.factors
    sigma = params.noise * OUTCOME_LEVEL

    factors = np.cumsum(rng.normal(0.0, 1.5, size=(T, F)), axis=0)
    donor_loadings = rng.uniform(0.5, 1.5, size=(J, F))

    mixed = min(MIX_SIZE, J)
    mix = np.zeros(J)
    mix[:mixed] = rng.dirichlet(np.ones(mixed))
    treated_loadings = mix @ donor_loadings
    loadings = np.vstack([treated_loadings, donor_loadings])

    outcome = OUTCOME_LEVEL + loadings @ factors.T
    outcome += rng.normal(0.0, sigma, size=outcome.shape)
    outcome[0, params.t0 :] += params.effect

    K = F + 1
    maps = rng.normal(0.0, 1.0, size=(K, F))
    offsets = rng.uniform(5.0, 10.0, size=K)
    levels = offsets + loadings @ maps.T
    predictor_noise = rng.normal(0.0, 0.01, size=(loadings.shape[0], K, T))

    weeks = [w.isoformat() for w in week_range(params.start, T)]
    units = (TREATED_UNIT,) + params.donors
    rows = []
    for u, unit in enumerate(units):
        for t, week in enumerate(weeks):
            rows.append((unit, week, OUTCOME_VARIABLE, round(float(outcome[u, t]), 6)))
        for k, name in enumerate(params.predictors):
            for t, week in enumerate(weeks):
                value = levels[u, k] + predictor_noise[u, k, t]
                rows.append((unit, week, name, round(float(value), 6)))

    truth = GroundTruth(
        effect=params.effect,
        treated_unit=TREATED_UNIT,
        treatment_week=weeks[params.t0],
        treatment_index=params.t0,
        outcome_variable=OUTCOME_VARIABLE,
        predictors=params.predictors,
        donor_mix={d: float(w) for d, w in zip(params.donors, mix) if w > 0},
        noise_sd=sigma,
        seed=params.seed,
    )
    logger.info(
        f"Generated {len(units)} units x {T} weeks with effect {params.effect} "
        f"from week {truth.treatment_week}"
    )
    return pd.DataFrame(rows, columns=LONG_COLUMNS), truth


def study_toml(params: SynthGenParams, truth: GroundTruth, input_csv: str) -> str:
    """A ready-to-run study config for the generated panel."""
    candidates = ", ".join(f'"{p}"' for p in truth.predictors)
    return "\n".join(
        [
            f"seed = {params.seed}",
            "",
            "[data]",
            f'input_csv = "{input_csv}"',
            f'week_anchor = "{list(WeekAnchor)[params.start.weekday()].value}"',
            "",
            "[outcome]",
            f'variable = "{truth.outcome_variable}"',
            'transform = "none"',
            "",
            "[predictors]",
            f"candidates = [{candidates}]",
            "screening_threshold = 1.0",
            "",
            "[study]",
            f'treated_unit = "{truth.treated_unit}"',
            f"treatment_week = {truth.treatment_week}",
            "",
        ]
    )


def write_synthgen(params: SynthGenParams, out_dir: Union[str, Path]):
    """Write ``observations.csv``, ``truth.json`` and ``study.toml`` into ``out_dir``."""
    writer = ArtifactWriter(out_dir)
    frame, truth = generate(params)
    csv_path = writer.write_csv("observations.csv", frame)
    writer.write_json("truth.json", truth.to_dict())
    writer.write_text("study.toml", study_toml(params, truth, csv_path.name))
    return csv_path, truth
