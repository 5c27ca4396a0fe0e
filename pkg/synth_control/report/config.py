"""
Study configuration: one TOML document describes a whole study.

Example::

    seed = 7

    [data]
    input_csv = "data/halving_2024.csv"
    week_anchor = "sunday"

    [outcome]
    variable = "price"
    transform = "wallet_value"

    [transforms]
    variables = { transactions = "log", total_addresses = "normalize_max" }

    [predictors]
    candidates = ["active_addresses_ratio", "log_transactions"]
    screening_threshold = 0.7

    [study]
    treated_unit = "BTC"
    excluded_donors = ["ETH"]
    exclusion_note = "idiosyncratic shocks around the upgrade"
    treatment_week = "2024-04-14"

    [placebo]
    shift_weeks = 24
    cutoff_multiples = [10.0, 100.0, "none"]
"""

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from datetime import date
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from synth_control.errors import ConfigError
from synth_control.patterns import (
    Aggregation,
    OutcomeTransform,
    RankScope,
    VariableTransform,
    WeekAnchor,
)

NO_LIMIT = "none"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DataSection(_Section):
    input_csv: str = Field(..., description="Long CSV with unit,date,variable,value")
    week_anchor: WeekAnchor = WeekAnchor.SUNDAY
    aggregation: Aggregation = Aggregation.MEAN
    drop_incomplete_variables: bool = False


class OutcomeSection(_Section):
    variable: str = Field(..., description="Raw variable the outcome is derived from")
    transform: OutcomeTransform = OutcomeTransform.WALLET_VALUE
    baseline_week: Optional[date] = None
    name: str = "wallet_value"

    @property
    def outcome_variable(self) -> str:
        return self.name if self.transform is OutcomeTransform.WALLET_VALUE else self.variable


class TransformsSection(_Section):
    variables: Dict[str, VariableTransform] = Field(default_factory=dict)
    log_floor: float = Field(default=1e-9, gt=0)


class PredictorsSection(_Section):
    candidates: List[str] = Field(default_factory=list)
    screening_threshold: float = Field(default=0.7, gt=0, le=1)
    outcome_lags: List[date] = Field(default_factory=list)


class StudySection(_Section):
    treated_unit: str
    donor_units: Optional[List[str]] = None
    excluded_donors: List[str] = Field(default_factory=list)
    exclusion_note: str = ""
    treatment_week: date
    pre_window: Optional[Tuple[date, date]] = None
    post_window: Optional[Tuple[date, date]] = None


class PlaceboSection(_Section):
    shift_weeks: int = Field(default=24, ge=1)
    cutoff_multiples: List[Union[float, Literal["none"]]] = Field(
        default_factory=lambda: [10.0, 100.0, NO_LIMIT]
    )
    pass_threshold: float = Field(default=2.0, gt=0)
    divergence_multiple: float = Field(default=2.0, gt=0)
    divergence_run: int = Field(default=3, ge=1)
    rank_scope: RankScope = RankScope.ALL
    outcome_swaps: List[str] = Field(default_factory=list)
    unit_swaps: List[str] = Field(default_factory=list)

    @field_validator("cutoff_multiples")
    @classmethod
    def _positive_cutoffs(cls, values):
        for value in values:
            if value != NO_LIMIT and not value > 0:
                raise ValueError(f"cutoff multiples must be positive, got {value}")
        return values

    def cutoffs(self) -> List[Optional[float]]:
        return [None if c == NO_LIMIT else float(c) for c in self.cutoff_multiples]


class LooSection(_Section):
    weight_floor: float = Field(default=1e-3, ge=0, lt=1)
    degradation_multiple: float = Field(default=4.0, gt=0)
    fixed_v: bool = False


class OptimizerSection(_Section):
    n_starts: int = Field(default=20, ge=1)
    lattice_budget: int = Field(default=256, ge=1)
    n_refine: int = Field(default=5, ge=1)
    max_iter: int = Field(default=400, ge=1)


class StudyConfig(_Section):
    seed: int = 0
    data: DataSection
    outcome: OutcomeSection
    transforms: TransformsSection = Field(default_factory=TransformsSection)
    predictors: PredictorsSection = Field(default_factory=PredictorsSection)
    study: StudySection
    placebo: PlaceboSection = Field(default_factory=PlaceboSection)
    loo: LooSection = Field(default_factory=LooSection)
    optimizer: OptimizerSection = Field(default_factory=OptimizerSection)

    def with_seed(self, seed: Optional[int]) -> "StudyConfig":
        return self if seed is None else self.model_copy(update={"seed": seed})

    def resolve_input(self, base: Path) -> Path:
        path = Path(self.data.input_csv)
        return path if path.is_absolute() else base / path


def load_config(path: Union[str, Path]) -> StudyConfig:
    """Parse and validate a TOML study config; unknown keys are rejected."""
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
    return parse_config(raw, source=str(path))


def parse_config(raw: Dict, source: str = "config") -> StudyConfig:
    try:
        return StudyConfig.model_validate(raw)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"{source}: {problems}") from e


def dump_config(config: StudyConfig) -> str:
    """JSON form of a config; ``StudyConfig.model_validate_json`` restores it exactly."""
    return config.model_dump_json(indent=2)
