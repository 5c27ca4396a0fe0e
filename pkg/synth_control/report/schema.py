from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from synth_control.engine.fit import FitResult
from synth_control.inference.placebo import DivergenceVerdict, PlaceboStudy
from synth_control.panel.dataset import PanelDataset
from synth_control.sensitivity.leave_one_out import LooReport


class WeightRow(BaseModel):
    label: str
    weight: float


class BalanceRecord(BaseModel):
    predictor: str
    treated: float
    synthetic: float
    sample_mean: float
    improvement: float = Field(
        ..., description="|treated - sample mean| - |treated - synthetic|"
    )


class SeriesRow(BaseModel):
    week: str
    treated: float
    synthetic: float
    gap: float


class FitSummary(BaseModel):
    average_post_gap: float
    pre_mspe: float
    post_mspe: float
    pre_rmspe: float
    mspe_ratio: Optional[float] = Field(
        default=None, description="post/pre MSPE, absent when the pre-MSPE is zero"
    )
    donor_weight_spread: float
    predictor_weight_spread: float
    improved_predictors: int
    total_predictors: int
    degenerate: bool
    solver: str


class FitDocument(BaseModel):
    """Everything produced by one synthetic control fit."""

    study: Dict
    exclusion_note: str = ""
    donor_weights: List[WeightRow]
    predictor_weights: List[WeightRow]
    balance: List[BalanceRecord]
    series: List[SeriesRow]
    summary: FitSummary

    @classmethod
    def from_fit(
        cls, fit: FitResult, panel: PanelDataset, exclusion_note: str = ""
    ) -> "FitDocument":
        ratio = fit.post_mspe / fit.pre_mspe if fit.pre_mspe > 0 else None
        return cls(
            study=fit.spec.to_dict(panel),
            exclusion_note=exclusion_note,
            donor_weights=[
                WeightRow(label=k, weight=w) for k, w in fit.donor_weights.weights.items()
            ],
            predictor_weights=[
                WeightRow(label=k, weight=w)
                for k, w in fit.predictor_weights.weights.items()
            ],
            balance=[BalanceRecord(**r) for r in fit.balance.to_records()],
            series=[
                SeriesRow(week=w.isoformat(), treated=t, synthetic=s, gap=g)
                for w, t, s, g in zip(
                    panel.week_index,
                    fit.treated_outcome.tolist(),
                    fit.synthetic_outcome.tolist(),
                    fit.gap.tolist(),
                )
            ],
            summary=FitSummary(
                average_post_gap=fit.average_post_gap,
                pre_mspe=fit.pre_mspe,
                post_mspe=fit.post_mspe,
                pre_rmspe=fit.pre_rmspe,
                mspe_ratio=ratio,
                donor_weight_spread=fit.donor_weights.spread(),
                predictor_weight_spread=fit.predictor_weights.spread(),
                improved_predictors=fit.balance.improved_count,
                total_predictors=len(fit.balance.rows),
                degenerate=fit.degenerate,
                solver=str(fit.diagnostics.get("solver", "")),
            ),
        )


class RatioRecord(BaseModel):
    unit: str
    pre_mspe: float
    post_mspe: float
    ratio: float
    treated: bool


class CutoffRecord(BaseModel):
    cutoff_multiple: Optional[float] = Field(default=None, description="None = no limit")
    discarded: List[str]
    treated_rank: int
    ranked_units: int
    p_value: float
    significant: bool


class PlaceboSpaceDocument(BaseModel):
    treated_unit: str
    rank_scope: str
    ratios: List[RatioRecord]
    cutoffs: List[CutoffRecord]
    failed: Dict[str, str]
    gaps: Dict[str, List[float]]

    @classmethod
    def from_studies(cls, studies: List[PlaceboStudy]) -> "PlaceboSpaceDocument":
        first = studies[0]
        ordered = sorted(first.ratios.items(), key=lambda kv: (-kv[1], kv[0]))
        return cls(
            treated_unit=first.treated_unit,
            rank_scope=first.rank_scope.value,
            ratios=[
                RatioRecord(
                    unit=u,
                    pre_mspe=first.fits[u].pre_mspe,
                    post_mspe=first.fits[u].post_mspe,
                    ratio=r,
                    treated=u == first.treated_unit,
                )
                for u, r in ordered
            ],
            cutoffs=[
                CutoffRecord(
                    cutoff_multiple=s.cutoff_multiple,
                    discarded=sorted(s.discarded),
                    treated_rank=s.treated_rank,
                    ranked_units=s.ranked_units,
                    p_value=s.p_value,
                    significant=s.significant,
                )
                for s in studies
            ],
            failed=dict(sorted(first.failed.items())),
            gaps={u: f.gap.tolist() for u, f in first.fits.items()},
        )


class VerdictRecord(BaseModel):
    placebo_treatment_week: str
    true_treatment_week: str
    placebo_window_mspe: float
    pre_mspe: float
    ratio: float
    pass_threshold: float
    passed: bool
    first_divergence_week: Optional[str] = None
    weeks_before_treatment: Optional[int] = None

    @classmethod
    def from_verdict(cls, verdict: DivergenceVerdict, panel: PanelDataset) -> "VerdictRecord":
        weeks = panel.week_index
        first = verdict.first_divergence_week
        return cls(
            placebo_treatment_week=weeks[verdict.placebo_treatment_week].isoformat(),
            true_treatment_week=weeks[verdict.true_treatment_week].isoformat(),
            placebo_window_mspe=verdict.placebo_window_mspe,
            pre_mspe=verdict.pre_mspe,
            ratio=verdict.ratio,
            pass_threshold=verdict.pass_threshold,
            passed=verdict.passed,
            first_divergence_week=weeks[first].isoformat() if first is not None else None,
            weeks_before_treatment=verdict.weeks_before_treatment,
        )


class PlaceboTimeDocument(BaseModel):
    shift_weeks: int
    verdict: VerdictRecord
    fit: FitDocument


class SwapDocument(BaseModel):
    """Outcome-swap or unit-swap placebo fits keyed by the swapped-in name."""

    mode: str
    fits: Dict[str, FitDocument]


class LooRecord(BaseModel):
    excluded_donor: str
    average_post_gap: Optional[float]
    pre_mspe: Optional[float]
    sign_flipped: bool
    pre_fit_degraded: bool
    error: Optional[str] = None


class LooDocument(BaseModel):
    baseline_average_gap: float
    baseline_pre_mspe: float
    weight_floor: float
    degradation_multiple: float
    entries: List[LooRecord]
    robust: bool
    inconclusive: bool = False
    verdict: str

    @classmethod
    def from_report(cls, report: LooReport) -> "LooDocument":
        return cls(
            baseline_average_gap=report.baseline_average_gap,
            baseline_pre_mspe=report.baseline_pre_mspe,
            weight_floor=report.weight_floor,
            degradation_multiple=report.degradation_multiple,
            entries=[
                LooRecord(
                    excluded_donor=e.excluded_donor,
                    average_post_gap=e.average_post_gap,
                    pre_mspe=e.fit.pre_mspe if e.fit is not None else None,
                    sign_flipped=e.sign_flipped,
                    pre_fit_degraded=e.pre_fit_degraded,
                    error=e.error,
                )
                for e in report.entries
            ],
            robust=report.robust,
            inconclusive=report.inconclusive,
            verdict=report.verdict(),
        )


class ScreeningRecord(BaseModel):
    variable: str
    kept: bool
    reason: str
    max_abs_correlation: Optional[float] = None
    correlated_with: Optional[str] = None


class PrepReport(BaseModel):
    status: str
    input_csv: str
    observations: int = 0
    units: List[str] = Field(default_factory=list)
    first_week: Optional[str] = None
    last_week: Optional[str] = None
    weeks: int = 0
    variables: List[str] = Field(default_factory=list)
    derived_variables: List[str] = Field(default_factory=list)
    dropped_variables: List[str] = Field(default_factory=list)
    screening: List[ScreeningRecord] = Field(default_factory=list)
    predictors: List[str] = Field(default_factory=list)
    error: Optional[str] = None
