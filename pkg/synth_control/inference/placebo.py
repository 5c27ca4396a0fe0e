from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
from joblib import Parallel, delayed
from loguru import logger
from tqdm import tqdm

from synth_control.engine.fit import FitResult, fit_study
from synth_control.engine.weights import OptimizerOptions
from synth_control.errors import (
    InsufficientPreWindow,
    OptimizationError,
    UnknownUnit,
    UnknownVariable,
    ZeroPreMspe,
)
from synth_control.panel.dataset import PanelDataset
from synth_control.panel.study import MIN_PRE_WEEKS, StudySpec, validate_spec
from synth_control.patterns import RankScope

SIGNIFICANCE_LEVEL = 0.05
DEFAULT_PASS_THRESHOLD = 2.0
DEFAULT_DIVERGENCE_MULTIPLE = 2.0
DEFAULT_DIVERGENCE_RUN = 3


def mspe_ratio(fit: FitResult) -> float:
    """Post-treatment MSPE over pre-treatment MSPE."""
    if not fit.pre_mspe > 0:
        raise ZeroPreMspe(fit.spec.treated_unit)
    return fit.post_mspe / fit.pre_mspe


def safe_mspe_ratio(fit: FitResult) -> float:
    """:func:`mspe_ratio`, substituting machine epsilon for a zero pre-MSPE."""
    try:
        return mspe_ratio(fit)
    except ZeroPreMspe:
        logger.warning(
            f"Pre-treatment MSPE of '{fit.spec.treated_unit}' is zero, "
            "using machine epsilon for its ratio"
        )
        return fit.post_mspe / np.finfo(float).eps


def rank_p_value(
    ratios: Dict[str, float], treated: str, units: Optional[Sequence[str]] = None
) -> Tuple[int, float]:
    """
    Rank of the treated ratio among ``units`` (1 = largest) and the permutation
    p-value ``rank / len(units)``. Ties count against the treated unit.
    """
    units = list(ratios) if units is None else list(units)
    if treated not in units:
        raise UnknownUnit(treated)
    mine = ratios[treated]
    rank = sum(1 for u in units if ratios[u] >= mine)
    return rank, rank / len(units)


def discard_by_cutoff(
    pre_mspes: Dict[str, float], treated: str, cutoff_multiple: Optional[float]
) -> Set[str]:
    """Units whose pre-treatment MSPE exceeds ``cutoff_multiple`` times the treated one."""
    if cutoff_multiple is None:
        return set()
    if not cutoff_multiple > 0:
        raise ValueError(f"Cutoff multiple must be positive, got {cutoff_multiple}")
    limit = cutoff_multiple * pre_mspes[treated]
    return {u for u, mspe in pre_mspes.items() if u != treated and mspe > limit}


@dataclass(frozen=True, eq=False)
class PlaceboStudy:
    treated_unit: str
    fits: Dict[str, FitResult]
    ratios: Dict[str, float]
    treated_rank: int
    p_value: float
    discarded: Set[str]
    cutoff_multiple: Optional[float]
    rank_scope: RankScope = RankScope.ALL
    failed: Dict[str, str] = field(default_factory=dict)
    ranked_units: int = 0

    @property
    def pre_mspes(self) -> Dict[str, float]:
        return {u: f.pre_mspe for u, f in self.fits.items()}

    @property
    def significant(self) -> bool:
        return self.p_value <= SIGNIFICANCE_LEVEL

    @property
    def retained(self) -> List[str]:
        return [u for u in self.fits if u not in self.discarded]

    def with_cutoff(self, cutoff_multiple: Optional[float]) -> "PlaceboStudy":
        """Same fits, different MSPE cutoff."""
        discarded = discard_by_cutoff(self.pre_mspes, self.treated_unit, cutoff_multiple)
        units = (
            [u for u in self.fits if u not in discarded]
            if self.rank_scope is RankScope.RETAINED
            else list(self.fits)
        )
        rank, p_value = rank_p_value(self.ratios, self.treated_unit, units)
        return replace(
            self,
            discarded=discarded,
            cutoff_multiple=cutoff_multiple,
            treated_rank=rank,
            p_value=p_value,
            ranked_units=len(units),
        )


def _fit_or_fail(
    panel: PanelDataset, spec: StudySpec, options: Optional[OptimizerOptions]
) -> Tuple[Optional[FitResult], Optional[str]]:
    try:
        return fit_study(panel, spec, options), None
    except OptimizationError as e:
        logger.warning(f"Placebo fit for '{spec.treated_unit}' failed: {e}")
        return None, str(e)


def fan_out(jobs, worker, max_workers: int = 1, progress: bool = False, desc: str = ""):
    """Run ``worker`` over ``jobs`` and return results in submission order."""
    if progress:
        jobs = tqdm(jobs, desc=desc, dynamic_ncols=True)
    parallel = Parallel(n_jobs=max_workers, prefer="threads")
    return parallel(delayed(worker)(job) for job in jobs)


def placebo_in_space(
    panel: PanelDataset,
    spec: StudySpec,
    cutoff_multiple: Optional[float] = None,
    options: Optional[OptimizerOptions] = None,
    rank_scope: RankScope = RankScope.ALL,
    max_workers: int = 1,
    progress: bool = False,
) -> PlaceboStudy:
    """
    Refit with every unit of the study cast as treated, the remaining units
    forming its donor pool, then rank the treated unit's MSPE ratio.

    The cutoff only marks units as discarded; the p-value is computed over
    every successfully fitted unit unless ``rank_scope`` is ``RETAINED``.
    """
    validate_spec(spec, panel)
    units = spec.units
    placebo_specs = [
        spec.with_treated(u, [d for d in units if d != u]) for u in units
    ]

    treated_fit = fit_study(panel, placebo_specs[0], options)
    others = fan_out(
        placebo_specs[1:],
        lambda s: _fit_or_fail(panel, s, options),
        max_workers=max_workers,
        progress=progress,
        desc="in-space placebo",
    )

    fits: Dict[str, FitResult] = {spec.treated_unit: treated_fit}
    failed: Dict[str, str] = {}
    for placebo_spec, (fit, error) in zip(placebo_specs[1:], others):
        if fit is None:
            failed[placebo_spec.treated_unit] = error
        else:
            fits[placebo_spec.treated_unit] = fit

    ratios = {u: safe_mspe_ratio(f) for u, f in fits.items()}
    study = PlaceboStudy(
        treated_unit=spec.treated_unit,
        fits=fits,
        ratios=ratios,
        treated_rank=0,
        p_value=1.0,
        discarded=set(),
        cutoff_multiple=None,
        rank_scope=RankScope(rank_scope),
        failed=failed,
    ).with_cutoff(cutoff_multiple)
    logger.info(
        f"In-space placebo: '{spec.treated_unit}' ranks {study.treated_rank} "
        f"of {study.ranked_units}, "
        f"p = {study.p_value:.4f}, {len(study.discarded)} discarded, {len(failed)} failed"
    )
    return study


@dataclass(frozen=True)
class DivergenceVerdict:
    placebo_treatment_week: int
    true_treatment_week: int
    placebo_window_mspe: float
    pre_mspe: float
    ratio: float
    pass_threshold: float
    passed: bool
    first_divergence_week: Optional[int]

    @property
    def weeks_before_treatment(self) -> Optional[int]:
        if self.first_divergence_week is None:
            return None
        return self.true_treatment_week - self.first_divergence_week


def first_sustained_divergence(
    gap: np.ndarray, start: int, threshold: float, run: int
) -> Optional[int]:
    """First week from ``start`` opening ``run`` consecutive weeks with |gap| > threshold."""
    above = np.abs(gap[start:]) > threshold
    streak = 0
    for offset, flag in enumerate(above):
        streak = streak + 1 if flag else 0
        if streak == run:
            return start + offset - run + 1
    return None


def placebo_in_time(
    panel: PanelDataset,
    spec: StudySpec,
    shift_weeks: int,
    options: Optional[OptimizerOptions] = None,
    pass_threshold: float = DEFAULT_PASS_THRESHOLD,
    divergence_multiple: float = DEFAULT_DIVERGENCE_MULTIPLE,
    divergence_run: int = DEFAULT_DIVERGENCE_RUN,
) -> Tuple[FitResult, DivergenceVerdict]:
    """
    Refit with the treatment moved ``shift_weeks`` earlier, everything else
    unchanged, and judge the gap between the placebo and the true treatment.
    """
    if shift_weeks < 1:
        raise ValueError(f"Shift must be a positive number of weeks, got {shift_weeks}")
    true_t0 = spec.treatment_week
    placebo_t0 = true_t0 - shift_weeks
    if placebo_t0 - spec.pre_window[0] < MIN_PRE_WEEKS:
        raise InsufficientPreWindow(max(placebo_t0 - spec.pre_window[0], 0))

    fit = fit_study(panel, spec.with_treatment_week(placebo_t0), options)
    window = fit.gap[placebo_t0:true_t0]
    placebo_mspe = float(np.mean(window**2))
    pre = fit.pre_mspe
    if not pre > 0:
        logger.warning("In-time placebo has a zero pre-treatment MSPE, using epsilon")
        pre = float(np.finfo(float).eps)
    ratio = placebo_mspe / pre

    verdict = DivergenceVerdict(
        placebo_treatment_week=placebo_t0,
        true_treatment_week=true_t0,
        placebo_window_mspe=placebo_mspe,
        pre_mspe=fit.pre_mspe,
        ratio=ratio,
        pass_threshold=pass_threshold,
        passed=ratio < pass_threshold,
        first_divergence_week=first_sustained_divergence(
            fit.gap, placebo_t0, divergence_multiple * np.sqrt(pre), divergence_run
        ),
    )
    logger.info(
        f"In-time placebo ({shift_weeks} weeks earlier): ratio {ratio:.3f}, "
        f"{'passed' if verdict.passed else 'not passed'}"
    )
    return fit, verdict


def placebo_outcome_swap(
    panel: PanelDataset,
    spec: StudySpec,
    new_outcome: str,
    options: Optional[OptimizerOptions] = None,
) -> FitResult:
    """Refit with another variable as the outcome, dropping it from the predictors."""
    if new_outcome not in panel.variables:
        raise UnknownVariable(new_outcome)
    if new_outcome == spec.outcome_variable:
        return fit_study(panel, spec, options)
    return fit_study(panel, spec.with_outcome(new_outcome), options)


def unit_swap(
    panel: PanelDataset,
    spec: StudySpec,
    new_treated: str,
    options: Optional[OptimizerOptions] = None,
) -> FitResult:
    """Refit with a donor as the treated unit; the original treated takes its donor slot."""
    if new_treated not in spec.donor_units:
        raise UnknownUnit(new_treated)
    donors = [spec.treated_unit if d == new_treated else d for d in spec.donor_units]
    return fit_study(panel, spec.with_treated(new_treated, donors), options)
