from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from loguru import logger

from synth_control.engine.fit import FitResult, fit_study
from synth_control.engine.matrices import build_matrices
from synth_control.engine.weights import OptimizerOptions
from synth_control.errors import InsufficientDonors, OptimizationError
from synth_control.inference.placebo import fan_out
from synth_control.panel.dataset import PanelDataset
from synth_control.panel.study import StudySpec

DEFAULT_WEIGHT_FLOOR = 1e-3
DEFAULT_DEGRADATION_MULTIPLE = 4.0


@dataclass(frozen=True, eq=False)
class LooEntry:
    excluded_donor: str
    fit: Optional[FitResult]
    average_post_gap: Optional[float]
    sign_flipped: bool
    pre_fit_degraded: bool
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True, eq=False)
class LooReport:
    baseline_average_gap: float
    baseline_pre_mspe: float
    weight_floor: float
    degradation_multiple: float
    entries: List[LooEntry]

    @property
    def sign_flips(self) -> List[str]:
        return [e.excluded_donor for e in self.entries if e.sign_flipped]

    @property
    def degraded(self) -> List[str]:
        return [e.excluded_donor for e in self.entries if e.pre_fit_degraded]

    @property
    def failures(self) -> List[str]:
        return [e.excluded_donor for e in self.entries if e.failed]

    @property
    def robust(self) -> bool:
        """Not robust as soon as one exclusion flips the sign, spoils the pre-fit or fails to refit."""
        return not (self.sign_flips or self.degraded or self.failures)

    @property
    def inconclusive(self) -> bool:
        return bool(self.failures) and not (self.sign_flips or self.degraded)

    def verdict(self) -> str:
        if self.robust:
            return "robust: the effect keeps its sign and pre-treatment fit without any single donor"
        failed = f"refit failed without {', '.join(self.failures)}"
        if self.inconclusive:
            return "inconclusive: " + failed
        reasons = []
        if self.sign_flips:
            reasons.append(f"sign flips without {', '.join(self.sign_flips)}")
        if self.degraded:
            reasons.append(f"pre-treatment fit degrades without {', '.join(self.degraded)}")
        if self.failures:
            reasons.append(failed)
        return "not robust: " + "; ".join(reasons)


def leave_one_out(
    panel: PanelDataset,
    spec: StudySpec,
    baseline: FitResult,
    weight_floor: float = DEFAULT_WEIGHT_FLOOR,
    degradation_multiple: float = DEFAULT_DEGRADATION_MULTIPLE,
    options: Optional[OptimizerOptions] = None,
    fixed_v: bool = False,
    max_workers: int = 1,
    progress: bool = False,
) -> LooReport:
    """
    Refit once per donor whose baseline weight exceeds ``weight_floor``, each
    time without that donor. Every refit keeps the predictor scale of the
    full pool. With ``fixed_v`` the baseline predictor weights are reused
    instead of searching V again.
    """
    if not 0 <= weight_floor < 1:
        raise ValueError(f"Weight floor must be in [0, 1), got {weight_floor}")
    active = [d for d in spec.donor_units if baseline.donor_weights.weights[d] > weight_floor]
    v = baseline.predictor_weights if fixed_v else None
    scale = build_matrices(panel, spec).scale
    baseline_sign = np.sign(baseline.average_post_gap)

    def refit(donor: str) -> LooEntry:
        reduced = spec.with_donors([d for d in spec.donor_units if d != donor])
        try:
            fit = fit_study(panel, reduced, options, predictor_weights=v, scale=scale)
        except (OptimizationError, InsufficientDonors) as e:
            logger.warning(f"Leave-one-out refit without '{donor}' failed: {e}")
            return LooEntry(donor, None, None, False, False, str(e))
        return LooEntry(
            excluded_donor=donor,
            fit=fit,
            average_post_gap=fit.average_post_gap,
            sign_flipped=bool(np.sign(fit.average_post_gap) != baseline_sign),
            pre_fit_degraded=fit.pre_mspe > degradation_multiple * baseline.pre_mspe,
        )

    entries = fan_out(
        active, refit, max_workers=max_workers, progress=progress, desc="leave-one-out"
    )
    report = LooReport(
        baseline_average_gap=baseline.average_post_gap,
        baseline_pre_mspe=baseline.pre_mspe,
        weight_floor=weight_floor,
        degradation_multiple=degradation_multiple,
        entries=entries,
    )
    logger.info(f"Leave-one-out over {len(entries)} donors: {report.verdict()}")
    return report
