from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import pandas as pd
from loguru import logger

from synth_control.engine.fit import fit_study
from synth_control.engine.weights import OptimizerOptions
from synth_control.errors import ConfigError, DataError, MissingArtifact, UnknownUnit
from synth_control.inference.placebo import (
    placebo_in_space,
    placebo_in_time,
    placebo_outcome_swap,
    unit_swap,
)
from synth_control.ingest.csv_reader import LongCsvReader
from synth_control.ingest.screening import screen_predictors_with_decisions
from synth_control.ingest.transforms import add_transformed, add_wallet_value, derived_name
from synth_control.ingest.weekly import to_weekly
from synth_control.panel.dataset import PanelDataset, validate_panel
from synth_control.panel.study import StudySpec, validate_spec
from synth_control.patterns import OutcomeTransform, PlaceboMode, VariableTransform
from synth_control.report.artifacts import ArtifactWriter
from synth_control.report.config import StudyConfig, dump_config
from synth_control.report.schema import (
    FitDocument,
    LooDocument,
    PlaceboSpaceDocument,
    PlaceboTimeDocument,
    PrepReport,
    ScreeningRecord,
    SwapDocument,
    VerdictRecord,
)
from synth_control.sensitivity.leave_one_out import leave_one_out
from synth_control.settings import Settings, get_settings

PANEL_FILE = "panel.csv"
PREP_REPORT_FILE = "prep_report.json"
CONFIG_FILE = "config.json"
_PREPARE_HINT = " (run `synth-control prepare` first)"

PlaceboDocument = Union[PlaceboSpaceDocument, PlaceboTimeDocument, SwapDocument]


class StudyOrchestrator:
    """Runs one configured study from the raw CSV to result artifacts."""

    def __init__(
        self,
        config: StudyConfig,
        out_dir: Union[str, Path],
        base_dir: Union[str, Path] = ".",
        settings: Optional[Settings] = None,
    ):
        self.config = config
        self.base_dir = Path(base_dir)
        self.settings = settings or get_settings()
        self.reader = LongCsvReader()
        self.writer = ArtifactWriter(out_dir)
        self.options = OptimizerOptions(
            n_starts=config.optimizer.n_starts,
            lattice_budget=config.optimizer.lattice_budget,
            n_refine=config.optimizer.n_refine,
            max_iter=config.optimizer.max_iter,
            seed=config.seed,
        )

    # prepare

    def prepare(self) -> PrepReport:
        """
        Read, bucket and validate the input, derive the outcome and the
        transformed variables, screen the predictor candidates and write the
        prepared panel with its report.
        """
        data = self.config.data
        source = self.config.resolve_input(self.base_dir)
        if not source.is_file():
            raise MissingArtifact(str(source))
        report = PrepReport(status="failed", input_csv=str(source))

        try:
            observations = self.reader.read(source)
            panel = to_weekly(
                observations, data.week_anchor, data.aggregation, validate=False
            )
            report = report.model_copy(update=self._describe(panel, len(observations)))

            dropped: List[str] = []
            if data.drop_incomplete_variables:
                required = self._required_variables()
                dropped = [v for v in panel.incomplete_variables() if v not in required]
                if dropped:
                    logger.warning(f"Dropping incomplete variables: {', '.join(dropped)}")
                    panel = panel.drop_variables(dropped)
            report = report.model_copy(update={"dropped_variables": dropped})

            validate_panel(panel)
            panel, derived = self._derive(panel)
            spec = self._base_spec(panel, list(self.config.predictors.candidates))
            kept, decisions = screen_predictors_with_decisions(
                panel,
                self.config.predictors.candidates,
                self.config.predictors.screening_threshold,
                spec.treated_unit,
                spec.pre_window,
            )
        except DataError as e:
            report = report.model_copy(update={"error": str(e)})
            self.writer.write_json(PREP_REPORT_FILE, report)
            raise

        if not kept and not self.config.predictors.outcome_lags:
            raise ConfigError("no predictor candidate survived screening")

        report = report.model_copy(
            update={
                "status": "ok",
                "variables": list(panel.variables),
                "derived_variables": derived,
                "screening": [ScreeningRecord(**d.to_dict()) for d in decisions],
                "predictors": kept,
            }
        )
        self.writer.write_csv(PANEL_FILE, panel.to_long_frame())
        self.writer.write_json(PREP_REPORT_FILE, report)
        self._write_config()
        logger.info(
            f"Prepared panel: {len(panel.unit_ids)} units, {panel.n_weeks} weeks, "
            f"{len(kept)} predictors kept of {len(self.config.predictors.candidates)}"
        )
        return report

    @staticmethod
    def _describe(panel: PanelDataset, observations: int) -> dict:
        return {
            "observations": observations,
            "units": list(panel.unit_ids),
            "first_week": panel.week_index[0].isoformat(),
            "last_week": panel.week_index[-1].isoformat(),
            "weeks": panel.n_weeks,
            "variables": list(panel.variables),
        }

    def _required_variables(self) -> set:
        required = {self.config.outcome.variable}
        required.update(self.config.transforms.variables)
        required.update(self.config.predictors.candidates)
        required.update(self.config.placebo.outcome_swaps)
        return required

    def _derive(self, panel: PanelDataset) -> Tuple[PanelDataset, List[str]]:
        derived: List[str] = []
        outcome = self.config.outcome
        if outcome.transform is OutcomeTransform.WALLET_VALUE:
            panel = add_wallet_value(
                panel, outcome.variable, outcome.baseline_week, outcome.name
            )
            derived.append(outcome.name)
        transforms = self.config.transforms
        for variable, transform in transforms.variables.items():
            panel = add_transformed(panel, variable, transform, transforms.log_floor)
            if transform is not VariableTransform.NONE:
                derived.append(derived_name(variable, transform))
        return panel, derived

    # study definition

    def _base_spec(self, panel: PanelDataset, predictors: Sequence[str]) -> StudySpec:
        study = self.config.study
        if study.treated_unit not in panel.unit_ids:
            raise UnknownUnit(study.treated_unit)
        donors = (
            list(study.donor_units)
            if study.donor_units is not None
            else [u for u in panel.unit_ids if u != study.treated_unit]
        )
        for excluded in study.excluded_donors:
            if excluded not in panel.unit_ids:
                raise UnknownUnit(excluded)
        donors = [d for d in donors if d not in study.excluded_donors]
        if study.excluded_donors:
            logger.info(
                f"Excluded donors {', '.join(study.excluded_donors)}"
                + (f": {study.exclusion_note}" if study.exclusion_note else "")
            )

        spec = StudySpec.build(
            panel,
            treated_unit=study.treated_unit,
            treatment_week=study.treatment_week,
            outcome_variable=self.config.outcome.outcome_variable,
            predictor_variables=predictors,
            donor_units=donors,
            pre_start=study.pre_window[0] if study.pre_window else None,
            post_end=study.post_window[1] if study.post_window else None,
            outcome_lags=self.config.predictors.outcome_lags,
        )
        # explicit window ends that disagree with the treatment week fail validation
        if study.pre_window:
            spec = replace(
                spec,
                pre_window=(spec.pre_window[0], panel.week_position(study.pre_window[1])),
            )
        if study.post_window:
            spec = replace(
                spec,
                post_window=(panel.week_position(study.post_window[0]), spec.post_window[1]),
            )
        return spec

    def build_spec(self, panel: PanelDataset, report: PrepReport) -> StudySpec:
        return validate_spec(self._base_spec(panel, report.predictors), panel)

    def load_prepared(self) -> Tuple[PanelDataset, PrepReport]:
        panel_path = self.writer.out_dir / PANEL_FILE
        report_path = self.writer.out_dir / PREP_REPORT_FILE
        for path in (panel_path, report_path):
            if not path.is_file():
                raise MissingArtifact(str(path), _PREPARE_HINT)
        report = PrepReport.model_validate_json(report_path.read_text(encoding="utf-8"))
        if report.status != "ok":
            raise MissingArtifact(str(panel_path), _PREPARE_HINT)
        frame = pd.read_csv(
            panel_path,
            dtype={"unit": str, "date": str, "variable": str},
            keep_default_na=False,
            float_precision="round_trip",
        )
        return validate_panel(PanelDataset.from_long_frame(frame)), report

    def _write_config(self) -> None:
        self.writer.write_text(CONFIG_FILE, dump_config(self.config))

    # commands

    def fit(self) -> FitDocument:
        panel, report = self.load_prepared()
        spec = self.build_spec(panel, report)
        fit = fit_study(panel, spec, self.options)
        self._write_config()
        return self.writer.subdir("fit").write_fit_result(
            fit, panel, self.config.study.exclusion_note
        )

    def placebo(
        self,
        mode: PlaceboMode,
        shift_weeks: Optional[int] = None,
        names: Sequence[str] = (),
    ) -> PlaceboDocument:
        """
        :param mode: which placebo to run
        :param shift_weeks: in-time shift, defaults to the config's
        :param names: outcomes or units to swap in, default to the config's lists
        """
        panel, report = self.load_prepared()
        spec = self.build_spec(panel, report)
        self._write_config()
        mode = PlaceboMode(mode)
        if mode is PlaceboMode.SPACE:
            return self._placebo_space(panel, spec)
        if mode is PlaceboMode.TIME:
            return self._placebo_time(panel, spec, shift_weeks)
        if mode is PlaceboMode.OUTCOME:
            return self._swaps(panel, spec, mode, names or self.config.placebo.outcome_swaps)
        return self._swaps(panel, spec, mode, names or self.config.placebo.unit_swaps)

    def _placebo_space(self, panel: PanelDataset, spec: StudySpec) -> PlaceboSpaceDocument:
        placebo = self.config.placebo
        base = placebo_in_space(
            panel,
            spec,
            cutoff_multiple=None,
            options=self.options,
            rank_scope=placebo.rank_scope,
            max_workers=self.settings.max_workers,
            progress=self.settings.progress,
        )
        studies = [base.with_cutoff(c) for c in placebo.cutoffs()] or [base]
        return self.writer.subdir("placebo_space").write_placebo_space(studies, panel)

    def _placebo_time(
        self, panel: PanelDataset, spec: StudySpec, shift_weeks: Optional[int]
    ) -> PlaceboTimeDocument:
        placebo = self.config.placebo
        shift = shift_weeks if shift_weeks is not None else placebo.shift_weeks
        fit, verdict = placebo_in_time(
            panel,
            spec,
            shift,
            options=self.options,
            pass_threshold=placebo.pass_threshold,
            divergence_multiple=placebo.divergence_multiple,
            divergence_run=placebo.divergence_run,
        )
        fit_document = FitDocument.from_fit(fit, panel, self.config.study.exclusion_note)
        document = PlaceboTimeDocument(
            shift_weeks=shift,
            verdict=VerdictRecord.from_verdict(verdict, panel),
            fit=fit_document,
        )
        self.writer.subdir("placebo_time").write_fit(fit_document, result=document)
        return document

    def _swaps(
        self,
        panel: PanelDataset,
        spec: StudySpec,
        mode: PlaceboMode,
        names: Sequence[str],
    ) -> SwapDocument:
        if not names:
            raise ConfigError(f"no names to swap in for the {mode.value} placebo")
        writer = self.writer.subdir(f"placebo_{mode.value}")
        fits = {}
        for name in names:
            if mode is PlaceboMode.OUTCOME:
                fit = placebo_outcome_swap(panel, spec, name, self.options)
            else:
                fit = unit_swap(panel, spec, name, self.options)
            fits[name] = writer.subdir(name).write_fit_result(
                fit, panel, self.config.study.exclusion_note
            )
        document = SwapDocument(mode=mode.value, fits=fits)
        writer.write_json("result.json", document)
        return document

    def loo(self) -> LooDocument:
        panel, report = self.load_prepared()
        spec = self.build_spec(panel, report)
        self._write_config()
        loo = self.config.loo
        baseline = fit_study(panel, spec, self.options)
        result = leave_one_out(
            panel,
            spec,
            baseline,
            weight_floor=loo.weight_floor,
            degradation_multiple=loo.degradation_multiple,
            options=self.options,
            fixed_v=loo.fixed_v,
            max_workers=self.settings.max_workers,
            progress=self.settings.progress,
        )
        return self.writer.subdir("loo").write_loo(result, panel)
