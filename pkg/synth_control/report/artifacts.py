import json
from pathlib import Path
from typing import Dict, List, Optional, Union

import pandas as pd
from loguru import logger
from pydantic import BaseModel

from synth_control.engine.fit import FitResult
from synth_control.inference.placebo import PlaceboStudy
from synth_control.panel.dataset import PanelDataset
from synth_control.report.schema import FitDocument, LooDocument, PlaceboSpaceDocument
from synth_control.sensitivity.leave_one_out import LooReport


class ArtifactWriter:
    """Writes tidy CSV tables and JSON result documents under one directory."""

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)

    def subdir(self, *parts: str) -> "ArtifactWriter":
        return ArtifactWriter(self.out_dir.joinpath(*parts))

    def _target(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        path = self._target(name)
        frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
        logger.debug(f"Wrote {path}")
        return path

    def write_json(self, name: str, document: Union[BaseModel, Dict]) -> Path:
        """Sorted keys, two-space indent, trailing newline: reruns are byte-identical."""
        payload = (
            document.model_dump(mode="json") if isinstance(document, BaseModel) else document
        )
        path = self._target(name)
        path.write_text(
            json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        logger.debug(f"Wrote {path}")
        return path

    def write_text(self, name: str, text: str) -> Path:
        path = self._target(name)
        path.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
        return path

    # fit

    def write_fit(self, document: FitDocument, result: Optional[BaseModel] = None) -> Path:
        """Every table of a fit plus ``result.json`` bundling all of them, or ``result``."""
        self.write_csv(
            "donor_weights.csv",
            pd.DataFrame(
                [(r.label, r.weight) for r in document.donor_weights],
                columns=["donor", "weight"],
            ),
        )
        self.write_csv(
            "predictor_weights.csv",
            pd.DataFrame(
                [(r.label, r.weight) for r in document.predictor_weights],
                columns=["predictor", "weight"],
            ),
        )
        self.write_csv(
            "balance.csv",
            pd.DataFrame(
                [r.model_dump() for r in document.balance],
                columns=["predictor", "treated", "synthetic", "sample_mean", "improvement"],
            ),
        )
        self.write_csv(
            "series.csv",
            pd.DataFrame(
                [r.model_dump() for r in document.series],
                columns=["week", "treated", "synthetic", "gap"],
            ),
        )
        self.write_csv("summary.csv", pd.DataFrame([document.summary.model_dump()]))
        path = self.write_json("result.json", result if result is not None else document)
        logger.info(f"Fit artifacts written to {self.out_dir}")
        return path

    def write_fit_result(
        self, fit: FitResult, panel: PanelDataset, exclusion_note: str = ""
    ) -> FitDocument:
        document = FitDocument.from_fit(fit, panel, exclusion_note)
        self.write_fit(document)
        return document

    # placebo in space

    def write_placebo_space(
        self, studies: List[PlaceboStudy], panel: PanelDataset
    ) -> PlaceboSpaceDocument:
        """Gap overlay (one column per unit), ratio table and one row per cutoff."""
        document = PlaceboSpaceDocument.from_studies(studies)
        gaps = pd.DataFrame({"week": [w.isoformat() for w in panel.week_index]})
        for unit, gap in document.gaps.items():
            gaps[unit] = gap
        self.write_csv("gaps.csv", gaps)
        self.write_csv(
            "ratios.csv",
            pd.DataFrame(
                [r.model_dump() for r in document.ratios],
                columns=["unit", "pre_mspe", "post_mspe", "ratio", "treated"],
            ),
        )
        self.write_csv(
            "cutoffs.csv",
            pd.DataFrame(
                [
                    {
                        "cutoff_multiple": "none"
                        if c.cutoff_multiple is None
                        else c.cutoff_multiple,
                        "discarded": ";".join(c.discarded),
                        "n_discarded": len(c.discarded),
                        "treated_rank": c.treated_rank,
                        "ranked_units": c.ranked_units,
                        "p_value": c.p_value,
                        "significant": c.significant,
                    }
                    for c in document.cutoffs
                ]
            ),
        )
        self.write_json("result.json", document)
        logger.info(f"In-space placebo artifacts written to {self.out_dir}")
        return document

    # leave-one-out

    def write_loo(self, report: LooReport, panel: PanelDataset) -> LooDocument:
        document = LooDocument.from_report(report)
        self.write_csv(
            "loo.csv",
            pd.DataFrame(
                [e.model_dump() for e in document.entries],
                columns=[
                    "excluded_donor",
                    "average_post_gap",
                    "pre_mspe",
                    "sign_flipped",
                    "pre_fit_degraded",
                    "error",
                ],
            ),
        )
        series = pd.DataFrame({"week": [w.isoformat() for w in panel.week_index]})
        for entry in report.entries:
            if entry.fit is not None:
                series[f"without_{entry.excluded_donor}"] = entry.fit.synthetic_outcome
        self.write_csv("loo_series.csv", series)
        self.write_text("verdict.txt", document.verdict)
        self.write_json("result.json", document)
        logger.info(f"Leave-one-out artifacts written to {self.out_dir}")
        return document
