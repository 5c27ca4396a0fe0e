from pathlib import Path
from typing import Optional, Sequence

import click
import pandas as pd

from synth_control.orchestrator import StudyOrchestrator
from synth_control.patterns import PlaceboMode
from synth_control.report.config import load_config
from synth_control.report.schema import (
    FitDocument,
    LooDocument,
    PlaceboSpaceDocument,
    PlaceboTimeDocument,
    PrepReport,
    SwapDocument,
)
from synth_control.settings import get_settings
from synth_control.synthgen.generator import GroundTruth, SynthGenParams, write_synthgen


def _orchestrator(
    config_path: str, out_dir: Optional[str], seed: Optional[int]
) -> StudyOrchestrator:
    settings = get_settings()
    config = load_config(config_path).with_seed(seed)
    return StudyOrchestrator(
        config=config,
        out_dir=out_dir or settings.default_out_dir,
        base_dir=Path(config_path).resolve().parent,
        settings=settings,
    )


def _table(rows, columns) -> str:
    return pd.DataFrame(rows, columns=columns).to_string(index=False)


def _echo_fit(document: FitDocument, title: str) -> None:
    summary = document.summary
    click.echo(f"\n{title}")
    click.echo(
        _table(
            [(r.label, r.weight) for r in document.donor_weights if r.weight > 0],
            ["donor", "weight"],
        )
    )
    click.echo()
    click.echo(
        _table(
            [
                (r.predictor, r.treated, r.synthetic, r.sample_mean, r.improvement)
                for r in document.balance
            ],
            ["predictor", "treated", "synthetic", "sample_mean", "improvement"],
        )
    )
    ratio = "n/a" if summary.mspe_ratio is None else f"{summary.mspe_ratio:.6g}"
    click.echo(
        f"\naverage post gap {summary.average_post_gap:.6g} | "
        f"pre MSPE {summary.pre_mspe:.6g} | post MSPE {summary.post_mspe:.6g} | "
        f"ratio {ratio} | closer than sample mean on "
        f"{summary.improved_predictors}/{summary.total_predictors} predictors"
    )


def prepare_study(config_path: str, out_dir: Optional[str] = None) -> PrepReport:
    """Validate the input CSV and write the prepared panel with its report."""
    report = _orchestrator(config_path, out_dir, None).prepare()
    click.echo(
        f"Prepared {len(report.units)} units x {report.weeks} weeks "
        f"({report.first_week} .. {report.last_week})"
    )
    if report.dropped_variables:
        click.echo(f"Dropped incomplete variables: {', '.join(report.dropped_variables)}")
    click.echo(
        _table(
            [(s.variable, s.reason, s.correlated_with or "") for s in report.screening],
            ["candidate", "decision", "correlated_with"],
        )
    )
    return report


def fit_synthetic_control(
    config_path: str, out_dir: Optional[str] = None, seed: Optional[int] = None
) -> FitDocument:
    document = _orchestrator(config_path, out_dir, seed).fit()
    _echo_fit(document, f"Synthetic control for {document.study['treated_unit']}")
    return document


def run_placebo(
    config_path: str,
    mode: PlaceboMode,
    out_dir: Optional[str] = None,
    seed: Optional[int] = None,
    shift_weeks: Optional[int] = None,
    names: Sequence[str] = (),
):
    document = _orchestrator(config_path, out_dir, seed).placebo(mode, shift_weeks, names)

    if isinstance(document, PlaceboSpaceDocument):
        click.echo(
            _table(
                [(r.unit, r.pre_mspe, r.post_mspe, r.ratio) for r in document.ratios],
                ["unit", "pre_mspe", "post_mspe", "ratio"],
            )
        )
        for c in document.cutoffs:
            limit = "no limit" if c.cutoff_multiple is None else f"{c.cutoff_multiple:g}x"
            verdict = "significant" if c.significant else "not significant"
            click.echo(
                f"\ncutoff {limit}: rank {c.treated_rank}/{c.ranked_units}, "
                f"p = {c.p_value:.4f} ({verdict}), {len(c.discarded)} discarded"
                + (f": {', '.join(c.discarded)}" if c.discarded else "")
            )
        if document.failed:
            click.echo(f"failed placebo fits: {', '.join(document.failed)}")
    elif isinstance(document, PlaceboTimeDocument):
        v = document.verdict
        _echo_fit(document.fit, f"In-time placebo at {v.placebo_treatment_week}")
        click.echo(
            f"placebo window ratio {v.ratio:.4g} "
            f"({'passed' if v.passed else 'not passed'}, threshold {v.pass_threshold:g})"
        )
        if v.first_divergence_week is not None:
            click.echo(
                f"sustained divergence from {v.first_divergence_week}, "
                f"{v.weeks_before_treatment} weeks before treatment"
            )
    elif isinstance(document, SwapDocument):
        for name, fit in document.fits.items():
            _echo_fit(fit, f"{document.mode} placebo: {name}")
    return document


def run_leave_one_out(
    config_path: str, out_dir: Optional[str] = None, seed: Optional[int] = None
) -> LooDocument:
    document = _orchestrator(config_path, out_dir, seed).loo()
    click.echo(
        _table(
            [
                (e.excluded_donor, e.average_post_gap, e.sign_flipped, e.pre_fit_degraded)
                for e in document.entries
            ],
            ["excluded_donor", "average_post_gap", "sign_flipped", "pre_fit_degraded"],
        )
    )
    click.echo(f"\nbaseline average gap {document.baseline_average_gap:.6g}")
    click.echo(document.verdict)
    return document


def generate_panel(params: SynthGenParams, out_dir: Optional[str] = None) -> GroundTruth:
    csv_path, truth = write_synthgen(params, out_dir or get_settings().default_out_dir)
    click.echo(
        f"Wrote {csv_path}: effect {truth.effect} on '{truth.treated_unit}' "
        f"from {truth.treatment_week}"
    )
    return truth
