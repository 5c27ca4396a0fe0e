from datetime import timedelta
from typing import List

from loguru import logger

from synth_control.errors import EmptyInput
from synth_control.ingest.csv_reader import observations_to_frame
from synth_control.ingest.observation import LongObservation
from synth_control.panel.dataset import PanelDataset, validate_panel, week_range
from synth_control.patterns import Aggregation, WeekAnchor


def week_start(day, week_anchor: WeekAnchor):
    """First day of the bucket containing ``day``."""
    return day - timedelta(days=(day.weekday() - week_anchor.weekday) % 7)


def to_weekly(
    observations: List[LongObservation],
    week_anchor: WeekAnchor = WeekAnchor.SUNDAY,
    aggregation: Aggregation = Aggregation.MEAN,
    validate: bool = True,
) -> PanelDataset:
    """
    Bucket daily observations into weeks starting on ``week_anchor``.

    The weekly value is the mean of the observations present in the bucket
    (or the latest one with ``Aggregation.LAST``). Units and variables keep
    their order of first appearance. Buckets without observations stay
    missing, so validation reports them as ``MissingValue``.
    """
    if not observations:
        raise EmptyInput("observations")
    week_anchor = WeekAnchor(week_anchor)
    aggregation = Aggregation(aggregation)

    frame = observations_to_frame(observations)
    frame["week"] = [week_start(d, week_anchor) for d in frame["date"]]

    grouped = frame.groupby(["variable", "unit", "week"], sort=False)
    if aggregation is Aggregation.MEAN:
        weekly = grouped["value"].mean()
    else:
        # stable sort keeps row order among same-day observations
        ordered = frame.sort_values("date", kind="mergesort")
        weekly = ordered.groupby(["variable", "unit", "week"], sort=False)["value"].last()

    first, last = min(frame["week"]), max(frame["week"])
    week_index = week_range(first, (last - first).days // 7 + 1)
    unit_ids = list(dict.fromkeys(frame["unit"]))
    variables = list(dict.fromkeys(frame["variable"]))

    panel = PanelDataset.from_cells(
        {key: float(value) for key, value in weekly.items()},
        unit_ids,
        week_index,
        variables,
    )
    logger.info(
        f"Aggregated {len(observations)} observations into {len(week_index)} weeks "
        f"({aggregation.value}, weeks start {week_anchor.value})"
    )
    return validate_panel(panel) if validate else panel


__all__ = ["to_weekly", "week_start"]
