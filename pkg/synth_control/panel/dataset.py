from dataclasses import dataclass
from datetime import date, timedelta
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from synth_control.errors import (
    DuplicateUnit,
    DuplicateVariable,
    EmptyInput,
    IrregularWeekSpacing,
    MissingValue,
    UnknownUnit,
    UnknownVariable,
    UnknownWeek,
)

WeekKey = Union[int, date, str]

LONG_COLUMNS = ["unit", "date", "variable", "value"]


@dataclass(frozen=True, eq=False)
class PanelDataset:
    """
    Rectangular unit x week x variable panel.

    ``values`` is addressed as ``values[variable, unit, week]``. Instances are
    read-only: every transform returns a new panel.
    """

    unit_ids: Tuple[str, ...]
    week_index: Tuple[date, ...]
    variables: Tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "unit_ids", tuple(str(u) for u in self.unit_ids))
        object.__setattr__(self, "week_index", tuple(self.week_index))
        object.__setattr__(self, "variables", tuple(str(v) for v in self.variables))
        values = np.array(self.values, dtype=float, copy=True)
        expected = (len(self.variables), len(self.unit_ids), len(self.week_index))
        if values.shape != expected:
            raise ValueError(
                f"Panel values have shape {values.shape}, expected {expected}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PanelDataset):
            return NotImplemented
        return (
            self.unit_ids == other.unit_ids
            and self.week_index == other.week_index
            and self.variables == other.variables
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def n_weeks(self) -> int:
        return len(self.week_index)

    def unit_position(self, unit: str) -> int:
        try:
            return self.unit_ids.index(unit)
        except ValueError:
            raise UnknownUnit(unit) from None

    def variable_position(self, variable: str) -> int:
        try:
            return self.variables.index(variable)
        except ValueError:
            raise UnknownVariable(variable) from None

    def week_position(self, week: WeekKey) -> int:
        """Resolve a week given as position, ``date`` or ISO string."""
        if isinstance(week, (int, np.integer)) and not isinstance(week, bool):
            if 0 <= week < self.n_weeks:
                return int(week)
            raise UnknownWeek(week)
        if isinstance(week, str):
            try:
                week = date.fromisoformat(week)
            except ValueError:
                raise UnknownWeek(week) from None
        try:
            return self.week_index.index(week)
        except ValueError:
            raise UnknownWeek(week) from None

    def value(self, variable: str, unit: str, week: WeekKey) -> float:
        return float(
            self.values[
                self.variable_position(variable),
                self.unit_position(unit),
                self.week_position(week),
            ]
        )

    def series(self, variable: str, unit: str) -> np.ndarray:
        """Full-horizon series of one variable for one unit."""
        return self.values[self.variable_position(variable), self.unit_position(unit)]

    def matrix(self, variable: str, units: Sequence[str]) -> np.ndarray:
        """Weeks x units matrix of one variable, columns in ``units`` order."""
        var = self.variable_position(variable)
        cols = [self.unit_position(u) for u in units]
        return self.values[var][cols].T

    def with_variable(self, name: str, data: np.ndarray) -> "PanelDataset":
        """Return a new panel with ``name`` added (or replaced) from a unit x week array."""
        data = np.asarray(data, dtype=float)
        if data.shape != (len(self.unit_ids), self.n_weeks):
            raise ValueError(
                f"Variable '{name}' has shape {data.shape}, "
                f"expected {(len(self.unit_ids), self.n_weeks)}"
            )
        if name in self.variables:
            values = np.array(self.values)
            values[self.variables.index(name)] = data
            variables = self.variables
        else:
            values = np.concatenate([self.values, data[np.newaxis]], axis=0)
            variables = self.variables + (name,)
        return PanelDataset(self.unit_ids, self.week_index, variables, values)

    def drop_variables(self, names: Iterable[str]) -> "PanelDataset":
        names = set(names)
        keep = [i for i, v in enumerate(self.variables) if v not in names]
        return PanelDataset(
            self.unit_ids,
            self.week_index,
            tuple(self.variables[i] for i in keep),
            self.values[keep],
        )

    def incomplete_variables(self) -> List[str]:
        """Variables with at least one missing (unit, week) cell."""
        missing = np.isnan(self.values).any(axis=(1, 2))
        return [v for v, bad in zip(self.variables, missing) if bad]

    def to_long_frame(self) -> pd.DataFrame:
        """Long ``unit,date,variable,value`` frame, ordered by unit, variable, week."""
        rows = []
        for u, unit in enumerate(self.unit_ids):
            for v, variable in enumerate(self.variables):
                for w, week in enumerate(self.week_index):
                    rows.append(
                        (unit, week.isoformat(), variable, float(self.values[v, u, w]))
                    )
        return pd.DataFrame(rows, columns=LONG_COLUMNS)

    @classmethod
    def from_cells(
        cls,
        cells: Dict[Tuple[str, str, date], float],
        unit_ids: Sequence[str],
        week_index: Sequence[date],
        variables: Sequence[str],
    ) -> "PanelDataset":
        """Assemble a dense panel from sparse (variable, unit, week) cells, NaN where absent."""
        values = np.full((len(variables), len(unit_ids), len(week_index)), np.nan)
        v_pos = {v: i for i, v in enumerate(variables)}
        u_pos = {u: i for i, u in enumerate(unit_ids)}
        w_pos = {w: i for i, w in enumerate(week_index)}
        for (variable, unit, week), value in cells.items():
            values[v_pos[variable], u_pos[unit], w_pos[week]] = value
        return cls(tuple(unit_ids), tuple(week_index), tuple(variables), values)

    @classmethod
    def from_long_frame(cls, frame: pd.DataFrame) -> "PanelDataset":
        """Inverse of :meth:`to_long_frame` for data that is already weekly."""
        if frame.empty:
            raise EmptyInput("panel frame")
        dates = [date.fromisoformat(str(d)) for d in frame["date"]]
        unit_ids = list(dict.fromkeys(str(u) for u in frame["unit"]))
        variables = list(dict.fromkeys(str(v) for v in frame["variable"]))
        week_index = sorted(set(dates))
        cells = {
            (str(v), str(u), d): float(x)
            for u, d, v, x in zip(frame["unit"], dates, frame["variable"], frame["value"])
        }
        return cls.from_cells(cells, unit_ids, week_index, variables)


def validate_panel(raw_panel: PanelDataset) -> PanelDataset:
    """
    Check every panel invariant and return the panel unchanged.

    Errors identify the first offending coordinate, scanning variables, then
    units, then weeks in declared order.
    """
    if not raw_panel.unit_ids:
        raise EmptyInput("panel units")
    seen = set()
    for unit in raw_panel.unit_ids:
        if unit in seen:
            raise DuplicateUnit(unit)
        seen.add(unit)

    seen = set()
    for variable in raw_panel.variables:
        if variable in seen:
            raise DuplicateVariable(variable)
        seen.add(variable)

    if not raw_panel.week_index:
        raise EmptyInput("panel weeks")
    for previous, current in zip(raw_panel.week_index, raw_panel.week_index[1:]):
        gap = (current - previous).days
        if gap != 7:
            raise IrregularWeekSpacing(gap, current.isoformat())

    missing = np.argwhere(~np.isfinite(raw_panel.values))
    if missing.size:
        v, u, w = missing[0]
        raise MissingValue(
            raw_panel.variables[v],
            raw_panel.unit_ids[u],
            raw_panel.week_index[w].isoformat(),
        )

    logger.debug(
        f"Validated panel: {len(raw_panel.unit_ids)} units, "
        f"{raw_panel.n_weeks} weeks, {len(raw_panel.variables)} variables"
    )
    return raw_panel


def week_range(start: date, weeks: int) -> List[date]:
    return [start + timedelta(weeks=i) for i in range(weeks)]
