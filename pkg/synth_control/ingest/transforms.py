"""Series transforms that derive the study variables from raw weekly data."""

from typing import Optional

import numpy as np

from synth_control.errors import NegativeValue, NonPositiveBaselinePrice, NonPositiveMaximum
from synth_control.panel.dataset import PanelDataset, WeekKey
from synth_control.patterns import VariableTransform

WALLET_INVESTMENT = 100.0
DEFAULT_LOG_FLOOR = 1e-9


def _check_non_negative(series: np.ndarray) -> None:
    negative = series < 0
    if negative.any():
        raise NegativeValue(float(series[negative][0]))


def wallet_value(prices, baseline_week: int) -> np.ndarray:
    """
    Value of a $100 position bought at ``baseline_week``.

    ``100 / prices[baseline]`` units are held, so the baseline week is worth
    exactly 100 and every other week scales with the price.
    """
    prices = np.asarray(prices, dtype=float)
    _check_non_negative(prices)
    baseline = prices[baseline_week]
    if not baseline > 0:
        raise NonPositiveBaselinePrice(float(baseline))
    # the ratio is exactly 1 at the baseline
    return WALLET_INVESTMENT * (prices / baseline)


def normalize_max(series) -> np.ndarray:
    """Scale a non-negative series into [0, 1] by its maximum."""
    series = np.asarray(series, dtype=float)
    _check_non_negative(series)
    peak = series.max() if series.size else 0.0
    if not peak > 0:
        raise NonPositiveMaximum()
    return series / peak


def log_transform(series, floor: float = DEFAULT_LOG_FLOOR) -> np.ndarray:
    if not floor > 0:
        raise ValueError(f"Log floor must be positive, got {floor}")
    return np.log(np.maximum(np.asarray(series, dtype=float), floor))


def derived_name(variable: str, transform: VariableTransform) -> str:
    transform = VariableTransform(transform)
    if transform is VariableTransform.LOG:
        return f"log_{variable}"
    if transform is VariableTransform.NORMALIZE_MAX:
        return f"{variable}_normalized"
    return variable


def add_wallet_value(
    panel: PanelDataset,
    price_variable: str,
    baseline_week: Optional[WeekKey] = None,
    name: str = "wallet_value",
) -> PanelDataset:
    """Add the wallet value of ``price_variable`` for every unit, baseline defaulting to week 0."""
    baseline = panel.week_position(baseline_week) if baseline_week is not None else 0
    rows = []
    for unit in panel.unit_ids:
        try:
            rows.append(wallet_value(panel.series(price_variable, unit), baseline))
        except NonPositiveBaselinePrice as e:
            raise NonPositiveBaselinePrice(e.price, unit) from None
    return panel.with_variable(name, np.vstack(rows))


def add_transformed(
    panel: PanelDataset,
    variable: str,
    transform: VariableTransform,
    log_floor: float = DEFAULT_LOG_FLOOR,
) -> PanelDataset:
    """Add ``transform(variable)`` per unit under its derived name."""
    transform = VariableTransform(transform)
    if transform is VariableTransform.NONE:
        panel.variable_position(variable)
        return panel
    rows = []
    for unit in panel.unit_ids:
        series = panel.series(variable, unit)
        if transform is VariableTransform.LOG:
            rows.append(log_transform(series, log_floor))
        else:
            try:
                rows.append(normalize_max(series))
            except NonPositiveMaximum:
                raise NonPositiveMaximum(unit, variable) from None
    return panel.with_variable(derived_name(variable, transform), np.vstack(rows))
