from .csv_reader import LongCsvReader, load_long_csv
from .observation import LongObservation
from .screening import ScreeningDecision, screen_predictors
from .transforms import log_transform, normalize_max, wallet_value
from .weekly import to_weekly

__all__ = [
    "LongCsvReader",
    "LongObservation",
    "ScreeningDecision",
    "load_long_csv",
    "log_transform",
    "normalize_max",
    "screen_predictors",
    "to_weekly",
    "wallet_value",
]
