from enum import Enum


class WeekAnchor(str, Enum):
    """First day of a weekly bucket. Values follow ``date.weekday()``."""

    MONDAY = "monday"
    TUESDAY = "tuesday"
    WEDNESDAY = "wednesday"
    THURSDAY = "thursday"
    FRIDAY = "friday"
    SATURDAY = "saturday"
    SUNDAY = "sunday"

    @property
    def weekday(self) -> int:
        return list(WeekAnchor).index(self)


class Aggregation(str, Enum):
    MEAN = "mean"
    LAST = "last"


class VariableTransform(str, Enum):
    NONE = "none"
    LOG = "log"
    NORMALIZE_MAX = "normalize_max"


class OutcomeTransform(str, Enum):
    NONE = "none"
    WALLET_VALUE = "wallet_value"


class PlaceboMode(str, Enum):
    SPACE = "space"
    TIME = "time"
    OUTCOME = "outcome"
    UNIT = "unit"


class RankScope(str, Enum):
    ALL = "all"
    RETAINED = "retained"
