from dataclasses import asdict, dataclass
from datetime import date


@dataclass(frozen=True)
class LongObservation:
    unit: str
    date: date
    variable: str
    value: float

    def to_dict(self):
        """Convert the dataclass to a dictionary."""
        return asdict(self)
